"""Spectrum and time-periodic solutions of the variable-coefficient wave equation.

``rho(x) u_tt - (rho(x) u_x)_x = mu rho u + rho |u|**(p-1) u`` on ``[0, pi]``,
periodic in time, with homogeneous Robin data at both ends.
"""

from .coefficient import (
    Coefficient,
    SpectralConstants,
    exponential,
    from_samples,
    from_seismic,
    make_coefficient,
    spectral_constants,
    tabulated,
)
from .errors import PeriodicWaveError
from .solver import (
    SolutionRecord,
    Symmetry,
    fixed_point_solve,
    orbit_distance,
    saddle_search,
    solution_sequence,
    truncation_study,
    verify_solution,
)
from .space import CoeffField, GridField, WaveSpace, e_norm
from .spectrum import (
    PeriodSpec,
    SpectrumTable,
    admissible_mu,
    build_spectrum,
    certify_accumulation,
    lambda_plus,
    make_period,
)
from .sturm_liouville import EigenBasis, RobinBC, boundary_transform, certify_asymptotics, eigensolve
from .variational import level_bounds, mass, phi, phi_grad

__version__ = "0.1.0"

__all__ = [
    "CoeffField",
    "Coefficient",
    "EigenBasis",
    "GridField",
    "PeriodSpec",
    "PeriodicWaveError",
    "RobinBC",
    "SolutionRecord",
    "SpectralConstants",
    "SpectrumTable",
    "Symmetry",
    "WaveSpace",
    "admissible_mu",
    "boundary_transform",
    "build_spectrum",
    "certify_accumulation",
    "certify_asymptotics",
    "e_norm",
    "eigensolve",
    "exponential",
    "fixed_point_solve",
    "from_samples",
    "from_seismic",
    "lambda_plus",
    "level_bounds",
    "make_coefficient",
    "make_period",
    "mass",
    "orbit_distance",
    "phi",
    "phi_grad",
    "saddle_search",
    "solution_sequence",
    "spectral_constants",
    "tabulated",
    "truncation_study",
    "verify_solution",
]
