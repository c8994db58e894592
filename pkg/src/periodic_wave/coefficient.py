"""Acoustic impedance models and the constants derived from the Liouville potential.

The impedance ``rho`` lives on the fixed interval ``[0, pi]``.  Everything
downstream only needs ``rho``, ``rho'``, ``rho''`` and the potential

    eta(x) = rho''/(2 rho) - (rho'/rho)**2 / 4

which appears once the weighted Sturm-Liouville problem is written in
potential form via ``z = sqrt(rho) * phi``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, optimize
from scipy.interpolate import CubicSpline, PchipInterpolator

from .errors import (
    DegenerateProfile,
    DomainError,
    InvalidCoefficient,
    InvalidProfile,
    InvalidSpec,
)

PI = math.pi
_X_TOL = 1e-12

# grid used for the infimum of eta and for beta0 on tabulated data
N_INF_GRID = 4097


@dataclass(frozen=True)
class Coefficient:
    """Immutable impedance model on ``[0, pi]``.

    ``rho``, ``drho`` and ``d2rho`` are vectorised callables.  ``info`` holds
    model-specific metadata (the exponent ``c``, the seismic rescale factor,
    the observed minimum of tabulated data, ...).
    """

    model: str
    rho: Callable[[np.ndarray], np.ndarray]
    drho: Callable[[np.ndarray], np.ndarray]
    d2rho: Callable[[np.ndarray], np.ndarray]
    beta0: float
    info: dict = field(default_factory=dict)

    def log_derivative(self, x):
        x = np.asarray(x, dtype=float)
        return self.drho(x) / self.rho(x)

    def reflected(self) -> "Coefficient":
        """The coefficient ``x -> rho(pi - x)``."""
        return Coefficient(
            model=self.model,
            rho=lambda x: self.rho(PI - np.asarray(x, dtype=float)),
            drho=lambda x: -self.drho(PI - np.asarray(x, dtype=float)),
            d2rho=lambda x: self.d2rho(PI - np.asarray(x, dtype=float)),
            beta0=self.beta0,
            info={**self.info, "reflected": not self.info.get("reflected", False)},
        )

    def scaled(self, s: float) -> "Coefficient":
        if not s > 0:
            raise InvalidCoefficient("scale factor must be positive")
        return Coefficient(
            model=self.model,
            rho=lambda x: s * self.rho(x),
            drho=lambda x: s * self.drho(x),
            d2rho=lambda x: s * self.d2rho(x),
            beta0=s * self.beta0,
            info={**self.info, "scale": s * self.info.get("scale", 1.0)},
        )


def exponential(c: float) -> Coefficient:
    """``rho(x) = exp(2 c x)``; its potential is the constant ``c**2``."""
    c = float(c)

    def rho(x):
        return np.exp(2.0 * c * np.asarray(x, dtype=float))

    def drho(x):
        return 2.0 * c * rho(x)

    def d2rho(x):
        return 4.0 * c * c * rho(x)

    beta0 = math.exp(2.0 * c * PI) if c >= 0 else 1.0
    return Coefficient("exponential", rho, drho, d2rho, beta0, {"c": c})


def tabulated(values, bc_type="not-a-knot") -> Coefficient:
    """Cubic-spline impedance from samples on a uniform grid over ``[0, pi]``."""
    values = np.asarray(values, dtype=float).ravel()
    if values.size < 3:
        raise InvalidSpec("a tabulated impedance needs at least 3 samples")
    if not np.all(np.isfinite(values)) or np.any(values <= 0):
        raise InvalidCoefficient("tabulated impedance must be strictly positive")
    x = np.linspace(0.0, PI, values.size)
    if values.size == 3 and bc_type == "not-a-knot":
        bc_type = "natural"
    spline = CubicSpline(x, values, bc_type=bc_type)
    d1 = spline.derivative(1)
    d2 = spline.derivative(2)
    xs = np.union1d(np.linspace(0.0, PI, N_INF_GRID), x)
    dense = spline(xs)
    if np.any(dense <= 0):
        raise InvalidCoefficient("spline interpolant of the table is not positive")
    return Coefficient(
        "tabulated",
        lambda t: spline(np.asarray(t, dtype=float)),
        lambda t: d1(np.asarray(t, dtype=float)),
        lambda t: d2(np.asarray(t, dtype=float)),
        float(dense.max()),
        {"n": int(values.size), "rho_min": float(dense.min()), "knots": x,
         "spline": spline, "bc_type": bc_type},
    )


def make_coefficient(spec) -> Coefficient:
    """Build a coefficient from a model description.

    ``spec`` is a mapping with ``model`` equal to ``"exponential"`` (key
    ``c``) or ``"tabulated"`` (key ``rho`` with samples, or ``file`` pointing
    to an ``x,rho`` CSV), or a ``Coefficient`` which is returned unchanged.
    """
    if isinstance(spec, Coefficient):
        return spec
    if not hasattr(spec, "get"):
        raise InvalidSpec(f"unrecognised coefficient spec {spec!r}")
    model = spec.get("model")
    if model == "exponential":
        if "c" not in spec:
            raise InvalidSpec("exponential model needs parameter c")
        return exponential(spec["c"])
    if model == "tabulated":
        if "rho" in spec:
            return tabulated(spec["rho"], spec.get("bc_type", "not-a-knot"))
        if "file" in spec:
            cols = read_profile_csv(spec["file"], ("x", "rho"))
            return from_samples(cols["x"], cols["rho"])
        raise InvalidSpec("tabulated model needs 'rho' samples or a 'file'")
    if model == "seismic":
        if "file" not in spec:
            raise InvalidSpec("seismic model needs a 'file' with z,omega,nu columns")
        cols = read_profile_csv(spec["file"], ("z", "omega", "nu"))
        return from_seismic(cols["omega"], cols["nu"], cols["z"][-1], z=cols["z"])
    raise InvalidSpec(f"unknown coefficient model {model!r}")


def from_samples(x, rho) -> Coefficient:
    """Tabulated coefficient from an ``x,rho`` table covering ``[0, pi]``.

    Non-uniform tables are resampled onto a uniform grid by monotone cubic
    interpolation first.
    """
    x = np.asarray(x, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if x.size < 3:
        raise InvalidSpec("a tabulated impedance needs at least 3 samples")
    if abs(x[0]) > 1e-9 or abs(x[-1] - PI) > 1e-9:
        raise InvalidSpec("tabulated x must span [0, pi]")
    uniform = np.linspace(0.0, PI, x.size)
    if np.allclose(x, uniform, rtol=0, atol=1e-9):
        return tabulated(rho)
    if np.any(rho <= 0):
        raise InvalidCoefficient("tabulated impedance must be strictly positive")
    n = max(x.size, 1025)
    grid = np.linspace(0.0, PI, n)
    return tabulated(PchipInterpolator(x, rho)(grid))


def _check_x(x):
    x = np.asarray(x, dtype=float)
    if np.any(x < -_X_TOL) or np.any(x > PI + _X_TOL):
        raise DomainError("position outside [0, pi]")
    return np.clip(x, 0.0, PI)


def eta_rho(coeff: Coefficient, x):
    """Liouville potential ``rho''/(2 rho) - (rho'/rho)**2/4`` at ``x``."""
    x = _check_x(x)
    r = coeff.rho(x)
    return 0.5 * coeff.d2rho(x) / r - 0.25 * (coeff.drho(x) / r) ** 2


@dataclass(frozen=True)
class SpectralConstants:
    """Constants built from the potential ``eta``.

    eta_inf       ess inf of eta
    eta_mean2     (2/pi) * integral of eta over [0, pi]
    sqrt_shift    sqrt(eta_inf + 1) - 1
    ratio         eta_inf / (1 + eta_inf)
    robin         (1/pi)(alpha1/beta1 + alpha2/beta2 + 1 + integral of eta),
                  only when both beta are positive
    """

    eta_inf: float
    eta_mean2: float
    sqrt_shift: float
    ratio: float
    robin: float | None
    eta_integral: float
    inf_grid: int
    argmin: float
    positive: bool

    def as_dict(self):
        return {
            "eta_inf": self.eta_inf,
            "eta_mean2": self.eta_mean2,
            "sqrt_shift": self.sqrt_shift,
            "ratio": self.ratio,
            "robin": self.robin,
            "eta_integral": self.eta_integral,
            "inf_grid": self.inf_grid,
            "argmin": self.argmin,
            "positive": self.positive,
        }


def eta_infimum(coeff: Coefficient, n: int = N_INF_GRID):
    """Grid minimum of eta followed by a bounded refinement around the argmin."""
    xs = np.linspace(0.0, PI, n)
    vals = eta_rho(coeff, xs)
    i = int(np.argmin(vals))
    best_x, best = float(xs[i]), float(vals[i])
    lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, n - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(
            lambda t: float(eta_rho(coeff, t)), bounds=(lo, hi), method="bounded",
            options={"xatol": 1e-12},
        )
        if res.fun < best:
            best_x, best = float(res.x), float(res.fun)
    return best, best_x


def eta_integral(coeff: Coefficient, n: int | None = None) -> float:
    """Integral of eta over ``[0, pi]``.

    ``n=None`` uses adaptive quadrature (analytic models) or composite
    Gauss-Legendre on every spline interval (tabulated models).  An integer
    ``n`` forces an ``n``-point Gauss-Legendre rule on the whole interval,
    which is what the refinement checks compare against.
    """
    f = lambda t: eta_rho(coeff, t)  # noqa: E731
    if n is not None:
        nodes, weights = np.polynomial.legendre.leggauss(n)
        x = 0.5 * PI * (nodes + 1.0)
        return float(0.5 * PI * np.sum(weights * f(x)))
    knots = coeff.info.get("knots")
    if knots is None:
        val, _ = integrate.quad(f, 0.0, PI, epsabs=1e-13, epsrel=1e-13, limit=200)
        return float(val)
    nodes, weights = np.polynomial.legendre.leggauss(8)
    a, b = knots[:-1], knots[1:]
    half = 0.5 * (b - a)
    x = (0.5 * (a + b))[:, None] + half[:, None] * nodes[None, :]
    return float(np.sum(half[:, None] * weights[None, :] * f(x)))


def spectral_constants(coeff: Coefficient, bc=None) -> SpectralConstants:
    """Compute the potential constants.

    A non-positive infimum is reported through ``positive=False`` rather than
    raised; callers that need a positive potential check the flag.
    ``bc`` (anything with ``alpha1, beta1, alpha2, beta2``) is only used for
    the Robin constant, which exists when both ``beta`` are positive.
    """
    inf, argmin = eta_infimum(coeff)
    integral = eta_integral(coeff)
    mean2 = 2.0 / PI * integral
    sqrt_shift = math.sqrt(inf + 1.0) - 1.0 if inf > -1.0 else float("nan")
    ratio = inf / (1.0 + inf) if inf > -1.0 else float("nan")
    robin = None
    if bc is not None and bc.beta1 > 0 and bc.beta2 > 0:
        robin = (bc.alpha1 / bc.beta1 + bc.alpha2 / bc.beta2 + 1.0 + integral) / PI
    return SpectralConstants(
        eta_inf=inf,
        eta_mean2=mean2,
        sqrt_shift=sqrt_shift,
        ratio=ratio,
        robin=robin,
        eta_integral=integral,
        inf_grid=N_INF_GRID,
        argmin=argmin,
        positive=inf > 0,
    )


def _as_profile(p, z):
    if callable(p):
        vals = np.asarray(p(z), dtype=float)
        return np.broadcast_to(vals, z.shape).copy(), p
    vals = np.asarray(p, dtype=float)
    if vals.ndim == 0:
        const = float(vals)
        return np.full(z.shape, const), lambda t: np.full(np.shape(t), const)
    return vals, None


def from_seismic(omega, nu, depth: float, z=None, n: int = 4097) -> Coefficient:
    """Impedance after the travel-time change of variables.

    ``omega`` (density) and ``nu`` (elasticity) are callables, constants or
    arrays sampled at ``z``.  The travel-time coordinate
    ``x(z) = int_0^z sqrt(omega/nu)`` is rescaled so that ``x(depth) = pi``;
    the factor ``pi / x(depth)`` is stored in ``info["rescale"]``.
    """
    depth = float(depth)
    if not depth > 0:
        raise DegenerateProfile("depth must be positive")
    if z is None:
        z = np.linspace(0.0, depth, n)
    z = np.asarray(z, dtype=float)
    if z.size < 3 or np.any(np.diff(z) <= 0):
        raise InvalidProfile("depth samples must be strictly increasing")
    w_vals, w_fun = _as_profile(omega, z)
    v_vals, v_fun = _as_profile(nu, z)
    if w_vals.shape != z.shape or v_vals.shape != z.shape:
        raise InvalidProfile("profile arrays must match the depth samples")
    if np.any(w_vals <= 0) or np.any(v_vals <= 0):
        raise InvalidProfile("omega and nu must be strictly positive")

    slowness = CubicSpline(z, np.sqrt(w_vals / v_vals))
    travel = slowness.antiderivative()
    x_raw = travel(z) - travel(z[0])
    total = float(x_raw[-1])
    if not total > 0:
        raise DegenerateProfile("travel-time coordinate has zero length")
    if np.any(np.diff(x_raw) <= 0):
        raise InvalidProfile("travel-time coordinate is not monotone")
    rescale = PI / total
    x_scaled = x_raw * rescale
    x_scaled[-1] = PI
    z_of_x = PchipInterpolator(x_scaled, z)

    grid = np.linspace(0.0, PI, n)
    zg = z_of_x(grid)
    if w_fun is not None and v_fun is not None:
        wg = np.asarray(w_fun(zg), dtype=float)
        vg = np.asarray(v_fun(zg), dtype=float)
    else:
        wg = CubicSpline(z, w_vals)(zg) if w_fun is None else np.asarray(w_fun(zg), dtype=float)
        vg = CubicSpline(z, v_vals)(zg) if v_fun is None else np.asarray(v_fun(zg), dtype=float)
    if np.any(wg <= 0) or np.any(vg <= 0):
        raise InvalidProfile("interpolated profile is not positive")
    rho_vals = np.sqrt(wg * vg)
    coeff = tabulated(rho_vals)
    info = dict(coeff.info)
    info.update(model_source="seismic", rescale=rescale, travel_length=total,
                z_of_x=z_of_x, depth=depth)
    return Coefficient("seismic-derived", coeff.rho, coeff.drho, coeff.d2rho,
                       coeff.beta0, info)


def read_profile_csv(path, columns):
    """Read a numeric CSV with the exact header ``columns``.

    The first column must be strictly increasing.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InvalidProfile(f"{path}: empty file") from None
        if tuple(header) != tuple(columns):
            raise InvalidProfile(f"{path}: expected header {','.join(columns)}, got {','.join(header)}")
        rows = []
        for line in reader:
            if not line or all(not c.strip() for c in line):
                continue
            if len(line) != len(columns):
                raise InvalidProfile(f"{path}: malformed row {line}")
            try:
                rows.append([float(c) for c in line])
            except ValueError:
                raise InvalidProfile(f"{path}: non-numeric row {line}") from None
    data = np.array(rows, dtype=float).reshape(-1, len(columns))
    if data.shape[0] < 3:
        raise InvalidSpec(f"{path}: need at least 3 rows")
    if np.any(np.diff(data[:, 0]) <= 0):
        raise InvalidProfile(f"{path}: first column must be strictly increasing")
    return {name: data[:, i] for i, name in enumerate(columns)}


def write_profile_csv(path, coeff: Coefficient, n: int = 1025):
    """Write ``x,rho`` samples of a coefficient."""
    x = np.linspace(0.0, PI, n)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "rho"])
        for xi, ri in zip(x, coeff.rho(x)):
            w.writerow([repr(float(xi)), repr(float(ri))])
