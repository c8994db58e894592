"""How solutions change when the Galerkin level m grows.

A static solution lies in every level-m space, so re-solving changes
nothing.  Time-dependent solutions couple to resonant modes (j = k), whose
eigenvalues stay at distance 1.5 from mu however large k is, and the
nonlinearity |u|**(p-1) u is not smooth where u changes sign.  Their
coefficients decay slowly and the m -> 2m changes shrink only like m**-2.
"""

import numpy as np

from periodic_wave import (
    WaveSpace,
    boundary_transform,
    build_spectrum,
    eigensolve,
    exponential,
    make_period,
    saddle_search,
    truncation_study,
)
from periodic_wave.solver import Symmetry, orbit_distance, seed_field

p = 0.5
coeff = exponential(1.0)
bc = boundary_transform(1, 0, 1, 0, coeff)
basis = eigensolve(coeff, bc, 32, 512)
table = build_spectrum(basis, make_period(1, 1), 2.5, 32)
space = WaveSpace(basis, table)

for sym in (Symmetry(0), Symmetry(1, True, True)):
    u0 = seed_field(space, np.random.default_rng(0), 1, 8, p, "level", sym)
    rec = saddle_search(u0, 8, p, symmetry=sym)
    ms = [8, 12, 16, 24, 32]
    _, sols = truncation_study(rec, ms, p)
    ref = sols[32].u
    print(f"{sym.name:10s} Phi={rec.phi:.5f}")
    for mm in ms[:-1]:
        d, _ = orbit_distance(sols[mm].u, ref)
        print(f"   |u_{mm} - u_32|_E = {d:.2e}   iterate norm {sols[mm].max_iterate_norm:.4f}")
    if sym.n:
        diag = [abs(sols[32].u.data[0, k, k - 1]) for k in range(1, 33, 4)]
        print("   resonant |alpha_kk|, k = 1, 5, 9, ...:", " ".join(f"{a:.1e}" for a in diag))
