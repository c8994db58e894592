"""Coefficient fields, the energy norm and the level bounds.

A field is a real array of cosine/sine coefficients over (time mode j,
spatial mode k).  The energy norm weights each mode by |lam_jk - mu|; the
functional's quadratic part is negative on modes above mu and positive
below.
"""

import numpy as np

from periodic_wave import (
    WaveSpace,
    boundary_transform,
    build_spectrum,
    e_norm,
    eigensolve,
    exponential,
    level_bounds,
    make_period,
    phi,
)
from periodic_wave.space import l2_norm, shift_time, split_pm

coeff = exponential(1.0)
bc = boundary_transform(1, 0, 1, 0, coeff)
basis = eigensolve(coeff, bc, 16, 512)
table = build_spectrum(basis, make_period(1, 1), 2.5, 16)
space = WaveSpace(basis, table)
print(f"space: {space.shape} coefficients, {space.n_t} time samples x {space.x.size} nodes")

rng = np.random.default_rng(0)
u = space.random(rng)
plus, minus = split_pm(u)
print(f"|u|_E^2 = {e_norm(u)**2:.6f} = {e_norm(plus)**2:.6f} + {e_norm(minus)**2:.6f}")
print(f"|u|_L2^2 = {l2_norm(u)**2:.4f} <= |u|_E^2 / delta = {e_norm(u)**2 / table.delta:.4f}")
g = space.synthesize(u)
print(f"grid round trip error {np.max(np.abs(space.analyze(g).data - u.data)):.1e}")
v = shift_time(u, 2 * np.pi * 5 / space.n_t)  # a whole number of time samples
print(f"Phi(u) = {phi(u, 0.5):.6f}, Phi(shifted u) = {phi(v, 0.5):.6f}")

for l in (1, 2, 3, 4):
    b = level_bounds(l, space, table, 0.5, coeff.beta0, samples=300)
    print(f"level {l}: lam_plus={b.lam_plus:.4f} zeta={b.zeta:.4f} rho={b.rho:.4g} "
          f"sigma={b.sigma:.3g} C0~{b.c0:.3f}")
