"""Several distinct time-periodic solutions from seeded multi-start search.

Each start lives in a symmetry class (static, odd harmonics, even in time,
...).  The classes are invariant subspaces, so a critical point found in one
is a critical point of the whole problem.  Deflation discards repeats up to
sign, time shift and time reversal.
"""

import time

from periodic_wave import (
    WaveSpace,
    boundary_transform,
    build_spectrum,
    eigensolve,
    exponential,
    level_bounds,
    make_period,
    solution_sequence,
    verify_solution,
)

p, m = 0.5, 8
coeff = exponential(1.0)
bc = boundary_transform(1, 0, 1, 0, coeff)
basis = eigensolve(coeff, bc, 16, 512)
table = build_spectrum(basis, make_period(1, 1), 2.5, 16)
space = WaveSpace(basis, table)
bounds = {1: level_bounds(1, space, table, p, coeff.beta0)}

t0 = time.perf_counter()
records, reports = solution_sequence(space, p, [1], m, bounds, starts=17, seed=0, log=print)
print(f"\n{len(records)} distinct solutions in {time.perf_counter() - t0:.0f} s")
factor = 1 / (1 / (p + 1) - 0.5)
for r in records:
    check = verify_solution(r, p, n_tests=50)
    print(f"Phi={r.phi:9.5f}  mass={r.mass:9.5f} (= {factor:.0f} Phi)  "
          f"residual={r.residual:.1e}  weak-form={check.max_residual:.1e}  [{r.symmetry}]")
