"""The spectral gap around mu and why a finite table is enough to certify it.

Time-periodic modes have eigenvalues lam_k**2 - (j b / a)**2.  A table holds
finitely many; the tail certificate bounds every point outside it, using
only constants of the potential.
"""

from periodic_wave import (
    admissible_mu,
    boundary_transform,
    build_spectrum,
    certify_accumulation,
    eigensolve,
    exponential,
    lambda_plus,
    make_period,
    spectral_constants,
)

coeff = exponential(1.0)
bc = boundary_transform(1, 0, 1, 0, coeff)
consts = spectral_constants(coeff, bc)
basis = eigensolve(coeff, bc, 32, 2048)
period = make_period(1, 1)  # T = 2 pi

for mu in (2.5, 4.0, 7.3):
    table = build_spectrum(basis, period, mu, 32, consts)
    adm = admissible_mu(consts, table)
    print(f"mu={mu}: delta={table.delta:.10f} at (j,k)={table.argmin}, "
          f"tail floor {table.tail.floor:.4g}, conclusive={table.tail.conclusive}, "
          f"admissible={adm.admissible} {adm.reasons}")

table = build_spectrum(basis, period, 2.5, 32, consts)
acc = certify_accumulation(table)
print(f"\nresonant values (j = k) all near c**2 = 1; window {acc.window}, "
      f"largest excess {acc.max_excess:.1e}")
for l in (1, 2, 3):
    print(f"smallest eigenvalue above mu outside the level-{l} box: {lambda_plus(l, table):.8f}")
