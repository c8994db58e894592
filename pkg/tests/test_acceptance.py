"""Acceptance criteria 1 to 9.

Each test records one PASS/FAIL line, printed in the terminal summary.
A failing criterion fails its test; nothing here is loosened to pass.
"""

import json
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE, Setup
from periodic_wave import (
    boundary_transform,
    build_spectrum,
    certify_accumulation,
    certify_asymptotics,
    eigensolve,
    exponential,
    make_period,
    spectral_constants,
)
from periodic_wave.cli import VERIFY_TESTS, VERIFY_TOL
from periodic_wave.solver import (
    solution_sequence,
    truncation_study,
    verify_solution,
    write_archive,
)
from periodic_wave.space import e_norm, l2_norm, shift_time, split_pm
from periodic_wave.spectrum import admissible_mu
from periodic_wave.variational import level_bounds, mass, phi, phi_grad, quadratic_part

P, MU, M = 0.5, 2.5, 8
CASE_DATA = {1: lambda c: (1, 0, 1, 0), 2: lambda c: (1, 0, c, 1), 3: lambda c: (-c, -1, 1, 0),
             4: lambda c: (-c, -1, c, 1)}


def record(n, title, ok, detail):
    ACCEPTANCE[n] = f"criterion {n} ({title}): {'PASS' if ok else 'FAIL'}  {detail}"
    return ok


def basis_for(c, case, K=50, N=4096):
    coeff = exponential(c)
    bc = boundary_transform(*CASE_DATA[case](c), coeff)
    return coeff, bc, eigensolve(coeff, bc, K, N)


# 1 ---------------------------------------------------------------------------
def test_criterion_1_closed_form_eigenvalues():
    worst, slowest, lines = 0.0, 0.0, []
    for c in (0.5, 1.0, 2.0):
        for case, shift in ((1, 0.0), (2, 0.5)):
            t0 = time.perf_counter()
            _, _, b = basis_for(c, case)
            dt = time.perf_counter() - t0
            exact = np.sqrt((b.labels + shift) ** 2 + c * c)
            keep = b.labels <= 50
            err = float(np.max(np.abs(b.lam[keep] - exact[keep]) / exact[keep]))
            worst, slowest = max(worst, err), max(slowest, dt)
            lines.append((c, case, err))
    ok = worst <= 1e-8 and slowest <= 60.0
    record(1, "closed-form eigenvalues", ok,
           f"max relative error {worst:.2e} (tol 1e-8), slowest case {slowest:.1f} s")
    assert ok, lines


# 2 ---------------------------------------------------------------------------
def test_criterion_2_theta_certification():
    failures = []
    for c in (0.5, 1.0, 2.0):
        for case in (1, 2, 3, 4):
            coeff, bc, b = basis_for(c, case)
            rep = certify_asymptotics(b, spectral_constants(coeff, bc))
            recs = [r for r in rep.records if 1 <= r.k <= 50]
            if not (rep.verdict and len(recs) == 50 and all(r.passed for r in recs)):
                failures.append((c, case))
    coeff, bc, b = basis_for(1.0, 1)
    first = certify_asymptotics(b, spectral_constants(coeff, bc)).records[0]
    gap = abs(first.theta - first.lower)
    ok = not failures and first.k == 1 and gap <= 1e-9
    record(2, "theta window certification", ok,
           f"12 case/coefficient combinations, failures {failures}; "
           f"k=1 lower bound attained to {gap:.1e}")
    assert ok


# 3 ---------------------------------------------------------------------------
def test_criterion_3_essential_accumulation():
    coeff, bc, b = basis_for(1.0, 1)
    consts = spectral_constants(coeff, bc)
    table = build_spectrum(b, make_period(1, 1), MU, 50, consts)
    vals = table.values[table.resonant]
    dev = float(np.max(np.abs(vals - 1.0)))
    lo, hi = 2 * consts.sqrt_shift, consts.eta_mean2
    inside = bool(np.all((vals >= lo) & (vals <= hi)))
    rep = certify_accumulation(table)
    ok = dev <= 2e-8 and inside and rep.passed and vals.size == 50
    record(3, "essential-spectrum accumulation", ok,
           f"{vals.size} resonant values, max |value - 1| {dev:.2e}, window "
           f"[{lo:.4f}, {hi:.4f}] with zero slack")
    assert ok


# 4 ---------------------------------------------------------------------------
def test_criterion_4_gap_certificate():
    coeff = exponential(1.0)
    bc = boundary_transform(1, 0, 1, 0, coeff)
    consts = spectral_constants(coeff, bc)
    b = eigensolve(coeff, bc, 32, 4096)
    table = build_spectrum(b, make_period(1, 1), MU, 32, consts)
    adm = admissible_mu(consts, table)
    ok_gap = adm.admissible and abs(table.delta - 0.5) <= 1e-8 and table.tail.conclusive
    bad = admissible_mu(consts, build_spectrum(b, make_period(1, 1), 4.0, 32, consts))
    ok_reject = (not bad.admissible) and any(r.startswith("mu in spectrum") for r in bad.reasons)
    # brute-force (6, 6) oracle on the closed-form values k^2 + 1 - j^2
    b6 = eigensolve(coeff, bc, 6, 1024)
    oracle_ok = True
    for mu in (MU, 3.3, 7.9, 20.5):
        t6 = build_spectrum(b6, make_period(1, 1), mu, 6, consts)
        brute = np.array([[k * k + 1.0 - j * j for k in range(1, 7)] for j in range(7)])
        oracle_ok &= bool(np.max(np.abs(t6.values - brute)) < 1e-8)
        oracle_ok &= abs(t6.delta_raw - float(np.min(np.abs(brute - mu)))) < 1e-8
    ok = ok_gap and ok_reject and oracle_ok
    record(4, "gap certificate", ok,
           f"delta {table.delta:.10f}, tail floor {table.tail.floor:.3g} conclusive "
           f"{table.tail.conclusive}; mu=4 rejected {ok_reject}; (6,6) oracle {oracle_ok}")
    assert ok


# 5 ---------------------------------------------------------------------------
def test_criterion_5_working_space_identities(standard):
    sp = standard.space
    rng = np.random.default_rng(2024)
    delta = standard.table.delta
    worst = {"pythagoras": 0.0, "embedding": 0.0, "parseval": 0.0, "translation": 0.0,
             "signs": 0.0}
    for _ in range(1000):
        u = sp.random(rng)
        plus, minus = split_pm(u)
        e2 = e_norm(u) ** 2
        worst["pythagoras"] = max(worst["pythagoras"],
                                  abs(e2 - e_norm(plus) ** 2 - e_norm(minus) ** 2) / e2)
        worst["embedding"] = max(worst["embedding"], (l2_norm(u) ** 2 - e2 / delta) / e2)
        g = sp.synthesize_array(u.data)
        l2 = l2_norm(u) ** 2
        worst["parseval"] = max(worst["parseval"], abs(sp.lr_integral(g, 2.0) - l2) / l2)
        steps = int(rng.integers(0, sp.n_t))
        v = shift_time(u, steps * sp.period.T / sp.n_t)
        gv = sp.synthesize_array(v.data)
        worst["translation"] = max(
            worst["translation"],
            abs(e_norm(v) - e_norm(u)) / e_norm(u),
            abs(sp.lr_integral(gv, 1.5) - sp.lr_integral(g, 1.5)) / sp.lr_integral(g, 1.5))
        worst["signs"] = max(worst["signs"],
                             abs(quadratic_part(plus) + 0.5 * e_norm(plus) ** 2),
                             abs(quadratic_part(minus) - 0.5 * e_norm(minus) ** 2))
    ok = (worst["pythagoras"] <= 1e-10 and worst["embedding"] <= 0.0 + 1e-12
          and worst["parseval"] <= 1e-10 and worst["translation"] <= 1e-10
          and worst["signs"] <= 1e-10)
    record(5, "working-space identities", ok,
           "1000 fields; " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))
    assert ok


# 6 ---------------------------------------------------------------------------
def test_criterion_6_gradient(standard):
    sp = standard.space
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(100):
        u = sp.random(rng, scale=0.05)
        u.data /= (1.0 + np.arange(sp.j_max + 1)[:, None] ** 2) * sp.labels[None, :] ** 2
        u.data[0, 0, 0] = rng.uniform(3.0, 8.0)
        U = sp.synthesize_array(u.data)
        assert np.all(U[:, 1:-1] > 0)   # one sign at every weighted node
        v = sp.random(rng)
        h = 1e-5
        fd = (phi(u + h * v, P) - phi(u - h * v, P)) / (2 * h)
        exact = float(np.sum(phi_grad(u, P).data * v.data))
        worst = max(worst, abs(fd - exact) / abs(exact))
    ok = worst < 1e-6
    record(6, "gradient vs central differences", ok,
           f"100 pairs, max relative error {worst:.2e} (tol 1e-6)")
    assert ok


# 7 to 9 share one run of the standard setup ------------------------------------
@pytest.fixture(scope="module")
def standard_run(standard):
    t0 = time.perf_counter()
    bounds = {l: level_bounds(l, standard.space, standard.table, P, standard.coeff.beta0)
              for l in (1, 2, 3, 4)}
    records, reports = solution_sequence(standard.space, P, [1, 2, 3, 4], M, bounds,
                                         starts=32, seed=0, tol=1e-9)
    return records, reports, bounds, time.perf_counter() - t0


@pytest.mark.slow
def test_criterion_7_solver(standard_run):
    records, reports, bounds, elapsed = standard_run
    factor = 1.0 / (1.0 / (P + 1.0) - 0.5)
    res = max(r.residual for r in records)
    ident = max(abs(r.phi - mass(r.u, P) / factor) for r in records)
    under = all(0 < r.phi <= bounds[r.level].rho for r in records)
    mass_bounds = [factor * bounds[l].rho for l in (1, 2, 3, 4)]
    decreasing = all(a > b for a, b in zip(mass_bounds, mass_bounds[1:]))
    ok = (len(records) >= 5 and res <= 1e-8 and ident <= 1e-7 and under and decreasing
          and elapsed <= 600)
    found = {rep.l: rep.found for rep in reports}
    record(7, "solver", ok,
           f"{len(records)} distinct solutions (per level {found}), max residual {res:.1e}, "
           f"identity defect {ident:.1e}, Phi <= rho_l {under}, mass bounds "
           f"{', '.join(f'{v:.3g}' for v in mass_bounds)} decreasing {decreasing}, "
           f"{elapsed:.0f} s")
    assert ok


@pytest.mark.slow
def test_criterion_8_truncation(standard_run):
    records = standard_run[0]
    big = Setup(j_max=32, k_max=32, n=512).space
    diffs, growth, bound = [], 0.0, 0.0
    for rec in records:
        rep, _ = truncation_study(rec, [8, 16, 32], P, space=big)
        diffs.append((rec.symmetry, rep.difference))
        # no growth of the iterate norms with m (bounded-iterates surrogate)
        growth = max(growth, max(rep.norms.values()) / rep.norms[8])
        bound = max(bound, max(rep.norms.values()))
    worst = max(d for _, d in diffs)
    norms_ok = growth <= 1.5
    ok = worst <= 1e-4 and norms_ok
    detail = ", ".join(f"{s}: {d:.1e}" for s, d in diffs)
    record(8, "truncation convergence", ok,
           f"m=8 to m=16 E-distance per solution [{detail}] (tol 1e-4); iterate norms "
           f"<= {bound:.3g}, growth factor over m in (8, 16, 32) {growth:.3f}")
    assert ok


@pytest.mark.slow
def test_criterion_9_weak_form_fresh_process(standard_run, tmp_path):
    records = standard_run[0]
    out = tmp_path / "run"
    write_archive(records, out / "solutions")
    cfg = {"coefficient": {"model": "exponential", "c": 1.0}, "mu": MU, "p": P,
           "truncation": {"jmax": 16, "kmax": 16, "grid_n": 512},
           "solver": {"seed": 0}, "out_dir": str(out)}
    (tmp_path / "cfg.json").write_text(json.dumps(cfg))
    outputs = []
    for _ in range(2):
        res = subprocess.run([sys.executable, "-m", "periodic_wave", "verify",
                              str(tmp_path / "cfg.json")], capture_output=True, text=True)
        outputs.append((res.returncode, (out / "verify.csv").read_bytes()))
    identical = outputs[0][1] == outputs[1][1]
    in_process = [verify_solution(r, P, n_tests=VERIFY_TESTS, seed=0).max_residual
                  for r in records]
    rows = [line.split(",") for line in outputs[0][1].decode().splitlines()[1:]]
    fresh = [float(r[2]) for r in rows]
    same_as_solver = fresh == in_process
    worst = max(fresh)
    ok = outputs[0][0] == 0 and identical and same_as_solver and worst <= VERIFY_TOL
    record(9, "weak-form verification", ok,
           f"{len(fresh)} solutions x {VERIFY_TESTS} test fields, worst residual {worst:.1e} "
           f"(tol 1e-7); fresh runs bit-identical {identical}, equal to in-process "
           f"{same_as_solver}")
    assert ok
