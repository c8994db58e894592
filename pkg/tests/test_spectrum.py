import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from periodic_wave.errors import InconclusiveGap, InvalidPeriod
from periodic_wave.spectrum import (
    admissible_mu,
    build_spectrum,
    certify_accumulation,
    is_resonant,
    lambda_plus,
    make_period,
    multiplicities,
)


def exact_value(j, k, a=1, b=1, c=1.0):
    """Closed-form spectral point for rho = exp(2 c x), Dirichlet ends."""
    return k * k + c * c - (j * b / a) ** 2


def brute_gap(mu, j_max, k_max, a=1, b=1):
    return min(abs(exact_value(j, k, a, b) - mu)
               for j in range(j_max + 1) for k in range(1, k_max + 1))


def true_tail_distance(mu, j_max, k_max, a=1, b=1, limit=400):
    best = math.inf
    for k in range(1, limit):
        for j in range(0, limit):
            if j <= j_max and k <= k_max:
                continue
            best = min(best, abs(exact_value(j, k, a, b) - mu))
    return best


def test_small_table_matches_brute_force(small):
    t = small.table
    for j in range(t.j_max + 1):
        for k in t.labels:
            assert t.value(j, k) == pytest.approx(exact_value(j, k), abs=1e-8)
    assert t.delta == pytest.approx(brute_gap(2.5, 6, 6), abs=1e-8)
    assert t.delta == pytest.approx(0.5, abs=1e-8)


def test_negative_j_uses_same_value(small):
    assert small.table.value(-2, 3) == small.table.value(2, 3)


@pytest.mark.parametrize("mu", [2.5, 3.3, 5.7, 11.2])
def test_tail_certificate_is_sound(small, mu):
    t = build_spectrum(small.basis, make_period(1, 1), mu, 6, small.consts)
    assert t.tail.floor <= true_tail_distance(mu, 6, 6) + 1e-8


@given(st.floats(2.05, 40.0), st.sampled_from([(1, 1), (1, 2), (2, 1), (3, 2)]))
@settings(max_examples=30, deadline=None)
def test_gap_and_tail_property(mu, ab):

    s = _cached_setup()
    t = build_spectrum(s.basis, make_period(*ab), mu, 6, s.consts)
    assert abs(t.delta_raw - brute_gap(mu, 6, 6, *ab)) < 1e-8
    assert t.tail.floor <= true_tail_distance(mu, 6, 6, *ab, limit=120) + 1e-8


_SETUP = {}


def _cached_setup():
    if "s" not in _SETUP:
        from conftest import Setup

        _SETUP["s"] = Setup(j_max=6, k_max=6, n=128)
    return _SETUP["s"]


def test_mu_in_spectrum_rejected(small):
    t = build_spectrum(small.basis, make_period(1, 1), 4.0, 6, small.consts)
    assert t.delta == 0.0 and t.in_spectrum
    adm = admissible_mu(small.consts, t)
    assert not adm.admissible
    assert any(r.startswith("mu in spectrum") for r in adm.reasons)


def test_mu_below_threshold_rejected(small):
    t = build_spectrum(small.basis, make_period(1, 1), 1.5, 6, small.consts)
    assert not admissible_mu(small.consts, t).admissible


def test_standard_gap_conclusive(standard):
    adm = admissible_mu(standard.consts, standard.table)
    assert adm.admissible
    assert adm.delta == pytest.approx(0.5, abs=1e-8)
    assert standard.table.tail.conclusive


def test_resonance_integer_test():
    assert is_resonant(1, 1, make_period(1, 1), 1)
    assert not is_resonant(0, 1, make_period(1, 1), 1)
    assert is_resonant(3, 2, make_period(3, 2), 1)
    assert not is_resonant(1, 1, make_period(3, 2), 1)
    assert is_resonant(1, 0, make_period(2, 1), 2)  # (0 + 1/2) 2 = 1


def test_period_validation():
    with pytest.raises(InvalidPeriod):
        make_period(0, 1)
    with pytest.warns(UserWarning):
        assert make_period(2, 2) == make_period(1, 1)


def test_resonant_values_accumulate(standard):
    t = standard.table
    vals = t.values[t.resonant]
    assert np.max(np.abs(vals - 1.0)) < 2e-8
    rep = certify_accumulation(t)
    assert rep.passed
    assert rep.window == pytest.approx((2 * (math.sqrt(2) - 1), 2.0))


def test_lambda_plus_examples(standard):
    assert lambda_plus(1, standard.table) == pytest.approx(4.0, abs=1e-8)
    assert lambda_plus(2, standard.table) == pytest.approx(6.0, abs=1e-8)


def test_lambda_plus_needs_truncation(small):
    with pytest.raises(InconclusiveGap):
        lambda_plus(6, small.table)


def test_multiplicities_count_signed_j(small):
    groups = {round(v, 6): n for v, n, _ in multiplicities(small.table, tol=1e-6)}
    assert groups[2.0] == 1     # (0, 1)
    assert groups[4.0] == 2     # (+-1, 2)
    assert groups[1.0] == 12    # resonant (+-j, j), j = 1..6


def test_exports(tmp_path, small):
    t = small.table
    t.write_csv(tmp_path / "s.csv")
    t.write_certificate(tmp_path / "c.json")
    head = (tmp_path / "s.csv").read_text().splitlines()[0]
    assert head == "j,k,lambda_jk,resonant,sign_class"
    cert = json.loads((tmp_path / "c.json").read_text())
    assert {"delta", "tail_floor", "window_lo", "window_hi", "admissible"} <= set(cert)
