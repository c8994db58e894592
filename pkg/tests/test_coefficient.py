import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from periodic_wave.coefficient import (
    eta_integral,
    eta_rho,
    exponential,
    from_samples,
    from_seismic,
    make_coefficient,
    read_profile_csv,
    spectral_constants,
    tabulated,
    write_profile_csv,
)
from periodic_wave.errors import DomainError, InvalidCoefficient, InvalidProfile, InvalidSpec


@given(st.floats(0.1, 3.0))
@settings(max_examples=25, deadline=None)
def test_exponential_potential_is_constant(c):
    x = np.linspace(0, math.pi, 101)
    assert np.allclose(eta_rho(exponential(c), x), c * c, rtol=1e-12)


@pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
def test_exponential_constants_closed_form(c):
    k = spectral_constants(exponential(c))
    assert k.eta_inf == pytest.approx(c * c, rel=1e-12)
    assert k.eta_mean2 == pytest.approx(2 * c * c, rel=1e-10)
    assert k.sqrt_shift == pytest.approx(math.sqrt(c * c + 1) - 1, rel=1e-12)
    assert k.ratio == pytest.approx(c * c / (1 + c * c), rel=1e-12)
    assert k.positive


def test_beta0_is_max_of_rho():
    assert exponential(1.0).beta0 == pytest.approx(math.exp(2 * math.pi))


def test_tabulated_recovers_exponential_potential():
    x = np.linspace(0, math.pi, 2049)
    coeff = tabulated(np.exp(2 * x))
    inner = np.linspace(0.2, math.pi - 0.2, 50)
    assert np.max(np.abs(eta_rho(coeff, inner) - 1.0)) < 1e-4
    assert eta_integral(coeff) == pytest.approx(math.pi, rel=1e-4)


def test_from_samples_nonuniform_resamples():
    x = np.sort(np.r_[0.0, np.random.default_rng(1).uniform(0, math.pi, 200), math.pi])
    coeff = from_samples(x, np.exp(x))
    assert coeff.rho(1.0) == pytest.approx(math.e, rel=1e-4)


def test_tabulated_rejects_nonpositive():
    with pytest.raises(InvalidCoefficient):
        tabulated([1.0, -1.0, 2.0])
    with pytest.raises(InvalidSpec):
        tabulated([1.0, 2.0])


def test_eta_outside_interval():
    with pytest.raises(DomainError):
        eta_rho(exponential(1.0), 4.0)


def test_seismic_equal_profiles_give_exponential():
    # slowness 1 means x = z * pi / depth; rho = e^z = e^{2x} for depth 2 pi
    depth = 2 * math.pi
    coeff = from_seismic(np.exp, np.exp, depth)
    assert coeff.info["rescale"] == pytest.approx(0.5)
    x = np.linspace(0.3, math.pi - 0.3, 20)
    assert np.allclose(coeff.rho(x), np.exp(2 * x), rtol=1e-8)
    assert np.allclose(eta_rho(coeff, x), 1.0, atol=1e-4)


def test_seismic_constant_profile_has_zero_potential():
    coeff = from_seismic(2.0, 8.0, 1.0)
    k = spectral_constants(coeff)
    assert abs(k.eta_inf) < 1e-10
    assert not k.positive


def test_seismic_rejects_nonpositive():
    with pytest.raises(InvalidProfile):
        from_seismic(-1.0, 1.0, 1.0)


def test_profile_csv_round_trip(tmp_path):
    path = tmp_path / "rho.csv"
    write_profile_csv(path, exponential(0.5), n=513)
    cols = read_profile_csv(path, ("x", "rho"))
    coeff = make_coefficient({"model": "tabulated", "file": str(path)})
    assert cols["x"][-1] == pytest.approx(math.pi)
    assert coeff.rho(1.0) == pytest.approx(math.e, rel=1e-8)


def test_profile_csv_header_checked(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("z,rho\n0,1\n1,2\n2,3\n")
    with pytest.raises(InvalidProfile):
        read_profile_csv(path, ("x", "rho"))


def test_make_coefficient_errors():
    with pytest.raises(InvalidSpec):
        make_coefficient({"model": "exponential"})
    with pytest.raises(InvalidSpec):
        make_coefficient({"model": "quadratic"})
