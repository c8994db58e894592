import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from periodic_wave.space import CoeffField, e_norm, shift_time, split_pm
from periodic_wave.variational import (
    F_eval,
    check_exponent,
    critical_identity_defect,
    f_eval,
    level_bounds,
    mass,
    phi,
    phi_grad,
    quadratic_part,
    quadrature_residual,
    ray_maximum,
    rho_level,
)

P = 0.5


def test_nonlinearity_examples():
    assert f_eval(0.0, P) == 0 and F_eval(0.0, P) == 0
    assert f_eval(4.0, P) == pytest.approx(2.0)
    assert f_eval(-4.0, P) == pytest.approx(-2.0)
    assert F_eval(4.0, P) == pytest.approx(16 / 3)


@given(st.floats(-50, 50).filter(lambda v: abs(v) > 1e-8), st.floats(0.05, 0.95))
@settings(max_examples=50, deadline=None)
def test_F_derivative_is_f(v, p):
    h = 1e-4 * abs(v)
    fd = (F_eval(v + h, p) - F_eval(v - h, p)) / (2 * h)
    assert fd == pytest.approx(float(f_eval(v, p)), rel=1e-6)


def test_exponent_validation():
    for bad in (0.0, 1.0, 1.5, -0.2):
        with pytest.raises(ValueError, match="p must lie in"):
            check_exponent(bad)


def test_phi_zero(standard):
    sp = standard.space
    assert phi(sp.zeros(), P) == 0.0
    assert np.all(phi_grad(sp.zeros(), P).data == 0.0)


def test_sign_identities_exact(standard):
    sp = standard.space
    u = sp.random(np.random.default_rng(0))
    plus, minus = split_pm(u)
    assert quadratic_part(plus) == pytest.approx(-0.5 * e_norm(plus) ** 2, rel=1e-14)
    assert quadratic_part(minus) == pytest.approx(0.5 * e_norm(minus) ** 2, rel=1e-14)


@given(st.integers(0, 2**32 - 1), st.integers(0, 131))
@settings(max_examples=25, deadline=None)
def test_phi_even_and_translation_invariant(seed, steps):
    sp = _standard_space()
    u = sp.random(np.random.default_rng(seed))
    val = phi(u, P)
    assert phi(-1.0 * u, P) == pytest.approx(val, rel=1e-10, abs=1e-10)
    v = shift_time(u, steps * sp.period.T / sp.n_t)
    assert phi(v, P) == pytest.approx(val, rel=1e-10, abs=1e-10)


def test_single_minus_mode_against_quadrature_oracle(standard):
    sp = standard.space
    u = sp.mode(1, 1)
    assert quadratic_part(u) == pytest.approx(0.75, abs=1e-9)
    q = P + 1
    T = sp.period.T
    time = 2 * special.beta((q + 1) / 2, 0.5) * (2 / T) ** (q / 2)
    space, _ = integrate.quad(lambda x: (math.sqrt(2 / math.pi) * math.sin(x)) ** q
                              * math.exp(2 * x) ** (1 - q / 2), 0, math.pi, epsabs=1e-13)
    oracle = time * space / q
    assert phi(u, P) - quadratic_part(u) == pytest.approx(oracle, rel=1e-4)


def positive_field(sp, rng):
    """Dominant static first mode plus noise damped like 1/((1 + j**2) k**2).

    Every mode behaves like ``k x`` near the Dirichlet ends, so the damping
    keeps ``u`` of one sign at every interior node.
    """
    u = sp.random(rng, scale=0.05)
    u.data /= (1.0 + np.arange(sp.j_max + 1)[:, None] ** 2) * sp.labels[None, :] ** 2
    u.data[0, 0, 0] = 5.0
    return u


@pytest.mark.parametrize("seed", range(20))
def test_gradient_matches_central_difference(standard, seed):
    sp = standard.space
    rng = np.random.default_rng(seed)
    u = positive_field(sp, rng)
    U = sp.synthesize_array(u.data)
    assert np.all(U[:, 1:-1] > 0)
    v = sp.random(rng)
    h = 1e-5
    fd = (phi(u + h * v, P) - phi(u - h * v, P)) / (2 * h)
    exact = float(np.sum(phi_grad(u, P).data * v.data))
    assert abs(fd - exact) <= 1e-6 * abs(exact)


def test_critical_pairing_identity(standard):
    # <Phi'(u), u> = -<(L - mu) u, u> + mass: holds for every u, not only critical ones
    sp = standard.space
    u = sp.random(np.random.default_rng(4))
    pair = float(np.sum(phi_grad(u, P).data * u.data))
    lin = float(np.sum(sp.shift[None] * u.data**2))
    assert pair == pytest.approx(-lin + mass(u, P), rel=1e-10)


def test_ray_maximum_is_a_maximum(standard):
    sp = standard.space
    u = CoeffField(np.where(sp.plus_mask(), sp.random(np.random.default_rng(2)).data, 0),
                   sp)
    t, val = ray_maximum(u, P)
    assert phi(t * u, P) == pytest.approx(val, rel=1e-10)
    assert phi(0.99 * t * u, P) < val and phi(1.01 * t * u, P) < val
    assert ray_maximum(sp.mode(1, 1), P) is None


def test_rho_level_formula():
    assert rho_level(0.5, 0.5) == pytest.approx(1 / 384)
    assert rho_level(0.25, 0.5) / rho_level(0.5, 0.5) == pytest.approx(2.0**-6)


def test_quadrature_residual_small(standard):
    u = standard.space.random(np.random.default_rng(1), scale=0.1)
    assert quadrature_residual(u, P) < 1e-3 * abs(phi(u, P)) + 1e-8


def test_critical_identity_defect_zero_at_zero(standard):
    assert critical_identity_defect(standard.space.zeros(), P) == 0.0


@pytest.fixture(scope="module")
def bounds(standard):
    return {l: level_bounds(l, standard.space, standard.table, P, standard.coeff.beta0,
                            samples=400) for l in (1, 2)}


def test_level_bounds_positive_and_decreasing(bounds):
    b1, b2 = bounds[1], bounds[2]
    for b in (b1, b2):
        assert b.rho > 0 and b.sigma > 0 and b.radius > 0
        assert b.rho == pytest.approx(rho_level(b.zeta, P), rel=1e-15)
        assert b.sigma == pytest.approx(0.5 * b.radius**2)
    assert b2.rho < b1.rho
    assert b1.lam_plus == pytest.approx(4.0, abs=1e-8)


def test_sampled_sphere_lower_bound(standard, bounds):
    sp = standard.space
    b = bounds[1]
    rng = np.random.default_rng(7)
    mask = sp.level_mask(2)
    for _ in range(300):
        u = sp.random(rng, mask)
        u = u * (b.radius / e_norm(u))
        assert phi(u, P) >= b.sigma - quadrature_residual(u, P)


def test_sampled_complement_upper_bound(standard, bounds):
    sp = standard.space
    b = bounds[1]
    rng = np.random.default_rng(8)
    mask = sp.level_complement_mask(1)
    for _ in range(300):
        u = sp.random(rng, mask, scale=rng.uniform(0.01, 10))
        ray = ray_maximum(u, P)
        assert phi(u, P) <= b.rho
        assert ray[1] <= b.rho


_CACHE = {}


def _standard_space():
    if "sp" not in _CACHE:
        from conftest import Setup

        _CACHE["sp"] = Setup().space
    return _CACHE["sp"]
