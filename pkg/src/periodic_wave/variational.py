"""Functional, gradient and level bounds for the sublinear problem.

    Phi(u) = -1/2 sum (lam_jk - mu) alpha_jk**2 + int F(u) rho dt dx,
    F(v) = |v|**(p+1) / (p+1),  f(v) = F'(v) = |v|**(p-1) v.

The integral uses the same tensor quadrature as ``WaveSpace.analyze``, so
``phi_grad`` is the exact gradient of the discrete functional.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .space import CoeffField, WaveSpace, embedding_constant, zeta_bound
from .spectrum import SpectrumTable, lambda_plus


def f_eval(v, p):
    """``sign(v) |v|**p``; zero at zero."""
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.abs(v) ** p


def F_eval(v, p):
    """``|v|**(p+1) / (p+1)``."""
    return np.abs(np.asarray(v, dtype=float)) ** (p + 1.0) / (p + 1.0)


def check_exponent(p):
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0,1)")
    return float(p)


def quadratic_part(u: CoeffField) -> float:
    return float(-0.5 * np.sum(u.space.shift * (u.data[0] ** 2 + u.data[1] ** 2)))


def mass(u: CoeffField, p: float, space: WaveSpace | None = None) -> float:
    """``int |u|**(p+1) rho dt dx``."""
    sp = u.space if space is None else space
    return sp.lr_integral(sp.synthesize_array(u.data), p + 1.0)


def phi(u: CoeffField, p: float, space: WaveSpace | None = None) -> float:
    """Value of the functional.  ``space`` may supply a finer time grid."""
    sp = u.space if space is None else space
    U = sp.synthesize_array(u.data)
    return quadratic_part(u) + sp.lr_integral(U, p + 1.0) / (p + 1.0)


def phi_grad(u: CoeffField, p: float) -> CoeffField:
    """L2-pairing coefficients ``-(lam_jk - mu) alpha_jk + (f(u))_jk``."""
    sp = u.space
    U = sp.synthesize_array(u.data)
    g = -sp.shift[None] * u.data + sp.analyze_array(f_eval(U, p))
    g[~sp.valid] = 0.0
    return CoeffField(g, sp)


def riesz_norm(g: CoeffField, mask=None) -> float:
    """E-norm of the Riesz representative, ``(sum g**2 / |lam - mu|) ** 1/2``."""
    w = g.space.e_weight()
    sq = g.data**2 / w
    if mask is not None:
        sq = np.where(mask, sq, 0.0)
    return float(math.sqrt(np.sum(sq)))


def quadrature_residual(u: CoeffField, p: float) -> float:
    """Change in ``Phi`` when the time grid is doubled."""
    fine = u.space.with_time_samples(2 * u.space.n_t)
    return abs(phi(u, p) - phi(CoeffField(u.data, fine), p, fine))


def critical_identity_defect(u: CoeffField, p: float) -> float:
    """``|Phi(u) - (1/(p+1) - 1/2) mass(u)|``, zero at critical points."""
    return abs(phi(u, p) - (1.0 / (p + 1.0) - 0.5) * mass(u, p))


def ray_maximum(u: CoeffField, p: float):
    """Maximum of ``t -> Phi(t u)`` for ``u`` with a negative quadratic part.

    Returns ``(t_star, phi_max)``; ``None`` when the quadratic part is not
    negative (the ray is unbounded or has no interior maximum).
    """
    q = -2.0 * quadratic_part(u)
    if q <= 0:
        return None
    M = mass(u, p)
    if M == 0:
        return None
    t = (M / q) ** (1.0 / (1.0 - p))
    return t, (1.0 / (p + 1.0) - 0.5) * t ** (p + 1.0) * M


def rho_level(zeta, p):
    """``(1/(p+1) - 1/2) zeta**(2(p+1)/(1-p))``."""
    return (1.0 / (p + 1.0) - 0.5) * zeta ** (2.0 * (p + 1.0) / (1.0 - p))


@dataclass
class LevelBounds:
    l: int
    zeta: float
    rho: float
    radius: float
    sigma: float
    c0: float
    c0_samples: int
    c0_confident: bool
    embed: float
    lam_plus: float

    def as_dict(self):
        return dict(self.__dict__)


def _c0_ratio(space, x, mask, p):
    """``||u+||_E**2 / ||u||_{L^{p+1}}**2`` and its gradient in the masked coordinates."""
    data = np.zeros(space.shape)
    data[mask] = x
    w = np.abs(space.shift)[None].repeat(2, 0)[mask]
    plus = (space.sign[None] > 0).repeat(2, 0)[mask]
    num = float(np.sum(np.where(plus, w * x * x, 0.0)))
    U = space.synthesize_array(data)
    M = space.lr_integral(U, p + 1.0)
    if M <= 0:
        return 0.0, np.zeros_like(x)
    den = M ** (2.0 / (p + 1.0))
    dnum = np.where(plus, 2.0 * w * x, 0.0)
    dden = 2.0 * M ** ((1.0 - p) / (p + 1.0)) * space.analyze_array(f_eval(U, p))[mask]
    return num / den, (dnum * den - num * dden) / den**2


def estimate_c0(space: WaveSpace, l: int, p: float, samples: int = 1000, seed: int = 0,
                ascent_starts: int = 4, maxiter: int = 200):
    """Sampled maximum of ``||u+||_E**2 / ||u||_{L^{p+1}}**2`` over the level space ``E_{l+1}``.

    Random directions pick the best starts; L-BFGS ascent refines them.
    Returns ``(c0, samples, confident)``; ``confident`` is False when any
    ascent stopped without converging.
    """
    rng = np.random.default_rng(seed)
    mask = space.level_mask(l + 1)
    n = int(mask.sum())
    vals = []
    for _ in range(samples):
        x = rng.standard_normal(n)
        vals.append((_c0_ratio(space, x, mask, p)[0], x))
    vals.sort(key=lambda t: -t[0])
    best = vals[0][0]
    confident = True
    for r0, x0 in vals[:ascent_starts]:
        scale = np.linalg.norm(x0)
        res = minimize(lambda x: tuple(-v for v in _c0_ratio(space, x, mask, p)), x0 / scale,
                       jac=True, method="L-BFGS-B", options={"maxiter": maxiter})
        confident = confident and bool(res.success)
        best = max(best, -float(res.fun))
    return best, samples, confident


def level_bounds(l: int, space: WaveSpace, table: SpectrumTable, p: float, beta0: float,
                 samples: int = 1000, seed: int = 0, c0=None) -> LevelBounds:
    """``zeta_l``, ``rho_l``, the sphere radius ``R_l`` and ``sigma_l = R_l**2 / 2``.

    ``R_l`` is the largest radius with
    ``1/(p+1) - 2 C0 (C R)**(1-p) >= 1/(2(p+1))``.
    """
    p = check_exponent(p)
    zeta = zeta_bound(l, table, p, beta0)
    rho = rho_level(zeta, p)
    if c0 is None:
        c0, n, ok = estimate_c0(space, l, p, samples=samples, seed=seed)
    else:
        n, ok = 0, True
    C = embedding_constant(table, beta0)
    radius = (1.0 / (4.0 * c0 * (p + 1.0))) ** (1.0 / (1.0 - p)) / C
    return LevelBounds(l, zeta, rho, radius, 0.5 * radius**2, c0, n, ok, C,
                       lambda_plus(l, table))
