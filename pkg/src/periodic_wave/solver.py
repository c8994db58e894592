"""Critical points of the functional on the Galerkin spaces ``E^m``.

Two solvers:

* ``fixed_point_solve`` iterates ``u <- (L - mu)^-1 P_m f(u)`` with Anderson
  mixing.
* ``saddle_search`` drives the E-Riesz residual to zero.  The functional is
  convex in the minus directions, so it first maximises the reduced
  functional ``psi(u+) = min_{u-} Phi(u+ + u-)`` (inner Newton, outer
  L-BFGS in E-norm coordinates), then finishes with Newton steps that
  decrease ``r = |grad_E Phi|**2 / 2`` under backtracking.

Symmetry classes (time reversal, ``T/n`` translations, half-period sign
flips) give invariant subspaces; critical points found inside one are
critical points of the full problem, which is how distinct solutions are
reached from different starts.
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .errors import NonConvergence, TruncationError
from .space import CoeffField, WaveSpace, e_norm, reverse_time, shift_time
from .variational import (
    LevelBounds,
    check_exponent,
    critical_identity_defect,
    f_eval,
    mass,
    phi,
    ray_maximum,
)

PHASE_SHIFTS = 64


@dataclass(frozen=True)
class Symmetry:
    """Invariant subspace: ``j`` a multiple of ``n`` (odd multiple if ``odd``).

    ``n = 0`` means time-independent fields; ``cos_only`` drops the sine
    row (fields even in time).
    """

    n: int = 1
    odd: bool = False
    cos_only: bool = False
    invariant = True

    @property
    def name(self):
        if self.n == 0:
            return "static"
        s = f"j%{self.n}" if not self.odd else f"j%{2 * self.n}={self.n}"
        return s + ("+cos" if self.cos_only else "")

    def mask(self, space: WaveSpace):
        j = np.arange(space.j_max + 1)
        if self.n == 0:
            ok = j == 0
        elif self.odd:
            ok = (j % (2 * self.n)) == self.n
        else:
            ok = (j % self.n) == 0
        m = np.broadcast_to(ok[None, :, None], space.shape).copy()
        if self.cos_only:
            m[1] = False
        return m & space.valid

    def exact_on_grid(self, space: WaveSpace):
        step = 2 * self.n if self.odd else max(self.n, 1)
        return space.n_t % step == 0

    @classmethod
    def parse(cls, name):
        if name in (None, "", "all"):
            return cls()
        if name == "static":
            return cls(0)
        cos = name.endswith("+cos")
        core = name[:-4] if cos else name
        if "=" in core:
            left, right = core[2:].split("=")
            return cls(int(right), True, cos)
        return cls(int(core[2:]), False, cos)


FULL = Symmetry()


@dataclass(frozen=True)
class ModeSubspace:
    """Span of explicit ``(row, j, k)`` modes, row 0 cosine and row 1 sine.

    Not invariant under the gradient in general, so residuals are measured
    inside the subspace; used for reduced models and tests.
    """

    modes: tuple
    invariant = False

    @property
    def name(self):
        return "modes:" + ";".join(f"{r},{j},{k}" for r, j, k in self.modes)

    def mask(self, space: WaveSpace):
        m = np.zeros(space.shape, dtype=bool)
        for r, j, k in self.modes:
            i = np.nonzero(space.labels == k)[0]
            if i.size == 0 or abs(j) > space.j_max:
                raise TruncationError(f"mode ({j}, {k}) outside the space")
            m[r, abs(j), i[0]] = True
        return m & space.valid

    def exact_on_grid(self, space: WaveSpace):
        return True


@dataclass
class SolutionRecord:
    u: CoeffField
    phi: float
    residual: float
    mass: float
    method: str
    iters: int
    seed: int | None
    m: int
    level: int | None = None
    trivial: bool = False
    symmetry: str = "j%1"
    max_iterate_norm: float = 0.0
    identity_defect: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def norm(self):
        return e_norm(self.u)

    def to_dict(self):
        return {
            "field": self.u.to_dict(),
            "phi": self.phi,
            "residual": self.residual,
            "mass": self.mass,
            "method": self.method,
            "iters": self.iters,
            "seed": self.seed,
            "m": self.m,
            "level": self.level,
            "trivial": self.trivial,
            "symmetry": self.symmetry,
            "max_iterate_norm": self.max_iterate_norm,
            "identity_defect": self.identity_defect,
            "extra": self.extra,
        }

    @classmethod
    def from_dict(cls, d, space: WaveSpace):
        u = CoeffField.from_dict(d["field"], space)
        keys = ("phi", "residual", "mass", "method", "iters", "seed", "m", "level", "trivial",
                "symmetry", "max_iterate_norm", "identity_defect", "extra")
        return cls(u, **{k: d[k] for k in keys})


class GalerkinProblem:
    """Gradient and Hessian of the functional restricted to ``E^m`` (and a symmetry class)."""

    def __init__(self, space: WaveSpace, p: float, m: int, symmetry: Symmetry = FULL):
        self.space = space
        self.p = check_exponent(p)
        self.m = int(m)
        self.symmetry = symmetry
        self.mask = space.galerkin_mask(self.m) & symmetry.mask(space)
        self.plus = self.mask & space.plus_mask()
        self.minus = self.mask & space.minus_mask()
        self.shift = np.broadcast_to(space.shift[None], space.shape)
        self.w = np.abs(self.shift)
        self.J1 = space.j_max + 1

    def project(self, data):
        return np.where(self.mask, data, 0.0)

    def grad(self, data):
        sp = self.space
        U = sp.synthesize_array(data)
        g = -self.shift * data + sp.analyze_array(f_eval(U, self.p))
        return np.where(self.mask, g, 0.0), U

    def value(self, data, U=None):
        sp = self.space
        if U is None:
            U = sp.synthesize_array(data)
        return float(-0.5 * np.sum(self.shift * data**2)
                     + sp.lr_integral(U, self.p + 1.0) / (self.p + 1.0))

    def residual(self, g, sel=None):
        sel = self.mask if sel is None else sel
        return float(math.sqrt(np.sum(g[sel] ** 2 / self.w[sel])))

    def hessian(self, U, sel):
        """Dense Hessian of the functional in the coordinates selected by ``sel``."""
        sp = self.space
        r, j, k = np.nonzero(sel)
        a = r * self.J1 + j
        ua, ia = np.unique(a, return_inverse=True)
        uk, ik = np.unique(k, return_inverse=True)
        absU = np.abs(U)
        floor = 1e-12 * max(float(absU.max()), 1e-300)
        D = self.p * np.maximum(absU, floor) ** (self.p - 1.0) * sp.wt * sp.wx[None, :]
        Px = sp.space_basis[:, uk]
        Bt = sp.time_basis[:, ua]
        M = np.einsum("xk,tx,xl->tkl", Px, D, Px, optimize=True)
        H4 = np.einsum("ta,tkl,tb->akbl", Bt, M, Bt, optimize=True)
        H = H4[ia[:, None], ik[:, None], ia[None, :], ik[None, :]]
        H[np.diag_indices_from(H)] -= self.shift[sel]
        return H

    # inner convex problem -------------------------------------------------
    def minimize_minus(self, data, tol=1e-12, max_iter=50):
        """Minimise over the minus coordinates with the plus part frozen."""
        sel = self.minus
        if not sel.any():
            return data, 0
        data = data.copy()
        g, U = self.grad(data)
        val = self.value(data, U)
        for it in range(max_iter):
            gm = g[sel]
            if math.sqrt(np.sum(gm**2 / self.w[sel])) <= tol:
                return data, it
            H = self.hessian(U, sel)
            try:
                step = -np.linalg.solve(H, gm)
            except np.linalg.LinAlgError:
                step = -np.linalg.lstsq(H, gm, rcond=None)[0]
            slope = float(np.dot(gm, step))
            if slope >= 0:
                step, slope = -gm / self.w[sel], -float(np.sum(gm**2 / self.w[sel]))
            s = 1.0
            while True:
                trial = data.copy()
                trial[sel] += s * step
                Ut = self.space.synthesize_array(trial)
                vt = self.value(trial, Ut)
                if vt <= val + 1e-4 * s * slope or s < 1e-12:
                    break
                s *= 0.5
            if s < 1e-12:
                return data, it
            data, val = trial, vt
            g, U = self.grad(data)
        return data, max_iter


def _record(problem: GalerkinProblem, data, method, iters, seed, max_norm, tol, extra=None):
    sp = problem.space
    u = CoeffField(data.copy(), sp)
    full = GalerkinProblem(sp, problem.p, problem.m) if problem.symmetry.invariant else problem
    gf, _ = full.grad(data)
    res = full.residual(gf)
    norm = e_norm(u)
    rec = SolutionRecord(
        u=u, phi=phi(u, problem.p), residual=res, mass=mass(u, problem.p), method=method,
        iters=int(iters), seed=seed, m=problem.m, trivial=bool(norm < 10.0 * tol),
        symmetry=problem.symmetry.name, max_iterate_norm=float(max(max_norm, norm)),
        identity_defect=critical_identity_defect(u, problem.p), extra=dict(extra or {}))
    return rec


def fixed_point_solve(u0: CoeffField, m: int, p: float, tol: float = 1e-9,
                      max_iter: int = 500, symmetry: Symmetry = FULL, memory: int = 6,
                      seed=None) -> SolutionRecord:
    """Iterate ``u <- (L - mu)^-1 P_m f(u)`` with Anderson mixing.

    Converged when successive iterates differ by at most ``tol`` in E-norm.
    Raises ``NonConvergence`` (carrying the last record) otherwise.
    """
    prob = GalerkinProblem(u0.space, p, m, symmetry)
    sel = prob.mask
    sq = np.sqrt(prob.w[sel])
    sp = prob.space
    data = prob.project(u0.data)

    def G(y):
        d = np.zeros(sp.shape)
        d[sel] = y / sq
        U = sp.synthesize_array(d)
        return sp.analyze_array(f_eval(U, prob.p))[sel] / prob.shift[sel] * sq

    y = data[sel] * sq
    X, R = [], []
    max_norm = float(np.linalg.norm(y))
    for it in range(1, max_iter + 1):
        gy = G(y)
        res = gy - y
        if np.linalg.norm(res) <= tol:
            y = gy
            data = np.zeros(sp.shape)
            data[sel] = y / sq
            return _record(prob, data, "fixed-point", it, seed, max_norm, tol)
        X.append(gy)
        R.append(res)
        if len(R) > memory + 1:
            X.pop(0)
            R.pop(0)
        if len(R) > 1:
            dR = np.array(R[1:]) - np.array(R[:-1])
            dX = np.array(X[1:]) - np.array(X[:-1])
            gamma = np.linalg.lstsq(dR.T, res, rcond=None)[0]
            y_new = gy - dX.T @ gamma
        else:
            y_new = gy
        if not np.all(np.isfinite(y_new)):
            X, R = [], []
            y_new = gy
        y = y_new
        max_norm = max(max_norm, float(np.linalg.norm(y)))
    data = np.zeros(sp.shape)
    data[sel] = y / sq
    raise NonConvergence(f"fixed-point iteration did not converge in {max_iter} steps",
                         last=_record(prob, data, "fixed-point", max_iter, seed, max_norm, tol))


def _newton(prob: GalerkinProblem, data, tol, max_iter):
    """Newton steps on the gradient with backtracking on the E-Riesz residual."""
    sel = prob.mask
    g, U = prob.grad(data)
    r = prob.residual(g)
    it = 0
    stalled = False
    for it in range(1, max_iter + 1):
        if r <= tol:
            return data, r, it - 1, False
        H = prob.hessian(U, sel)
        step = np.linalg.lstsq(H, -g[sel], rcond=1e-14)[0]
        s = 1.0
        while s >= 1e-8:
            trial = data.copy()
            trial[sel] += s * step
            gt, Ut = prob.grad(trial)
            rt = prob.residual(gt)
            if rt < (1.0 - 1e-4 * s) * r:
                break
            s *= 0.5
        else:
            stalled = True
            break
        data, g, U, r = trial, gt, Ut, rt
    return data, r, it, stalled or r > tol


def saddle_search(u0: CoeffField, m: int, p: float, tol: float = 1e-9,
                  max_iter: int = 400, symmetry: Symmetry = FULL, switch_tol: float = 1e-5,
                  newton_iter: int = 40, seed=None) -> SolutionRecord:
    """Critical point near ``u0`` by reduced-functional ascent and Newton refinement.

    Accepts when the E-Riesz residual is at most ``tol``.  A start that is
    already critical returns with zero iterations.  Raises
    ``NonConvergence`` when Newton stalls with a positive residual (a
    stationary point of the residual that is not critical) or the ascent
    runs out of iterations.
    """
    prob = GalerkinProblem(u0.space, p, m, symmetry)
    sp = prob.space
    data = prob.project(u0.data)
    g, _ = prob.grad(data)
    r = prob.residual(g)
    max_norm = e_norm(CoeffField(data, sp))
    if r <= tol:
        return _record(prob, data, "saddle", 0, seed, max_norm, tol)

    iters = 0
    if r > switch_tol and prob.plus.any():
        sel = prob.plus
        sq = np.sqrt(prob.w[sel])
        state = {"data": data, "res": r, "norm": max_norm}

        def neg_psi(y):
            d = state["data"].copy()
            d[sel] = y / sq
            d, _ = prob.minimize_minus(d)
            gg, U = prob.grad(d)
            state["data"] = d
            state["res"] = prob.residual(gg)
            state["norm"] = max(state["norm"], float(np.sqrt(np.sum(prob.w * d * d))))
            return -prob.value(d, U), -gg[sel] / sq

        def stop(intermediate_result):
            if state["res"] <= switch_tol:
                raise StopIteration

        res = minimize(neg_psi, data[sel] * sq, jac=True, method="L-BFGS-B", callback=stop,
                       options={"maxiter": max_iter, "gtol": 0.0, "ftol": 0.0,
                                "maxcor": 20})
        iters += int(res.nit)
        data, max_norm = state["data"], state["norm"]
    elif prob.minus.any():
        data, _ = prob.minimize_minus(data)

    data, r, nit, failed = _newton(prob, data, tol, newton_iter)
    iters += nit
    max_norm = max(max_norm, e_norm(CoeffField(data, sp)))
    rec = _record(prob, data, "saddle", iters, seed, max_norm, tol)
    if rec.residual > tol and not failed and symmetry.invariant:
        # symmetric solve done; remove grid-induced leakage in the full space
        full = GalerkinProblem(sp, p, m)
        data, r, nit, failed = _newton(full, data, tol, newton_iter)
        rec = _record(full, data, "saddle", iters + nit, seed, max_norm, tol)
        rec.symmetry = symmetry.name
    if failed or rec.residual > tol:
        rec.extra["saddle_of_residual"] = bool(failed)
        raise NonConvergence(f"saddle search stopped at residual {rec.residual:.3g}", last=rec)
    return rec


# symmetry-aware distances --------------------------------------------------
def _phase_products(a: CoeffField, b: CoeffField):
    w = a.space.e_weight()
    ac, as_ = a.data * w
    bc, bs = b.data
    P = np.sum(ac * bc + as_ * bs, axis=1)
    Q = np.sum(ac * bs - as_ * bc, axis=1)
    return P, Q


def orbit_distance(a: CoeffField, b: CoeffField, shifts: int = PHASE_SHIFTS):
    """Smallest E-distance from ``a`` to ``+-b`` under time shifts and reversal.

    Returns ``(distance, tag)`` with ``tag`` naming the matching symmetry.
    """
    sp = a.space
    nu = sp.period.nu(np.arange(sp.j_max + 1))
    T = sp.period.T
    scale = e_norm(a) + e_norm(b)
    best = (math.inf, None)
    for rev in (False, True):
        bb = reverse_time(b) if rev else b
        P, Q = _phase_products(a, bb)

        def inner(s):
            return float(np.sum(P * np.cos(nu * s) + Q * np.sin(nu * s)))

        grid = np.arange(shifts) * (T / shifts)
        vals = np.array([inner(s) for s in grid])
        for sign in (1.0, -1.0):
            i = int(np.argmax(sign * vals))
            s0 = grid[i]
            h = T / shifts
            r = minimize_scalar(lambda s: -sign * inner(s), bounds=(s0 - h, s0 + h),
                                method="bounded", options={"xatol": 1e-12 * T})
            d = min(e_norm(a - sign * shift_time(bb, s)) for s in (s0, float(r.x)))
            # ties (e.g. -u equal to a half-period shift) keep the simpler transformation
            if d < best[0] - 1e-12 * max(1.0, scale):
                d_fixed = e_norm(a - sign * bb)
                tags = []
                if sign < 0:
                    tags.append("sign")
                if rev:
                    tags.append("reversal")
                if d_fixed - d > 1e-9 * max(1.0, scale):
                    tags.append("shift")
                best = (d, "+".join(tags) or "identity")
    return best


def deflate(found, candidate: SolutionRecord, sep: float | None = None):
    """Accept ``candidate`` unless it matches a found solution up to symmetry.

    Returns ``(accepted, index, tag)``; ``index`` and ``tag`` identify the
    match on rejection.
    """
    if sep is None:
        sep = 1e-3 * max(1.0, candidate.norm)
    for i, s in enumerate(found):
        d, tag = orbit_distance(candidate.u, s.u)
        if d <= sep:
            return False, i, tag
    return True, None, None


# seeding and the solution sequence ------------------------------------------
SYMMETRY_CYCLE = (
    Symmetry(0),
    Symmetry(1, True, True),
    Symmetry(2, True, True),
    Symmetry(3, True, True),
    Symmetry(6, True, True),
    Symmetry(1, False, True),
    Symmetry(1, True, False),
    Symmetry(2, True, False),
    Symmetry(3, True, False),
    Symmetry(1, False, False),
    Symmetry(2, False, True),
    Symmetry(3, False, True),
)


def symmetry_cycle(space: WaveSpace):
    """Symmetry classes that are exact on the space's time grid."""
    return [s for s in SYMMETRY_CYCLE if s.exact_on_grid(space)]


def seed_field(space: WaveSpace, rng, l: int, m: int, p: float, kind: str,
               symmetry: Symmetry = FULL):
    """Random start in ``E_{l+1}`` (``kind='level'``) or ``(E_l)^perp`` (``'complement'``).

    The start is restricted to ``E^m`` and the symmetry class, then scaled
    to the maximum of ``Phi`` along the ray of its plus part.
    """
    mask = space.galerkin_mask(m) & symmetry.mask(space)
    if kind == "level":
        mask &= space.level_mask(min(l + 1, space.j_max, space.k_max))
    else:
        mask &= space.level_complement_mask(l)
    u = space.random(rng, mask)
    # damp high modes so that starts are smooth
    u.data /= (1.0 + np.abs(space.shift))[None]
    plus = CoeffField(np.where(space.plus_mask(), u.data, 0.0), space)
    ray = ray_maximum(plus, p)
    if ray is None:
        return None
    return u * ray[0]


@dataclass
class LevelReport:
    l: int
    rho: float
    sigma: float
    found: int
    in_window: bool
    max_phi: float | None
    min_mass: float | None


def solution_sequence(space: WaveSpace, p: float, levels, m: int, bounds: dict,
                      starts: int = 32, seed: int = 0, tol: float = 1e-9,
                      max_iter: int = 400, log=None):
    """Multi-start search with deflation for every level.

    ``bounds`` maps each level to its ``LevelBounds``.  Accepted solutions
    with ``0 < Phi <= rho_l`` are assigned to the level whose search found
    them.  Returns ``(records, reports)`` with records sorted by ``Phi``
    descending; levels where nothing lands in ``[sigma_l, rho_l]`` are
    reported as such.
    """
    p = check_exponent(p)
    found: list[SolutionRecord] = []
    reports = []
    cycle = symmetry_cycle(space)
    for l in levels:
        lb: LevelBounds = bounds[l]
        rng = np.random.default_rng([seed, l])
        for s in range(starts):
            sym = cycle[s % len(cycle)]
            kind = "level" if (s // len(cycle)) % 2 == 0 else "complement"
            u0 = seed_field(space, rng, l, m, p, kind, sym)
            if u0 is None:
                continue
            try:
                rec = saddle_search(u0, m, p, tol=tol, max_iter=max_iter, symmetry=sym,
                                    seed=s)
            except NonConvergence:
                continue
            if rec.trivial or not 0.0 < rec.phi <= lb.rho:
                continue
            ok, _, _ = deflate(found, rec)
            if not ok:
                continue
            # independent cross-check: the fixed-point map must accept the point
            try:
                fp = fixed_point_solve(rec.u, m, p, tol=max(tol, 10 * rec.residual),
                                       max_iter=5)
                rec.extra["fixed_point_step"] = fp.iters
            except NonConvergence:
                rec.extra["fixed_point_step"] = None
            rec.level = l
            rec.extra["start_kind"] = kind
            found.append(rec)
            if log:
                log(f"level {l} start {s}: phi={rec.phi:.6g} residual={rec.residual:.2e} "
                    f"symmetry={rec.symmetry}")
        mine = [r for r in found if r.level == l]
        reports.append(LevelReport(
            l, lb.rho, lb.sigma, len(mine),
            any(lb.sigma <= r.phi <= lb.rho for r in mine),
            max((r.phi for r in mine), default=None),
            min((r.mass for r in mine), default=None)))
    found.sort(key=lambda r: -r.phi)
    return found, reports


# truncation and verification --------------------------------------------------
def embed(u: CoeffField, space: WaveSpace) -> CoeffField:
    """Copy coefficients into another space; modes missing there are dropped."""
    src = u.space
    out = space.zeros()
    J = min(src.j_max, space.j_max)
    common = np.intersect1d(src.labels, space.labels)
    si = np.searchsorted(src.labels, common)
    di = np.searchsorted(space.labels, common)
    out.data[:, : J + 1][:, :, di] = u.data[:, : J + 1][:, :, si]
    return out


@dataclass
class TruncationReport:
    m: int
    m_new: int
    difference: float
    norms: dict
    residuals: dict
    converged: dict


def truncation_study(record: SolutionRecord, m_values, p: float, space: WaveSpace | None = None,
                     tol: float = 1e-9, max_iter: int = 400):
    """Re-solve ``record`` on ``E^m`` for each ``m`` in ``m_values`` (all in one space).

    Reports the E-distance between the first two solutions and the largest
    iterate norm per ``m`` (the bounded-iterates check).
    """
    space = record.u.space if space is None else space
    for mm in m_values:
        if mm > space.j_max or mm > space.k_max:
            raise TruncationError(f"m={mm} exceeds the space truncation")
    sym = Symmetry.parse(record.symmetry)
    u = embed(record.u, space)
    sols, norms, res, conv = {}, {}, {}, {}
    for mm in m_values:
        try:
            rec = saddle_search(u, mm, p, tol=tol, max_iter=max_iter, symmetry=sym)
            conv[mm] = True
        except NonConvergence as exc:
            rec = exc.last
            conv[mm] = False
        sols[mm] = rec
        norms[mm] = rec.max_iterate_norm
        res[mm] = rec.residual
        u = rec.u
    m0, m1 = list(m_values)[:2]
    diff, _ = orbit_distance(sols[m1].u, sols[m0].u)
    return TruncationReport(m0, m1, diff, norms, res, conv), sols


@dataclass
class VerifyReport:
    max_residual: float
    identity_defect: float
    energy_balance: float
    residuals: list
    n_tests: int


def verify_solution(record: SolutionRecord, p: float, n_tests: int = 100, seed: int = 0):
    """Weak-form residual against random test fields in ``E^m``.

    For a test field ``psi`` the residual is
    ``sum (lam - mu) alpha beta - int f(u) psi rho``, where the spectral part
    uses the eigenvalues and the integral is evaluated on the grid from the
    synthesised fields; it is normalised by ``|psi|_{L2}``.
    """
    u = record.u
    sp = u.space
    rng = np.random.default_rng(seed)
    mask = sp.galerkin_mask(record.m)
    U = sp.synthesize_array(u.data)
    fU = f_eval(U, p)
    shift = sp.shift[None]
    out = []
    for _ in range(n_tests):
        beta = np.where(mask, rng.standard_normal(sp.shape), 0.0)
        beta[~sp.valid] = 0.0
        psi = sp.synthesize_array(beta)
        lin = float(np.sum(shift * u.data * beta))
        non = float(sp.wt * np.sum((fU * psi) @ sp.wx))
        out.append(abs(lin - non) / float(np.linalg.norm(beta)))
    quad = float(np.sum(shift * u.data**2))
    M = sp.lr_integral(U, p + 1.0)
    return VerifyReport(max(out) if out else 0.0, critical_identity_defect(u, p),
                        abs(quad - M), out, n_tests)


# archive -------------------------------------------------------------------
def atomic_write(path, text):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_archive(records, out_dir):
    """One JSON per record plus ``summary.csv`` with ``l,phi,residual,mass,method,iters``."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for i, rec in enumerate(records):
        path = os.path.join(out_dir, f"solution_{i:03d}.json")
        atomic_write(path, json.dumps(rec.to_dict(), indent=1))
        paths.append(path)
    lines = ["l,phi,residual,mass,method,iters"]
    for rec in records:
        lines.append(f"{rec.level},{rec.phi!r},{rec.residual!r},{rec.mass!r},"
                     f"{rec.method},{rec.iters}")
    atomic_write(os.path.join(out_dir, "summary.csv"), "\n".join(lines) + "\n")
    return paths


def read_archive(out_dir, space: WaveSpace):
    names = sorted(n for n in os.listdir(out_dir)
                   if n.startswith("solution_") and n.endswith(".json"))
    out = []
    for n in names:
        with open(os.path.join(out_dir, n)) as fh:
            out.append(SolutionRecord.from_dict(json.load(fh), space))
    return out


def read_summary(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
