"""Spatial eigenproblem in potential form.

After the substitution ``z = sqrt(rho) phi`` the weighted problem
``-(rho phi')' = lam**2 rho phi`` becomes

    z'' + (lam**2 - eta) z = 0,
    alpha1 z(0) - beta1 z'(0) = 0,   alpha2 z(pi) + beta2 z'(pi) = 0.

It is discretised by central differences on ``x_n = n h``, ``h = pi/N``.
Robin/Neumann ends keep the boundary node with half weight (ghost point
eliminated), Dirichlet ends drop it.  The resulting symmetric tridiagonal
matrix is solved by Sturm-count multisection on grids ``N`` and ``2N``.
Each grid's eigenvalues get the zero-potential correction (exact minus
discrete eigenvalues of ``-z''`` with the same boundary rows), then the two
sets are Richardson-extrapolated.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .coefficient import PI, Coefficient, SpectralConstants, eta_rho
from .errors import (
    InadmissibleBoundary,
    InvalidBoundary,
    NonPositivePotential,
    ResolutionError,
    UncoveredCase,
)
from .tridiagonal import eigvalsh_tridiagonal_index, inverse_iteration, richardson

# leading-order offset of lam_k: k (cases 1, 4, 5) or k + 1/2 (cases 2, 3)
HALF_INTEGER_CASES = (2, 3)
RESOLUTION_FACTOR = 16


def _zero(v, scale=1.0):
    return abs(v) <= 1e-12 * max(1.0, abs(scale))


@dataclass(frozen=True)
class RobinBC:
    """Physical boundary data and its potential-form counterpart."""

    a1: float
    b1: float
    a2: float
    b2: float
    alpha1: float
    beta1: float
    alpha2: float
    beta2: float
    admissible: bool
    case: int | None = None
    reflected: bool = False

    @property
    def alphas(self):
        return (self.alpha1, self.alpha2)

    @property
    def betas(self):
        return (self.beta1, self.beta2)

    def swapped(self) -> "RobinBC":
        """Data seen from the reflected coordinate ``pi - x``."""
        return RobinBC(self.a2, -self.b2, self.a1, -self.b1,
                       self.alpha2, self.beta2, self.alpha1, self.beta1,
                       self.admissible, self.case, not self.reflected)


def boundary_transform(a1, b1, a2, b2, coeff: Coefficient) -> RobinBC:
    """Potential-form boundary coefficients.

    alpha1 = a1 - b1/2 * rho'(0)/rho(0),  beta1 = -b1
    alpha2 = a2 - b2/2 * rho'(pi)/rho(pi), beta2 = b2

    Inadmissible data (a negative coefficient, or alpha_i + beta_i = 0) is
    flagged, not refused.
    """
    a1, b1, a2, b2 = (float(v) for v in (a1, b1, a2, b2))
    if a1 == 0 and b1 == 0 or a2 == 0 and b2 == 0:
        raise InvalidBoundary("each end needs a nonzero (a_i, b_i) pair")
    ld0 = float(coeff.log_derivative(0.0))
    ldpi = float(coeff.log_derivative(PI))
    alpha1 = a1 - 0.5 * b1 * ld0
    alpha2 = a2 - 0.5 * b2 * ldpi
    beta1, beta2 = -b1, b2
    scale1 = max(abs(a1), abs(b1 * ld0))
    scale2 = max(abs(a2), abs(b2 * ldpi))
    # snap round-off to exact zeros so that the case split is stable
    if _zero(alpha1, scale1):
        alpha1 = 0.0
    if _zero(alpha2, scale2):
        alpha2 = 0.0
    admissible = (alpha1 >= 0 and beta1 >= 0 and alpha1 + beta1 > 0
                  and alpha2 >= 0 and beta2 >= 0 and alpha2 + beta2 > 0)
    bc = RobinBC(a1, b1, a2, b2, alpha1, beta1, alpha2, beta2, admissible)
    if admissible:
        try:
            case = classify_case(bc)
        except UncoveredCase:
            return bc
        bc = RobinBC(a1, b1, a2, b2, alpha1, beta1, alpha2, beta2, True,
                     case, case == 3)
    return bc


def classify_case(bc: RobinBC) -> int:
    """Case tag 1..5.

    1 Dirichlet-Dirichlet, 2 Dirichlet-Neumann, 3 Neumann-Dirichlet (solved
    as case 2 after reflection), 4 Neumann-Neumann, 5 Robin-Robin.
    """
    if not bc.admissible:
        raise InadmissibleBoundary(
            f"boundary data not admissible: alpha=({bc.alpha1}, {bc.alpha2}), "
            f"beta=({bc.beta1}, {bc.beta2})")

    def kind(alpha, beta):
        if alpha > 0 and beta == 0:
            return "D"
        if alpha == 0 and beta > 0:
            return "N"
        return "R"

    pair = kind(bc.alpha1, bc.beta1) + kind(bc.alpha2, bc.beta2)
    cases = {"DD": 1, "DN": 2, "ND": 3, "NN": 4, "RR": 5}
    if pair not in cases:
        raise UncoveredCase(f"boundary combination {pair} is not one of the five cases")
    return cases[pair]


def leading_order(k, case):
    k = np.asarray(k, dtype=float)
    return k + 0.5 if case in HALF_INTEGER_CASES else k


def first_label(case):
    """Smallest eigenvalue label: Dirichlet-Dirichlet starts at 1."""
    return 1 if case == 1 else 0


@dataclass
class Discretization:
    n: int
    h: float
    nodes: np.ndarray      # indices of active grid nodes
    weights: np.ndarray    # trapezoid weights of the active nodes (1 or 1/2)
    diag: np.ndarray       # symmetrised tridiagonal
    off: np.ndarray


def discretize(coeff: Coefficient | None, bc: RobinBC, n: int) -> Discretization:
    """Symmetric central-difference matrix for ``-z'' + eta z``.

    ``coeff=None`` gives the zero-potential matrix with the same boundary rows.
    """
    h = PI / n
    x = np.linspace(0.0, PI, n + 1)
    q = np.zeros(n + 1) if coeff is None else eta_rho(coeff, x)
    w = np.ones(n + 1)
    a = 2.0 / h**2 + q
    if bc.beta1 > 0:
        w[0] = 0.5
        a[0] = (1.0 + h * bc.alpha1 / bc.beta1) / h**2 + 0.5 * q[0]
        lo = 0
    else:
        lo = 1
    if bc.beta2 > 0:
        w[n] = 0.5
        a[n] = (1.0 + h * bc.alpha2 / bc.beta2) / h**2 + 0.5 * q[n]
        hi = n
    else:
        hi = n - 1
    nodes = np.arange(lo, hi + 1)
    ww = w[nodes]
    diag = a[nodes] / ww
    off = -1.0 / h**2 / np.sqrt(ww[:-1] * ww[1:])
    return Discretization(n, h, nodes, ww, diag, off)


@dataclass
class EigenBasis:
    """Eigenpairs of the potential-form problem.

    ``vectors[:, i]`` holds ``z`` for label ``labels[i]`` on all ``n + 1``
    grid nodes (zero at Dirichlet ends), normalised so that
    ``sum(h * weights * z_i * z_j) = delta_ij``.
    """

    coeff: Coefficient
    bc: RobinBC
    case: int
    n: int
    labels: np.ndarray
    lam_sq: np.ndarray          # extrapolated squared eigenvalues
    lam: np.ndarray             # positive roots (nan where lam_sq < 0)
    err: np.ndarray             # |extrapolated - fine grid| on lam
    lam_sq_coarse: np.ndarray
    lam_sq_fine: np.ndarray
    vectors: np.ndarray
    weights: np.ndarray
    x: np.ndarray
    below_zero: np.ndarray
    extra: dict = field(default_factory=dict)

    @property
    def h(self):
        return PI / self.n

    @property
    def theta(self):
        return self.lam - leading_order(self.labels, self.case)

    def index_of(self, k):
        i = np.nonzero(self.labels == k)[0]
        if i.size == 0:
            raise KeyError(f"label {k} not in basis")
        return int(i[0])

    def inner(self, u, v):
        return float(np.sum(self.h * self.weights * u * v))

    def gram(self):
        z = self.vectors
        return (z * (self.h * self.weights)[:, None]).T @ z

    def physical(self):
        """Weighted eigenfunctions ``phi = z / sqrt(rho)`` on the grid."""
        return self.vectors / np.sqrt(self.coeff.rho(self.x))[:, None]

    @property
    def max_label(self):
        return int(self.labels[-1])


def _robin_roots(bc: RobinBC, count):
    """Squared eigenvalues of ``-z'' = w**2 z`` with Robin data at both ends."""
    a1, b1, a2, b2 = bc.alpha1, bc.beta1, bc.alpha2, bc.beta2
    s = a2 * b1 + a1 * b2

    def g(w):
        return s * w * math.cos(PI * w) + (a1 * a2 - b1 * b2 * w * w) * math.sin(PI * w)

    out = np.empty(count)
    for k in range(count):
        lo = k if k else 1e-9
        out[k] = brentq(g, lo, k + 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps) ** 2
    return out


def reference_correction(bc: RobinBC, case: int, n: int, count: int):
    """Exact minus discrete squared eigenvalues of the zero-potential problem.

    Adding this to the discrete eigenvalues removes the dominant, rapidly
    growing part of the discretisation error (exact for constant potential).
    """
    h = PI / n
    first = first_label(case)
    k = np.arange(first, first + count, dtype=float)
    if case in (1, 4):
        return k**2 - (4.0 / h**2) * np.sin(0.5 * k * h) ** 2
    if case in HALF_INTEGER_CASES:
        q = k + 0.5
        return q**2 - (4.0 / h**2) * np.sin(0.5 * q * h) ** 2
    disc = discretize(None, bc, n)
    vals, _, _ = eigvalsh_tridiagonal_index(disc.diag, disc.off, np.arange(count))
    return _robin_roots(bc, count) - vals


def _solve_grid(coeff, bc, n, count, case):
    disc = discretize(coeff, bc, n)
    if disc.diag.size < count:
        raise ResolutionError("grid has fewer unknowns than requested eigenvalues")
    vals, _, _ = eigvalsh_tridiagonal_index(disc.diag, disc.off, np.arange(count))
    return disc, vals, vals + reference_correction(bc, case, n, count)


def eigensolve(coeff: Coefficient, bc: RobinBC, K: int, N: int) -> EigenBasis:
    """Eigenpairs with labels up to ``K``.

    Labels follow the oscillation count of the eigenfunction: case 1 gives
    ``1..K``, all other cases ``0..K``.  Eigenvalues are extrapolated from
    grids ``N`` and ``2N``; eigenvectors come from grid ``N``.  Negative
    squared eigenvalues are kept and flagged in ``below_zero``.
    """
    case = classify_case(bc)
    K = int(K)
    if K < 1:
        raise ResolutionError("K must be at least 1")
    first = first_label(case)
    count = K - first + 1
    if N < RESOLUTION_FACTOR * K:
        raise ResolutionError(f"grid N={N} too coarse for K={K}; need N >= {RESOLUTION_FACTOR * K}")

    work_coeff, work_bc = (coeff.reflected(), bc.swapped()) if bc.reflected else (coeff, bc)
    disc, raw, coarse = _solve_grid(work_coeff, work_bc, N, count, case)
    _, _, fine = _solve_grid(work_coeff, work_bc, 2 * N, count, case)
    lam_sq = richardson(coarse, fine)

    y = inverse_iteration(disc.diag, disc.off, raw)
    z_active = y / np.sqrt(disc.h * disc.weights)[:, None]
    z = np.zeros((N + 1, count))
    z[disc.nodes] = z_active
    w = np.zeros(N + 1)
    w[disc.nodes] = disc.weights
    if bc.reflected:
        z = z[::-1].copy()
        w = w[::-1].copy()
    # sign convention: first significant value positive
    for i in range(count):
        col = z[:, i]
        j = int(np.argmax(np.abs(col) > 1e-8 * np.max(np.abs(col))))
        if col[j] < 0:
            z[:, i] = -col

    below = lam_sq < 0
    lam = np.where(below, np.nan, np.sqrt(np.abs(lam_sq)))
    fine_root = np.sqrt(np.abs(fine))
    err = np.abs(np.where(below, np.nan, lam) - fine_root)
    return EigenBasis(
        coeff=coeff, bc=bc, case=case, n=N,
        labels=np.arange(first, K + 1),
        lam_sq=lam_sq, lam=lam, err=err,
        lam_sq_coarse=coarse, lam_sq_fine=fine,
        vectors=z, weights=w, x=np.linspace(0.0, PI, N + 1),
        below_zero=below,
    )


def theta_deviations(basis: EigenBasis, case: int | None = None):
    """``lam_k - k`` (cases 1, 4, 5) or ``lam_k - (k + 1/2)`` (cases 2, 3)."""
    case = basis.case if case is None else case
    return basis.lam - leading_order(basis.labels, case)


@dataclass
class CertRecord:
    k: int
    lam: float
    theta: float
    lower: float
    upper: float
    passed: bool
    inner_lower: float | None = None
    inner_upper: float | None = None


@dataclass
class CertReport:
    case: int
    records: list
    n0: int | None
    verdict: bool
    rtol: float

    def as_rows(self):
        return [
            {"k": r.k, "lambda": r.lam, "theta": r.theta, "lower": r.lower,
             "upper": r.upper, "inner_lower": r.inner_lower,
             "inner_upper": r.inner_upper, "pass": r.passed}
            for r in self.records
        ]


def theta_bounds(k, consts: SpectralConstants, case: int):
    """Outer and inner bounds on theta_k for one label.

    Returns ``(lower, upper, inner_lower, inner_upper)``; inner bounds are
    ``None`` when the case has no sharper chain.
    """
    k = float(k)
    if case == 1:
        return (consts.sqrt_shift / k, consts.eta_mean2 / (2 * k),
                math.sqrt(k * k + consts.eta_inf) - k,
                math.sqrt(k * k + consts.eta_mean2) - k)
    if case in HALF_INTEGER_CASES:
        q = k + 0.5
        return (consts.ratio / (2 * k + 1), consts.eta_mean2 / (2 * k + 1), None,
                consts.eta_mean2 / (math.sqrt(q * q + consts.eta_mean2) + q))
    if case == 4:
        return (consts.sqrt_shift / k, consts.eta_mean2 / (2 * k), None,
                math.sqrt(k * k + consts.eta_mean2) - k)
    if case == 5:
        if consts.robin is None:
            raise InadmissibleBoundary("Robin constant needs both beta positive")
        return (consts.sqrt_shift / k, consts.robin / k, None,
                math.sqrt(k * k + 2 * consts.robin) - k)
    raise ValueError(f"unknown case {case}")


def certify_asymptotics(basis: EigenBasis, consts: SpectralConstants,
                        case: int | None = None, rtol: float = 1e-8) -> CertReport:
    """Check every certified label against the case's theta window.

    A record passes when all outer and inner bounds hold up to
    ``rtol * lam_k``, the relative accuracy of the extrapolated eigenvalues.
    Case 5 reports the smallest label ``n0`` from which every later label
    passes; labels 0 of cases 4 and 5 are not certified.
    """
    if not consts.positive:
        raise NonPositivePotential(
            f"potential infimum {consts.eta_inf:.3g} is not positive; refusing certification")
    case = basis.case if case is None else case
    theta = theta_deviations(basis, case)
    start = 0 if case in HALF_INTEGER_CASES else 1
    records = []
    for i, k in enumerate(basis.labels):
        if k < start or basis.below_zero[i]:
            continue
        lo, hi, ilo, ihi = theta_bounds(k, consts, case)
        th = float(theta[i])
        tol = rtol * float(basis.lam[i]) + 1e-13
        ok = lo - tol <= th <= hi + tol
        if ilo is not None:
            ok = ok and ilo - tol <= th and lo <= ilo + tol
        if ihi is not None:
            ok = ok and th <= ihi + tol and ihi <= hi + tol
        records.append(CertRecord(int(k), float(basis.lam[i]), th, lo, hi, bool(ok), ilo, ihi))
    n0 = None
    if case == 5:
        n0 = None
        for r in reversed(records):
            if not r.passed:
                break
            n0 = r.k
        verdict = n0 is not None
    else:
        verdict = bool(records) and all(r.passed for r in records)
    return CertReport(case, records, n0, verdict, rtol)


def write_basis_csv(basis: EigenBasis, path, vectors_path=None):
    """Eigenvalue table ``k,lambda,theta,err_estimate`` plus optional vectors."""
    theta = basis.theta
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "lambda", "theta", "err_estimate"])
        for k, lam, th, e in zip(basis.labels, basis.lam, theta, basis.err):
            w.writerow([int(k), repr(float(lam)), repr(float(th)), repr(float(e))])
    if vectors_path is not None:
        with open(vectors_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x"] + [f"z_{int(k)}" for k in basis.labels])
            for n, xn in enumerate(basis.x):
                w.writerow([repr(float(xn))] + [repr(float(v)) for v in basis.vectors[n]])
