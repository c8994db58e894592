"""Spectrum of the time-periodic wave operator.

With temporal frequencies ``nu_j = j b / a`` the operator acts on the mode
``(j, k)`` by the eigenvalue ``lam_jk = lam_k**2 - nu_j**2``.  A finite table
covers ``0 <= j <= j_max`` and the labels of an ``EigenBasis``; the rest of
the spectrum is controlled by the certified theta bounds, which gives a
checkable lower bound (the tail floor) on the distance from ``mu`` to every
point outside the table.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .coefficient import SpectralConstants, spectral_constants
from .errors import (
    CertificationFailure,
    InconclusiveGap,
    InvalidCase,
    InvalidPeriod,
    NonPositivePotential,
)
from .sturm_liouville import HALF_INTEGER_CASES, EigenBasis, leading_order

# relative tolerance for treating two spectral values as equal
SPECTRUM_RTOL = 1e-8
# give up closing the tail beyond this label
MAX_CLOSE = 10**6


@dataclass(frozen=True)
class PeriodSpec:
    """Period ``T = 2 pi a / b`` with coprime ``a, b``."""

    a: int
    b: int

    @property
    def T(self) -> float:
        return 2.0 * math.pi * self.a / self.b

    @property
    def T_over_pi(self) -> Fraction:
        return Fraction(2 * self.a, self.b)

    def nu(self, j):
        return np.asarray(j, dtype=float) * self.b / self.a

    def nu_frac(self, j: int) -> Fraction:
        return Fraction(j * self.b, self.a)


def make_period(a: int, b: int) -> PeriodSpec:
    """Validated period, reduced to coprime form with a warning if needed."""
    if int(a) != a or int(b) != b:
        raise InvalidPeriod("a and b must be integers")
    a, b = int(a), int(b)
    if a < 1 or b < 1:
        raise InvalidPeriod(f"a and b must be positive integers, got ({a}, {b})")
    g = math.gcd(a, b)
    if g != 1:
        warnings.warn(f"period ({a}, {b}) reduced to coprime form ({a // g}, {b // g})",
                      stacklevel=2)
        a, b = a // g, b // g
    return PeriodSpec(a, b)


def is_resonant(j: int, k: int, period: PeriodSpec, case: int) -> bool:
    """Exact integer test ``k a = |j| b`` (``(k + 1/2) a = |j| b`` for cases 2, 3)."""
    j = abs(int(j))
    if case in HALF_INTEGER_CASES:
        return (2 * int(k) + 1) * period.a == 2 * j * period.b
    return int(k) * period.a == j * period.b


def essential_window(consts: SpectralConstants, case: int):
    """Interval holding every accumulation point of the spectrum."""
    if case in (1, 4):
        return (2.0 * consts.sqrt_shift, consts.eta_mean2)
    if case in HALF_INTEGER_CASES:
        return (consts.ratio, consts.eta_mean2)
    if case == 5:
        if consts.robin is None:
            raise InvalidCase("case 5 window needs both beta coefficients positive")
        return (2.0 * consts.sqrt_shift, 2.0 * consts.robin)
    raise InvalidCase(f"unknown case {case}")


class TailBounds:
    """Certified enclosures of ``lam_k**2`` for labels beyond the table."""

    def __init__(self, consts: SpectralConstants, case: int, period: PeriodSpec):
        if case == 5 and consts.robin is None:
            raise InvalidCase("case 5 needs both beta coefficients positive")
        self.consts = consts
        self.case = case
        self.period = period

    def pattern(self, k):
        return float(leading_order(k, self.case))

    def lam_sq_interval(self, k):
        c, k = self.consts, float(k)
        if self.case == 1:
            return k * k + c.eta_inf, k * k + c.eta_mean2
        if self.case in HALF_INTEGER_CASES:
            q = k + 0.5
            return (q + c.ratio / (2 * q)) ** 2, q * q + c.eta_mean2
        if self.case == 4:
            return (k + c.sqrt_shift / k) ** 2, k * k + c.eta_mean2
        return (k + c.sqrt_shift / k) ** 2, (k + c.robin / k) ** 2

    def resonant_envelope(self, k_from):
        """Bounds on resonant values ``lam_k**2 - pattern_k**2`` for labels >= k_from."""
        c = self.consts
        if self.case == 1:
            return c.eta_inf, c.eta_mean2
        if self.case in HALF_INTEGER_CASES:
            return c.ratio, c.eta_mean2
        if self.case == 4:
            return 2 * c.sqrt_shift, c.eta_mean2
        return 2 * c.sqrt_shift, 2 * c.robin + (c.robin / k_from) ** 2

    def resonance_possible(self):
        # (k + 1/2) a = j b needs an even a
        return not (self.case in HALF_INTEGER_CASES and self.period.a % 2)

    def nonresonant_floor(self, k):
        """Lower bound on ``|lam_jk|`` over nonresonant ``j`` for label ``k``."""
        unit = (0.5 if self.case in HALF_INTEGER_CASES else 1.0) / self.period.a
        p = self.pattern(k)
        theta_hi = math.sqrt(self.lam_sq_interval(k)[1]) - p
        return (unit - theta_hi) * p

    def j_range(self, lo, hi):
        """Integers ``j >= 0`` with ``nu_j**2`` in ``[lo, hi]``."""
        if hi < 0:
            return range(0)
        s = self.period.a / self.period.b
        j_lo = math.ceil(s * math.sqrt(max(lo, 0.0)) - 1e-12)
        j_hi = math.floor(s * math.sqrt(hi) + 1e-12)
        return range(max(j_lo, 0), j_hi + 1)


def _distance(mu, lo, hi):
    return max(0.0, lo - mu, mu - hi)


def scan_tail(bounds: TailBounds, lam_sq_table, labels, j_max: int, mu: float,
              radius: float):
    """Enclosures of every spectral point outside the table within ``radius`` of ``mu``.

    Returns ``(hits, complete, k_close)``.  ``hits`` lists
    ``(j, k, lo, hi, source)``; ``complete`` is False when the nonresonant
    bound never closed.  Resonant labels beyond ``k_close`` enter as one
    envelope hit with ``k = k_close``.
    """
    hits = []
    nu_sq = lambda j: (j * bounds.period.b / bounds.period.a) ** 2  # noqa: E731
    # table labels, j beyond j_max: exact values
    for L, k in zip(lam_sq_table, labels):
        cands = {j_max + 1}
        for j in bounds.j_range(L - mu - radius, L - mu + radius):
            cands.add(j)
        for j in sorted(cands):
            if j <= j_max:
                continue
            v = L - nu_sq(j)
            if abs(v - mu) <= radius:
                hits.append((j, int(k), v, v, "beyond-j"))
    # labels beyond the table: certified intervals until the nonresonant bound closes
    k = int(labels[-1]) + 1
    need = abs(mu) + radius
    while bounds.nonresonant_floor(k) < need:
        A, B = bounds.lam_sq_interval(k)
        for j in bounds.j_range(A - mu - radius, B - mu + radius):
            hits.append((j, k, A - nu_sq(j), B - nu_sq(j), "beyond-k"))
        k += 1
        if k > MAX_CLOSE:
            return hits, False, k
    if bounds.resonance_possible():
        lo, hi = bounds.resonant_envelope(k)
        if _distance(mu, lo, hi) <= radius:
            hits.append((None, k, lo, hi, "resonant-envelope"))
    return hits, True, k


@dataclass
class TailCertificate:
    floor: float
    conclusive: bool
    k_close: int
    radius: float
    nearest: tuple | None = None
    suggested: tuple | None = None


@dataclass
class SpectrumTable:
    """``lam_jk`` for ``0 <= j <= j_max`` and every label of the basis."""

    period: PeriodSpec
    case: int
    mu: float
    j_max: int
    labels: np.ndarray
    lam_sq: np.ndarray           # per label
    values: np.ndarray           # (j_max + 1, n_labels)
    resonant: np.ndarray         # bool, same shape
    sign: np.ndarray             # +1 above mu, -1 below, 0 numerically equal
    delta: float
    delta_raw: float
    argmin: tuple
    window: tuple | None
    tail: TailCertificate
    consts: SpectralConstants | None = None
    extra: dict = field(default_factory=dict)

    @property
    def k_max(self):
        return int(self.labels[-1])

    @property
    def in_spectrum(self):
        return self.delta == 0.0

    def index(self, j, k):
        i = np.nonzero(self.labels == k)[0]
        if i.size == 0 or not 0 <= abs(j) <= self.j_max:
            raise KeyError(f"mode ({j}, {k}) outside the table")
        return abs(int(j)), int(i[0])

    def value(self, j, k):
        return float(self.values[self.index(j, k)])

    def certificate(self):
        lo, hi = self.window if self.window is not None else (None, None)
        return {
            "delta": self.delta,
            "tail_floor": self.tail.floor,
            "window_lo": lo,
            "window_hi": hi,
            "admissible": bool(self.extra.get("admissible", False)),
            "mu": self.mu,
            "case": self.case,
            "j_max": self.j_max,
            "k_max": self.k_max,
            "argmin": list(self.argmin),
            "tail_conclusive": self.tail.conclusive,
        }

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["j", "k", "lambda_jk", "resonant", "sign_class"])
            for j in range(self.j_max + 1):
                for i, k in enumerate(self.labels):
                    w.writerow([j, int(k), repr(float(self.values[j, i])),
                                int(self.resonant[j, i]), int(self.sign[j, i])])

    def write_certificate(self, path):
        with open(path, "w") as fh:
            json.dump(self.certificate(), fh, indent=2)


def _equal_tol(mu):
    return SPECTRUM_RTOL * max(1.0, abs(mu))


def build_spectrum(basis: EigenBasis, period: PeriodSpec, mu: float, j_max: int,
                   consts: SpectralConstants | None = None) -> SpectrumTable:
    """Fill the table, locate the gap and certify the tail.

    An inconclusive tail is recorded on ``table.tail`` with a suggested larger
    truncation; ``admissible_mu`` turns it into an error.
    """
    mu = float(mu)
    j_max = int(j_max)
    if j_max < 0:
        raise ValueError("j_max must be non-negative")
    case = basis.case
    if consts is None:
        consts = spectral_constants(basis.coeff, basis.bc)
    labels = basis.labels.copy()
    lam_sq = basis.lam_sq.copy()
    j = np.arange(j_max + 1)
    values = lam_sq[None, :] - period.nu(j)[:, None] ** 2
    resonant = np.array([[is_resonant(jj, kk, period, case) for kk in labels] for jj in j])
    dist = np.abs(values - mu)
    flat = int(np.argmin(dist))
    jj, ii = np.unravel_index(flat, dist.shape)
    delta_raw = float(dist[jj, ii])
    tol = _equal_tol(mu)
    delta = 0.0 if delta_raw <= tol else delta_raw
    sign = np.where(dist <= tol, 0, np.sign(values - mu)).astype(np.int8)

    window = None
    if consts.positive and not (case == 5 and consts.robin is None):
        window = essential_window(consts, case)

    table = SpectrumTable(period, case, mu, j_max, labels, lam_sq, values, resonant, sign,
                          delta, delta_raw, (int(jj), int(labels[ii])), window, None, consts)
    table.tail = certify_tail(table)
    return table


def certify_tail(table: SpectrumTable, radius: float | None = None) -> TailCertificate:
    """Lower bound on the distance from ``mu`` to spectral points outside the table."""
    consts = table.consts
    if not consts.positive:
        return TailCertificate(0.0, False, table.k_max, 0.0)
    bounds = TailBounds(consts, table.case, table.period)
    if radius is None:
        radius = max(2.0 * table.delta_raw, 1.0)
    hits, complete, k_close = scan_tail(bounds, table.lam_sq, table.labels, table.j_max,
                                        table.mu, radius)
    floor, nearest = radius, None
    for j, k, lo, hi, src in hits:
        d = _distance(table.mu, lo, hi)
        if d < floor:
            floor, nearest = d, (j, k, src)
    conclusive = complete and floor >= table.delta_raw - _equal_tol(table.mu)
    suggested = None
    if not conclusive:
        jn = nearest[0] if nearest and nearest[0] is not None else table.j_max
        kn = nearest[1] if nearest else table.k_max
        suggested = (max(2 * table.j_max, jn + 1), max(2 * table.k_max, kn + 1))
    return TailCertificate(float(floor), bool(conclusive), int(k_close), float(radius),
                           nearest, suggested)


@dataclass
class AccumulationReport:
    window: tuple
    rows: list                # (j, k, value, upper_with_slack, excess, ok)
    max_violation: float
    max_excess: float
    passed: bool


def certify_accumulation(table: SpectrumTable, window=None, rtol: float = SPECTRUM_RTOL):
    """Check resonant values against the window, slackened by the squared upper theta bound.

    Resonant values ``theta_k (2 p_k + theta_k)`` may exceed the window top by
    at most ``theta_hi_k**2``, an ``O(1/k**2)`` slack.  Raises
    ``CertificationFailure`` on any value outside the slackened window.
    """
    consts = table.consts
    if not consts.positive:
        raise NonPositivePotential("potential infimum is not positive; refusing certification")
    if window is None:
        window = essential_window(consts, table.case)
    w_lo, w_hi = window
    case = table.case
    rows = []
    worst, excess_max = 0.0, 0.0
    for jj, ii in zip(*np.nonzero(table.resonant)):
        k = int(table.labels[ii])
        v = float(table.values[jj, ii])
        if case in (1, 4):
            slack = (consts.eta_mean2 / (2 * k)) ** 2
        elif case in HALF_INTEGER_CASES:
            slack = (consts.eta_mean2 / (2 * k + 1)) ** 2
        else:
            slack = (consts.robin / k) ** 2
        tol = rtol * max(1.0, float(table.lam_sq[ii]))
        excess = max(0.0, v - w_hi, w_lo - v)
        violation = max(0.0, v - (w_hi + slack) - tol, (w_lo - v) - tol)
        rows.append((int(jj), k, v, w_hi + slack, excess, violation == 0.0))
        worst = max(worst, violation)
        excess_max = max(excess_max, excess)
    report = AccumulationReport(tuple(window), rows, worst, excess_max, worst == 0.0)
    if not report.passed:
        raise CertificationFailure(
            f"resonant value outside the slackened window by {worst:.3g}")
    return report


@dataclass
class Admissibility:
    admissible: bool
    delta: float
    tail_floor: float
    reasons: list


def admissible_mu(consts: SpectralConstants, table: SpectrumTable, case: int | None = None):
    """Window test plus positive gap, backed by a conclusive tail certificate."""
    case = table.case if case is None else case
    mu = table.mu
    reasons = []
    if case == 5:
        if consts.robin is None:
            raise InvalidCase("case 5 needs both beta coefficients positive")
        if not mu > 2.0 * consts.robin:
            reasons.append(f"mu={mu} does not exceed the Robin threshold {2 * consts.robin:.6g}")
    elif not mu > consts.eta_mean2:
        reasons.append(f"mu={mu} does not exceed the mean threshold {consts.eta_mean2:.6g}")
    if table.delta == 0.0:
        j, k = table.argmin
        reasons.append(f"mu in spectrum: lambda_({j},{k}) = {table.values[table.index(j, k)]:.12g}")
    ok = not reasons
    if ok and not table.tail.conclusive:
        raise InconclusiveGap(
            f"tail floor {table.tail.floor:.6g} below table gap {table.delta:.6g}",
            suggested=table.tail.suggested)
    table.extra["admissible"] = ok
    return Admissibility(ok, table.delta, table.tail.floor, reasons)


def lambda_plus(l: int, table: SpectrumTable) -> float:
    """Smallest eigenvalue above ``mu`` among modes with ``k > l`` or ``|j| > l``.

    The table candidate is confirmed against the tail: no point outside the
    table may fall in ``(mu, candidate)``.
    """
    l = int(l)
    if l >= table.j_max or l >= table.k_max:
        raise InconclusiveGap(f"level {l} needs a truncation larger than "
                              f"({table.j_max}, {table.k_max})", suggested=(2 * l, 2 * l))
    outside = (np.arange(table.j_max + 1)[:, None] > l) | (table.labels[None, :] > l)
    above = outside & (table.sign > 0)
    if not above.any():
        raise InconclusiveGap("no eigenvalue above mu in the table")
    cand = float(np.min(table.values[above]))
    bounds = TailBounds(table.consts, table.case, table.period)
    hits, complete, _ = scan_tail(bounds, table.lam_sq, table.labels, table.j_max, table.mu,
                                  cand - table.mu)
    tol = _equal_tol(table.mu)
    for j, k, lo, hi, _src in hits:
        if hi > table.mu + tol and lo < cand - tol:
            raise InconclusiveGap(
                f"tail point near ({j}, {k}) may undercut lambda_plus={cand:.6g}",
                suggested=(2 * table.j_max, 2 * table.k_max))
    if not complete:
        raise InconclusiveGap("tail did not close", suggested=(2 * table.j_max, 2 * table.k_max))
    return cand


def multiplicities(table: SpectrumTable, tol: float = 1e-9):
    """Groups of modes sharing a value to ``tol``.

    Counts signed ``j``: each ``j > 0`` entry stands for the pair ``+-j``.
    Returns a list of ``(value, count, [(j, k), ...])`` sorted by value.
    """
    flat = [(float(table.values[j, i]), j, int(k))
            for j in range(table.j_max + 1) for i, k in enumerate(table.labels)]
    flat.sort()
    groups, cur = [], []
    for v, j, k in flat:
        if cur and abs(v - cur[0][0]) > tol:
            groups.append(cur)
            cur = []
        cur.append((v, j, k))
    if cur:
        groups.append(cur)
    out = []
    for g in groups:
        count = sum(2 if j else 1 for _, j, _ in g)
        out.append((float(np.mean([v for v, _, _ in g])), count, [(j, k) for _, j, k in g]))
    return out
