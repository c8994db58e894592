"""Working space of time-periodic fields.

A field is ``u(t, x) = sum_jk [c_jk cos(nu_j t) + s_jk sin(nu_j t)] w_j phi_k(x)``
with ``w_0 = T**-1/2`` and ``w_j = (2/T)**1/2`` for ``j >= 1`` (the sine row at
``j = 0`` is identically zero).  This is the real form of the complex
expansion ``sum alpha_jk T**-1/2 exp(i nu_j t) phi_k(x)`` with Hermitian
symmetry, and ``sum c**2 + s**2`` equals the complex coefficient sum.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .coefficient import PI
from .errors import AliasingError, DegenerateNorm, InconclusiveGap, TruncationError
from .spectrum import SpectrumTable, lambda_plus
from .sturm_liouville import EigenBasis

OVERSAMPLE = 4


@dataclass
class CoeffField:
    """Real coefficient array of shape ``(2, j_max + 1, n_labels)``; row 0 cosine, row 1 sine."""

    data: np.ndarray
    space: "WaveSpace"

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.shape != self.space.shape:
            raise ValueError(f"coefficient shape {self.data.shape} != {self.space.shape}")
        self.data[1, 0, :] = 0.0

    def copy(self):
        return CoeffField(self.data.copy(), self.space)

    def __add__(self, other):
        return CoeffField(self.data + other.data, self.space)

    def __sub__(self, other):
        return CoeffField(self.data - other.data, self.space)

    def __neg__(self):
        return CoeffField(-self.data, self.space)

    def __mul__(self, s):
        return CoeffField(self.data * float(s), self.space)

    __rmul__ = __mul__

    def to_dict(self):
        sp = self.space
        return {
            "truncation": [sp.j_max, sp.k_max],
            "labels": [int(k) for k in sp.labels],
            "mu": sp.mu,
            "period": [sp.period.a, sp.period.b],
            "case": sp.case,
            "cos": [float(v) for v in self.data[0].ravel()],
            "sin": [float(v) for v in self.data[1].ravel()],
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d, space: "WaveSpace"):
        if [space.j_max, space.k_max] != list(d["truncation"]):
            raise TruncationError(f"field truncation {d['truncation']} does not match the space")
        if abs(float(d["mu"]) - space.mu) > 0 or list(d["period"]) != [space.period.a,
                                                                          space.period.b]:
            raise ValueError("field was built for a different mu or period")
        shape = space.shape[1:]
        data = np.stack([np.reshape(d["cos"], shape), np.reshape(d["sin"], shape)])
        return cls(data, space)

    @classmethod
    def from_json(cls, text, space):
        return cls.from_dict(json.loads(text), space)


@dataclass
class GridField:
    """Values on the tensor grid ``t_i = i T / n_t`` by the basis nodes ``x_n``."""

    values: np.ndarray
    t: np.ndarray
    x: np.ndarray

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t\\x"] + [repr(float(v)) for v in self.x])
            for ti, row in zip(self.t, self.values):
                w.writerow([repr(float(ti))] + [repr(float(v)) for v in row])

    @classmethod
    def read_csv(cls, path):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        x = np.array([float(v) for v in rows[0][1:]])
        body = np.array([[float(v) for v in r] for r in rows[1:]])
        return cls(body[:, 1:], body[:, 0], x)


class WaveSpace:
    """Truncated working space over an eigenbasis and a spectrum table.

    Holds the transform matrices for the pseudospectral pair and the masks
    for the subspaces used by the variational problem.
    """

    def __init__(self, basis: EigenBasis, table: SpectrumTable, j_max: int | None = None,
                 k_max: int | None = None, n_t: int | None = None):
        j_max = table.j_max if j_max is None else int(j_max)
        k_max = table.k_max if k_max is None else int(k_max)
        if j_max > table.j_max or k_max > min(table.k_max, basis.max_label):
            raise TruncationError(
                f"space truncation ({j_max}, {k_max}) exceeds table "
                f"({table.j_max}, {table.k_max})")
        self.basis = basis
        self.table = table
        self.period = table.period
        self.case = table.case
        self.mu = float(table.mu)
        self.j_max = j_max
        keep = basis.labels <= k_max
        self.labels = basis.labels[keep]
        self.k_max = int(self.labels[-1])
        tcols = np.searchsorted(table.labels, self.labels)
        self.lam = table.values[: j_max + 1][:, tcols]
        self.shift = self.lam - self.mu
        self.sign = table.sign[: j_max + 1][:, tcols]
        self.resonant = table.resonant[: j_max + 1][:, tcols]
        self.shape = (2, j_max + 1, self.labels.size)

        n_t = OVERSAMPLE * (2 * j_max + 1) if n_t is None else int(n_t)
        if n_t < OVERSAMPLE * (2 * j_max + 1):
            raise AliasingError(
                f"n_t={n_t} below {OVERSAMPLE} x (2 j_max + 1) = {OVERSAMPLE * (2 * j_max + 1)}")
        self.n_t = n_t
        T = self.period.T
        self.t = np.arange(n_t) * (T / n_t)
        nu = self.period.nu(np.arange(j_max + 1))
        amp = np.full(j_max + 1, math.sqrt(2.0 / T))
        amp[0] = 1.0 / math.sqrt(T)
        arg = np.outer(self.t, nu)
        # time basis: columns cos_0..cos_J, sin_0..sin_J
        self.time_basis = np.hstack([np.cos(arg) * amp, np.sin(arg) * amp])
        self.time_basis[:, j_max + 1] = 0.0
        self.wt = T / n_t
        self.x = basis.x
        self.rho = basis.coeff.rho(self.x)
        cols = np.searchsorted(basis.labels, self.labels)
        self.space_basis = basis.physical()[:, cols]
        self.wx = basis.h * basis.weights * self.rho
        self._analyze_t = (self.time_basis * self.wt).T
        self._analyze_x = self.space_basis * self.wx[:, None]
        self.valid = np.ones(self.shape, dtype=bool)
        self.valid[1, 0, :] = False

    # construction helpers -------------------------------------------------
    def zeros(self):
        return CoeffField(np.zeros(self.shape), self)

    def field(self, data):
        return CoeffField(np.array(data, dtype=float), self)

    def mode(self, j, k, value=1.0, part="cos"):
        u = self.zeros()
        i = int(np.nonzero(self.labels == k)[0][0])
        u.data[0 if part == "cos" else 1, j, i] = value
        return u

    def random(self, rng, mask=None, scale=1.0):
        data = rng.standard_normal(self.shape) * scale
        data[~self.valid] = 0.0
        if mask is not None:
            data[~mask] = 0.0
        return CoeffField(data, self)

    # masks ----------------------------------------------------------------
    def _broadcast(self, m2):
        return np.broadcast_to(m2, self.shape) & self.valid

    def _check_index(self, m):
        if m > self.j_max or m > self.k_max:
            raise TruncationError(f"index {m} exceeds truncation ({self.j_max}, {self.k_max})")

    def plus_mask(self):
        return self._broadcast(self.sign > 0)

    def minus_mask(self):
        return self._broadcast(self.sign < 0)

    def box_mask(self, m):
        self._check_index(m)
        j = np.arange(self.j_max + 1)[:, None]
        return self._broadcast((j <= m) & (self.labels[None, :] <= m))

    def galerkin_mask(self, m):
        """``(box_m & minus) | plus``."""
        return (self.box_mask(m) & self.minus_mask()) | self.plus_mask()

    def level_mask(self, l):
        """``minus | (box_l & plus)``."""
        return self.minus_mask() | (self.box_mask(l) & self.plus_mask())

    def level_complement_mask(self, l):
        return self.plus_mask() & ~self.box_mask(l)

    def subspace_mask(self, which, index=None):
        if which == "box":
            return self.box_mask(index)
        if which == "galerkin":
            return self.galerkin_mask(index)
        if which == "level":
            return self.level_mask(index)
        if which == "level_complement":
            return self.level_complement_mask(index)
        if which == "plus":
            return self.plus_mask()
        if which == "minus":
            return self.minus_mask()
        if which == "resonant":
            return self._broadcast(self.resonant)
        raise ValueError(f"unknown subspace {which!r}")

    # transforms -----------------------------------------------------------
    def _stack(self, data):
        return data.reshape(2 * (self.j_max + 1), -1)

    def synthesize(self, u: CoeffField) -> GridField:
        return GridField(self.synthesize_array(u.data), self.t, self.x)

    def synthesize_array(self, data):
        return self.time_basis @ self._stack(data) @ self.space_basis.T

    def analyze(self, g: GridField | np.ndarray) -> CoeffField:
        return CoeffField(self.analyze_array(g), self)

    def analyze_array(self, g):
        vals = g.values if isinstance(g, GridField) else g
        if vals.shape != (self.n_t, self.x.size):
            raise ValueError(f"grid shape {vals.shape} != {(self.n_t, self.x.size)}")
        out = (self._analyze_t @ vals @ self._analyze_x).reshape(self.shape)
        out[1, 0, :] = 0.0
        return out

    def with_time_samples(self, n_t):
        return WaveSpace(self.basis, self.table, self.j_max, self.k_max, n_t)

    # norms ----------------------------------------------------------------
    def e_weight(self):
        if np.any(self.sign == 0):
            raise DegenerateNorm("mu coincides with a table eigenvalue; the E-norm degenerates")
        return np.broadcast_to(np.abs(self.shift), self.shape)

    def lr_integral(self, g, r):
        vals = g.values if isinstance(g, GridField) else g
        return float(self.wt * np.sum(np.abs(vals) ** r @ self.wx))


def e_norm(u: CoeffField) -> float:
    """``(sum |lam_jk - mu| |alpha_jk|**2) ** 1/2``."""
    w = u.space.e_weight()
    return float(math.sqrt(np.sum(w * u.data**2)))


def l2_norm(u: CoeffField) -> float:
    return float(math.sqrt(np.sum(u.data**2)))


def split_pm(u: CoeffField):
    sp = u.space
    plus = np.where(sp.plus_mask(), u.data, 0.0)
    return CoeffField(plus, sp), CoeffField(u.data - plus, sp)


def resonant_part(u: CoeffField) -> CoeffField:
    """Modes with ``k a = |j| b`` (exact integer test)."""
    return project_subspace(u, "resonant")


def project_subspace(u: CoeffField, which: str, index: int | None = None) -> CoeffField:
    """Zero every coefficient outside the named subspace.

    ``which`` is one of ``box`` (``|j|, k <= m``), ``galerkin``
    (``(box_m & minus) + plus``), ``level`` (``minus + (box_l & plus)``),
    ``level_complement``, ``plus``, ``minus`` or ``resonant``.
    """
    mask = u.space.subspace_mask(which, index)
    return CoeffField(np.where(mask, u.data, 0.0), u.space)


def synthesize(u: CoeffField, n_t: int | None = None) -> GridField:
    sp = u.space if n_t is None or n_t == u.space.n_t else u.space.with_time_samples(n_t)
    return sp.synthesize(CoeffField(u.data, sp))


def analyze(g: GridField, space: WaveSpace) -> CoeffField:
    if g.values.shape[0] != space.n_t:
        space = space.with_time_samples(g.values.shape[0])
    return space.analyze(g)


def weighted_lr_norm(g: GridField, r: float, space: WaveSpace) -> float:
    """``(int |u|**r rho dt dx) ** (1/r)`` by trapezoid in time and grid weights in space."""
    if r < 1:
        raise ValueError("r must be at least 1")
    return space.lr_integral(g, r) ** (1.0 / r)


def shift_time(u: CoeffField, s: float) -> CoeffField:
    """Coefficients of ``u(t + s, x)``."""
    nu = u.space.period.nu(np.arange(u.space.j_max + 1))[:, None]
    c, sn = u.data
    cs, ss = np.cos(nu * s), np.sin(nu * s)
    return CoeffField(np.stack([c * cs + sn * ss, -c * ss + sn * cs]), u.space)


def reverse_time(u: CoeffField) -> CoeffField:
    """Coefficients of ``u(-t, x)``."""
    return CoeffField(np.stack([u.data[0], -u.data[1]]), u.space)


def zeta_bound(l: int, table: SpectrumTable, p: float, beta0: float) -> float:
    """``C**(1 - th) / (lam_plus - mu)**(th / 2)`` with ``th = 2p/(p+1)``.

    ``C = (beta0 T pi)**1/2 delta**-1/2`` bounds the weighted ``L**1`` norm by
    the E-norm through Cauchy-Schwarz and the gap.
    """
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    if table.delta <= 0:
        raise DegenerateNorm("zero spectral gap")
    th = 2.0 * p / (p + 1.0)
    C = embedding_constant(table, beta0)
    gap = lambda_plus(l, table) - table.mu
    if gap <= 0:
        raise InconclusiveGap("lambda_plus not above mu")
    return C ** (1.0 - th) / gap ** (th / 2.0)


def embedding_constant(table: SpectrumTable, beta0: float) -> float:
    return math.sqrt(beta0 * table.period.T * PI) / math.sqrt(table.delta)
