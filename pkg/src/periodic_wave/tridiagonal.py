"""Symmetric tridiagonal eigenvalues by Sturm counts and inverse iteration."""

import numpy as np
from scipy.linalg import solve_banded

from .errors import NumericError

_TINY = np.finfo(float).tiny
_EPS = np.finfo(float).eps


def sturm_count(diag, off, shifts):
    """Number of eigenvalues strictly below each shift.

    Uses the LDL^T pivot recurrence; the loop runs over rows and is
    vectorised over shifts.
    """
    shifts = np.asarray(shifts, dtype=float)
    off2 = np.asarray(off, dtype=float) ** 2
    q = diag[0] - shifts
    count = (q < 0).astype(np.int64)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        for i in range(1, diag.size):
            q = np.where(q == 0.0, -_TINY, q)
            q = (diag[i] - shifts) - off2[i - 1] / q
            count += q < 0
    return count


def gershgorin(diag, off):
    r = np.abs(off)
    rad = np.zeros_like(diag)
    rad[:-1] += r
    rad[1:] += r
    return float(np.min(diag - rad)), float(np.max(diag + rad))


def eigvalsh_tridiagonal_index(diag, off, indices, rtol=1e-13, points=31, max_steps=80):
    """Eigenvalues with the given 0-based indices (ascending order).

    Each eigenvalue is bracketed by multisection: every sweep evaluates
    ``points`` interior Sturm counts per target and keeps the subinterval
    holding the wanted index.  Stops at relative width ``rtol`` or when the
    bracket is a few ulps wide.

    Returns ``(values, lower, upper)``.
    """
    diag = np.asarray(diag, dtype=float)
    off = np.asarray(off, dtype=float)
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= diag.size):
        raise ValueError("eigenvalue index out of range")
    lo0, hi0 = gershgorin(diag, off)
    scale = max(abs(lo0), abs(hi0))
    pad = 8.0 * _EPS * scale
    # absolute floor so that exact zero eigenvalues terminate
    floor = _EPS * _EPS * scale + _TINY
    n = idx.size
    lo = np.full(n, lo0 - pad)
    hi = np.full(n, hi0 + pad)
    frac = np.arange(1, points + 1) / (points + 1.0)
    rows = np.arange(n)
    for _ in range(max_steps):
        width = hi - lo
        mag = np.maximum(np.abs(lo), np.abs(hi))
        done = width <= np.maximum(rtol * mag, 4.0 * _EPS * mag + floor)
        if done.all():
            break
        act = ~done
        pts = lo[act, None] + width[act, None] * frac[None, :]
        cnt = sturm_count(diag, off, pts.ravel()).reshape(pts.shape)
        above = cnt > idx[act, None]
        has = above.any(axis=1)
        first = np.argmax(above, axis=1)
        r = rows[: act.sum()]
        new_hi = np.where(has, pts[r, first], hi[act])
        below = np.where(has, first - 1, points - 1)
        new_lo = np.where(below >= 0, pts[r, np.maximum(below, 0)], lo[act])
        lo[act] = new_lo
        hi[act] = new_hi
    else:
        width = hi - lo
        mag = np.maximum(np.abs(lo), np.abs(hi))
        bad = width > np.maximum(rtol * mag, 4.0 * _EPS * mag + floor)
        if bad.any():
            i = int(np.argmax(bad))
            raise NumericError(
                f"bisection did not converge for eigenvalue index {int(idx[i])}",
                interval=(float(lo[i]), float(hi[i])),
            )
    return 0.5 * (lo + hi), lo, hi


def inverse_iteration(diag, off, values, iters=3, seed=0):
    """Unit eigenvectors for the given eigenvalues, orthonormalised.

    Columns are computed by shifted solves with a slightly perturbed shift,
    then made mutually orthogonal by two passes of modified Gram-Schmidt.
    """
    n = diag.size
    vals = np.asarray(values, dtype=float)
    rng = np.random.default_rng(seed)
    scale = max(np.max(np.abs(diag)), 1.0)
    vecs = np.empty((n, vals.size))
    ab = np.zeros((3, n))
    ab[0, 1:] = off
    ab[2, :-1] = off
    for c, lam in enumerate(vals):
        shift = lam + 4.0 * _EPS * scale
        ab[1] = diag - shift
        v = rng.standard_normal(n)
        v /= np.linalg.norm(v)
        for _ in range(iters):
            w = solve_banded((1, 1), ab, v, check_finite=False)
            nrm = np.linalg.norm(w)
            if not np.isfinite(nrm) or nrm == 0:
                raise NumericError(f"inverse iteration failed near {lam!r}")
            v = w / nrm
        vecs[:, c] = v
    for _ in range(2):
        for c in range(vals.size):
            v = vecs[:, c]
            if c:
                v -= vecs[:, :c] @ (vecs[:, :c].T @ v)
            vecs[:, c] = v / np.linalg.norm(v)
    return vecs


def richardson(coarse, fine, order=2, ratio=2.0):
    """Eliminate the leading ``h**order`` term from two grid values."""
    f = ratio**order
    return (f * np.asarray(fine) - np.asarray(coarse)) / (f - 1.0)
