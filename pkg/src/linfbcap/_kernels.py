"""Hot numeric kernels with optional numba acceleration.

Three inner loops dominate region construction: the quartic bisection for
the optimal input correlation, pentagon-corner generation over parameter
grids, and the Pareto staircase filter.  Each has a numba ``@njit`` version
and a vectorized pure-numpy fallback.  The active backend is chosen at
import time: set ``LINFB_PURE_NUMPY=1`` to force the numpy path even when
numba is installed.  ``LINFB_THREADS`` caps the numba thread pool.

Both implementations of every kernel stay importable (``*_numba`` /
``*_numpy``) so the benchmark and the agreement tests can compare them
directly.
"""

import os

import numpy as np

_TRUTHY = {"1", "true", "yes", "on"}

PURE_NUMPY = os.environ.get("LINFB_PURE_NUMPY", "").strip().lower() in _TRUTHY

try:
    import numba
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and not PURE_NUMPY

if HAS_NUMBA:
    _threads = os.environ.get("LINFB_THREADS", "").strip()
    if _threads.isdigit() and int(_threads) >= 1:
        try:
            numba.set_num_threads(min(int(_threads), numba.config.NUMBA_NUM_THREADS))
        except ValueError:
            pass

# Bisection iteration cap; the bracket collapses to machine precision long
# before this, the loops stop early once lo and hi become adjacent doubles.
_MAX_BISECT = 200


def backend_name():
    return "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# rho-star bisection: solve, per element,
#   1 + a + b + 2*sqrt(a*b)*rho = (1 + a*(1-rho^2)) * (1 + b*(1-rho^2))
# for rho in [0, 1], where a = h1^2*P1 and b = h2^2*P2.  The left side minus
# the right side is increasing on [0, 1], negative at 0 and positive at 1,
# so the bracket never fails.  Degenerate a*b == 0 returns 0.
# ---------------------------------------------------------------------------


def _quartic_gap_numpy(rho, a, b, c):
    lhs = 1.0 + a + b + c * rho
    s = 1.0 - rho * rho
    return lhs - (1.0 + a * s) * (1.0 + b * s)


def rho_star_grid_numpy(a, b):
    """Vectorized bisection + one Newton polish over arrays of a, b."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    c = 2.0 * np.sqrt(a * b)
    lo = np.zeros(a.shape)
    hi = np.ones(a.shape)
    for _ in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        neg = _quartic_gap_numpy(mid, a, b, c) < 0.0
        lo = np.where(neg, mid, lo)
        hi = np.where(neg, hi, mid)
        if np.all(hi - lo <= 4.0 * np.finfo(np.float64).eps):
            break
    rho = 0.5 * (lo + hi)
    s = 1.0 - rho * rho
    gap = (1.0 + a + b + c * rho) - (1.0 + a * s) * (1.0 + b * s)
    slope = c + 2.0 * rho * (a * (1.0 + b * s) + b * (1.0 + a * s))
    with np.errstate(divide="ignore", invalid="ignore"):
        step = np.where(slope > 0.0, gap / np.where(slope > 0.0, slope, 1.0), 0.0)
    rho = np.clip(rho - step, 0.0, 1.0)
    return np.where(a * b == 0.0, 0.0, rho)


def _rho_star_grid_loop(a, b, out):
    eps4 = 4.0 * 2.220446049250313e-16
    for k in range(a.shape[0]):
        ak = a[k]
        bk = b[k]
        if ak * bk == 0.0:
            out[k] = 0.0
            continue
        ck = 2.0 * np.sqrt(ak * bk)
        lo = 0.0
        hi = 1.0
        for _ in range(_MAX_BISECT):
            mid = 0.5 * (lo + hi)
            s = 1.0 - mid * mid
            gap = (1.0 + ak + bk + ck * mid) - (1.0 + ak * s) * (1.0 + bk * s)
            if gap < 0.0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= eps4:
                break
        rho = 0.5 * (lo + hi)
        s = 1.0 - rho * rho
        gap = (1.0 + ak + bk + ck * rho) - (1.0 + ak * s) * (1.0 + bk * s)
        slope = ck + 2.0 * rho * (ak * (1.0 + bk * s) + bk * (1.0 + ak * s))
        if slope > 0.0:
            rho -= gap / slope
        if rho < 0.0:
            rho = 0.0
        elif rho > 1.0:
            rho = 1.0
        out[k] = rho
    return out


if HAS_NUMBA:
    _rho_star_grid_jit = njit(cache=True)(_rho_star_grid_loop)

    def rho_star_grid_numba(a, b):
        a = np.ascontiguousarray(np.asarray(a, dtype=np.float64).ravel())
        b = np.ascontiguousarray(np.asarray(b, dtype=np.float64).ravel())
        out = np.empty_like(a)
        _rho_star_grid_jit(a, b, out)
        return out


def rho_star_grid(a, b):
    """Per-element optimal correlation for arrays a = h1^2*P1, b = h2^2*P2."""
    shape = np.asarray(a, dtype=np.float64).shape
    if USE_NUMBA:
        return rho_star_grid_numba(a, b).reshape(shape)
    return rho_star_grid_numpy(a, b).reshape(shape)


# ---------------------------------------------------------------------------
# Pentagon corners.  For rate bounds r1, r2, rsum (rsum >= max(r1, r2)) the
# Pareto corners are (r1, min(r2, rsum - r1)) and (min(r1, rsum - r2), r2);
# when r1 + r2 <= rsum both collapse to the rectangle corner (r1, r2).
# ---------------------------------------------------------------------------

_HALF_LOG2E = 0.5 / np.log(2.0)


def pentagon_corners_numpy(a, b, s):
    """Corners of pentagons with individual SNRs a, b and sum-SNR s.

    Rates are 0.5*log2(1 + snr).  Returns a (2n, 2) array.
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    s = np.asarray(s, dtype=np.float64).ravel()
    r1 = _HALF_LOG2E * np.log1p(a)
    r2 = _HALF_LOG2E * np.log1p(b)
    rsum = _HALF_LOG2E * np.log1p(s)
    out = np.empty((2 * a.shape[0], 2))
    out[0::2, 0] = r1
    out[0::2, 1] = np.minimum(r2, rsum - r1)
    out[1::2, 0] = np.minimum(r1, rsum - r2)
    out[1::2, 1] = r2
    return out


def _pentagon_corners_loop(a, b, s, out):
    half = 0.5 / np.log(2.0)
    for k in range(a.shape[0]):
        r1 = half * np.log1p(a[k])
        r2 = half * np.log1p(b[k])
        rsum = half * np.log1p(s[k])
        out[2 * k, 0] = r1
        out[2 * k, 1] = min(r2, rsum - r1)
        out[2 * k + 1, 0] = min(r1, rsum - r2)
        out[2 * k + 1, 1] = r2
    return out


if HAS_NUMBA:
    _pentagon_corners_jit = njit(cache=True)(_pentagon_corners_loop)

    def pentagon_corners_numba(a, b, s):
        a = np.ascontiguousarray(np.asarray(a, dtype=np.float64).ravel())
        b = np.ascontiguousarray(np.asarray(b, dtype=np.float64).ravel())
        s = np.ascontiguousarray(np.asarray(s, dtype=np.float64).ravel())
        out = np.empty((2 * a.shape[0], 2))
        _pentagon_corners_jit(a, b, s, out)
        return out


def pentagon_corners(a, b, s):
    if USE_NUMBA:
        return pentagon_corners_numba(a, b, s)
    return pentagon_corners_numpy(a, b, s)


# ---------------------------------------------------------------------------
# Pareto staircase filter.  Sort by R1 descending (R2 descending within
# ties) and keep points whose R2 strictly exceeds the running maximum; the
# survivors are exactly the points not componentwise dominated.
# ---------------------------------------------------------------------------


def pareto_filter_numpy(points, tol=1e-12):
    pts = np.asarray(points, dtype=np.float64)
    if pts.size == 0:
        return pts.reshape(0, 2)
    order = np.lexsort((-pts[:, 1], -pts[:, 0]))
    sorted_pts = pts[order]
    r2 = sorted_pts[:, 1]
    running = np.maximum.accumulate(r2)
    keep = np.empty(r2.shape[0], dtype=bool)
    keep[0] = True
    keep[1:] = r2[1:] > running[:-1]
    kept = sorted_pts[keep][::-1]
    if kept.shape[0] > 1 and tol > 0.0:
        d = np.abs(np.diff(kept, axis=0))
        distinct = np.concatenate(([True], (d[:, 0] > tol) | (d[:, 1] > tol)))
        kept = kept[distinct]
    return np.ascontiguousarray(kept)


def _pareto_mask_loop(r1, r2, order, keep):
    best = -np.inf
    for idx in range(order.shape[0]):
        j = order[idx]
        if r2[j] > best:
            keep[j] = True
            best = r2[j]
        else:
            keep[j] = False


if HAS_NUMBA:
    _pareto_mask_jit = njit(cache=True)(_pareto_mask_loop)

    def pareto_filter_numba(points, tol=1e-12):
        pts = np.asarray(points, dtype=np.float64)
        if pts.size == 0:
            return pts.reshape(0, 2)
        order = np.lexsort((-pts[:, 1], -pts[:, 0]))
        keep = np.empty(pts.shape[0], dtype=np.bool_)
        _pareto_mask_jit(
            np.ascontiguousarray(pts[:, 0]), np.ascontiguousarray(pts[:, 1]),
            order, keep,
        )
        kept = pts[keep]
        kept = kept[np.lexsort((kept[:, 1], kept[:, 0]))]
        if kept.shape[0] > 1 and tol > 0.0:
            d = np.abs(np.diff(kept, axis=0))
            distinct = np.concatenate(([True], (d[:, 0] > tol) | (d[:, 1] > tol)))
            kept = kept[distinct]
        return np.ascontiguousarray(kept)


def pareto_filter(points, tol=1e-12):
    """Drop componentwise-dominated rate pairs; result sorted by ascending R1."""
    if USE_NUMBA:
        return pareto_filter_numba(points, tol)
    return pareto_filter_numpy(points, tol)


def warmup():
    """Trigger JIT compilation of every kernel (no-op on the numpy path)."""
    a = np.array([1.0, 2.0])
    rho_star_grid(a, a)
    pentagon_corners(a, a, 2.0 * a)
    pareto_filter(np.array([[0.1, 0.2], [0.2, 0.1], [0.05, 0.05]]))
