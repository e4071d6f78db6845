"""Scalar-channel capacity quantities and rate-region construction.

Covers the optimal-correlation quartic, sum-power pentagon unions for the
two-user scalar multiple-access channel with perfect feedback, the MISO
and SIMO reductions, the K-user symmetric fixed point, and the
no-feedback degraded broadcast baseline.  Rates are bits per channel use
(base-2 logs) throughout.
"""

import hashlib

import numpy as np

from . import _kernels
from .exceptions import NoRootInIntervalError, ZeroVectorError
from .frontier import RegionFrontier

__all__ = [
    "rho_star",
    "rho_star_residual",
    "ozarow_pentagon",
    "mac_siso_region",
    "mac_siso_sum_capacity",
    "symmetric_sum_capacity",
    "zeta",
    "miso_mac_region",
    "simo_mac_region",
    "phi_k",
    "k_user_symmetric_sum_capacity",
    "nofb_bc_siso_region",
]

_LOG2 = np.log(2.0)


def _half_log2(x):
    return 0.5 * np.log1p(x) / _LOG2


def rho_star(h1, h2, p1, p2):
    """Optimal input correlation for gains h1, h2 and powers p1, p2.

    The unique solution in [0, 1] of
    1 + a + b + 2*sqrt(a*b)*rho = (1 + a*(1-rho^2))*(1 + b*(1-rho^2))
    with a = h1^2*p1 and b = h2^2*p2.  Degenerate inputs with a*b = 0
    return 0, matching the no-cooperation limit.
    """
    if p1 < 0 or p2 < 0:
        raise ValueError("powers must be nonnegative")
    a = float(h1) ** 2 * float(p1)
    b = float(h2) ** 2 * float(p2)
    return float(_kernels.rho_star_grid(np.array([a]), np.array([b]))[0])


def rho_star_residual(h1, h2, p1, p2, rho):
    """Relative defect of the correlation quartic at the given rho."""
    a = float(h1) ** 2 * float(p1)
    b = float(h2) ** 2 * float(p2)
    lhs = 1.0 + a + b + 2.0 * np.sqrt(a * b) * rho
    s = 1.0 - rho * rho
    rhs = (1.0 + a * s) * (1.0 + b * s)
    return abs(lhs - rhs) / (1.0 + abs(lhs))


def _region_meta(model, h1, h2, power, **extra):
    digest = hashlib.sha256(
        f"{model}|{h1!r}|{h2!r}|{power!r}".encode()
    ).hexdigest()[:16]
    meta = {"model": model, "h1": h1, "h2": h2, "power": power,
            "spec_digest": digest}
    meta.update(extra)
    return meta


def ozarow_pentagon(h1, h2, p1, p2, rho):
    """Frontier of a single feedback pentagon at correlation rho."""
    if not 0.0 <= rho <= 1.0:
        raise ValueError("rho must lie in [0, 1]")
    a = np.array([float(h1) ** 2 * float(p1)])
    b = np.array([float(h2) ** 2 * float(p2)])
    s = a + b + 2.0 * np.sqrt(a * b) * rho
    shrink = 1.0 - rho * rho
    corners = _kernels.pentagon_corners(a * shrink, b * shrink, s)
    meta = _region_meta("pentagon", h1, h2, p1 + p2, p1=p1, p2=p2, rho=rho)
    return RegionFrontier.from_points(corners, meta)


def _ozarow_corner_cloud(g1sq, g2sq, power, alpha_grid, rho_grid, refine,
                         include_rho_star=True):
    """Pentagon corners of the sum-power union, stacked as one array.

    Collects the alpha x rho product grid, the per-split optimal
    correlation (the only rho whose pentagon touches the max-sum point),
    and, when ``refine`` >= 2, two dense extra sweeps of splits with
    rho in {0, rho*}: a uniform one and one whose splits are the images
    of the superposition baseline, so the no-feedback boundary is hit
    exactly rather than chorded.
    """
    alphas = np.linspace(0.0, 1.0, alpha_grid)
    a0 = g1sq * alphas * power
    b0 = g2sq * (1.0 - alphas) * power
    rhos = np.linspace(0.0, 1.0, rho_grid)

    am = np.repeat(a0, rho_grid)
    bm = np.repeat(b0, rho_grid)
    rm = np.tile(rhos, alpha_grid)
    parts_a = [am]
    parts_b = [bm]
    parts_r = [rm]

    def add_split_family(a_vals, b_vals, with_star):
        parts_a.append(a_vals)
        parts_b.append(b_vals)
        parts_r.append(np.zeros_like(a_vals))
        if with_star:
            parts_a.append(a_vals)
            parts_b.append(b_vals)
            parts_r.append(_kernels.rho_star_grid(a_vals, b_vals))

    if include_rho_star:
        add_split_family(a0, b0, True)

    if refine >= 2:
        fine = np.linspace(0.0, 1.0, refine)
        add_split_family(g1sq * fine * power, g2sq * (1.0 - fine) * power,
                         include_rho_star)
        if g1sq > 0.0 and g2sq > 0.0:
            wsq = min(g1sq, g2sq)
            p_weak = (1.0 - fine) * power / (1.0 + wsq * fine * power)
            p_strong = power - p_weak
            if g1sq <= g2sq:
                add_split_family(g1sq * p_weak, g2sq * p_strong, include_rho_star)
            else:
                add_split_family(g1sq * p_strong, g2sq * p_weak, include_rho_star)

    a = np.concatenate(parts_a)
    b = np.concatenate(parts_b)
    r = np.concatenate(parts_r)
    s = a + b + 2.0 * np.sqrt(a * b) * r
    shrink = 1.0 - r * r
    return _kernels.pentagon_corners(a * shrink, b * shrink, s)


def mac_siso_region(h1, h2, power, alpha_grid=129, rho_grid=129, *,
                    refine=8193, include_rho_star=True, meta_extra=None):
    """Feedback capacity region of the scalar sum-power uplink.

    Pareto frontier of the union over power splits and correlations of
    the feedback pentagons.
    """
    if power <= 0:
        raise ValueError("power must be positive")
    if alpha_grid < 1 or rho_grid < 1:
        raise ValueError("grids must be >= 1")
    g1sq = float(h1) ** 2
    g2sq = float(h2) ** 2
    corners = _ozarow_corner_cloud(g1sq, g2sq, float(power), alpha_grid,
                                   rho_grid, refine, include_rho_star)
    meta = _region_meta("siso", h1, h2, power, alpha_grid=alpha_grid,
                        rho_grid=rho_grid, refine=refine)
    if meta_extra:
        meta.update(meta_extra)
    return RegionFrontier.from_points(corners, meta)


def _sum_rate_at_split(g1sq, g2sq, power, alphas):
    a = g1sq * alphas * power
    b = g2sq * (1.0 - alphas) * power
    rho = _kernels.rho_star_grid(a, b)
    return _half_log2(a + b + 2.0 * np.sqrt(a * b) * rho)


_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def mac_siso_sum_capacity(h1, h2, power, coarse=129, tol=1e-10):
    """Largest feedback sum rate of the scalar sum-power uplink.

    Coarse-grid seeding followed by golden-section refinement of the
    power split; the grid guards against the (unproven here)
    non-unimodality of the objective.
    """
    if power <= 0:
        raise ValueError("power must be positive")
    g1sq = float(h1) ** 2
    g2sq = float(h2) ** 2
    alphas = np.linspace(0.0, 1.0, coarse)
    vals = _sum_rate_at_split(g1sq, g2sq, power, alphas)
    k = int(np.argmax(vals))
    best = float(vals[k])
    lo = alphas[max(k - 1, 0)]
    hi = alphas[min(k + 1, coarse - 1)]

    def f(alpha):
        return float(_sum_rate_at_split(g1sq, g2sq, power, np.array([alpha]))[0])

    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = f(x1)
    return max(best, f1, f2)


def symmetric_sum_capacity(h, power):
    """Closed-form feedback sum capacity for equal gains and equal split."""
    if power <= 0:
        raise ValueError("power must be positive")
    hsq = float(h) ** 2
    if hsq == 0.0:
        return 0.0
    rho = rho_star(h, h, power / 2.0, power / 2.0)
    return _half_log2(hsq * power * (1.0 + rho))


def zeta(alpha, h, power):
    """sqrt(alpha*(1-alpha)) times the optimal correlation at that split."""
    al = np.asarray(alpha, dtype=np.float64)
    if np.any(al < 0.0) or np.any(al > 1.0):
        raise ValueError("alpha must lie in [0, 1]")
    hsq = float(h) ** 2
    a = hsq * al * power
    b = hsq * (1.0 - al) * power
    rho = _kernels.rho_star_grid(a, b)
    out = np.sqrt(al * (1.0 - al)) * rho
    return out if out.ndim else float(out)


def _norm_or_raise(vec, name):
    v = np.asarray(vec, dtype=np.float64).ravel()
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise ZeroVectorError(f"{name} must be a nonzero vector")
    return n


def miso_mac_region(h1vec, h2vec, power, alpha_grid=129, rho_grid=129, *,
                    refine=8193):
    """Multi-antenna-transmitter uplink region; reduces to the scalar one.

    Only the Euclidean norms of the channel vectors enter the region.
    """
    n1 = _norm_or_raise(h1vec, "h1vec")
    n2 = _norm_or_raise(h2vec, "h2vec")
    region = mac_siso_region(n1, n2, power, alpha_grid, rho_grid, refine=refine)
    region.meta.update(_region_meta("miso", list(np.ravel(h1vec)),
                                    list(np.ravel(h2vec)), power,
                                    alpha_grid=alpha_grid, rho_grid=rho_grid,
                                    refine=refine))
    return region


def simo_mac_region(h1vec, h2vec, power, alpha_grid=65, rho_grid=65,
                    beta_grid=65, *, refine=2049):
    """Single-antenna-transmitters, multi-antenna-receiver uplink region.

    Union over power splits, the correlation rho in [0, 1], and the
    cross-term coefficient beta in [-1, 1].  At beta = 1 the pentagons
    coincide with the scalar feedback pentagons, so the scalar corner
    cloud (including its optimal-correlation sweep) is merged in.
    """
    if power <= 0:
        raise ValueError("power must be positive")
    if alpha_grid < 2 or rho_grid < 2 or beta_grid < 2:
        raise ValueError("grids must be >= 2")
    g1sq = _norm_or_raise(h1vec, "h1vec") ** 2
    g2sq = _norm_or_raise(h2vec, "h2vec") ** 2

    alphas = np.linspace(0.0, 1.0, alpha_grid)
    rhos = np.linspace(0.0, 1.0, rho_grid)
    betas = np.linspace(-1.0, 1.0, beta_grid)
    al, rh, be = np.meshgrid(alphas, rhos, betas, indexing="ij")
    a = (g1sq * al * power).ravel()
    b = (g2sq * (1.0 - al) * power).ravel()
    rh = rh.ravel()
    be = be.ravel()
    s = (a + b + 2.0 * rh * be * np.sqrt(a * b)
         + a * b * (1.0 - rh * rh) * (1.0 - be * be))
    shrink = 1.0 - rh * rh
    corners = _kernels.pentagon_corners(a * shrink, b * shrink, s)
    ozarow = _ozarow_corner_cloud(g1sq, g2sq, float(power), alpha_grid,
                                  rho_grid, refine)
    meta = _region_meta("simo", list(np.ravel(h1vec)), list(np.ravel(h2vec)),
                        power, alpha_grid=alpha_grid, rho_grid=rho_grid,
                        beta_grid=beta_grid, refine=refine)
    return RegionFrontier.from_points(np.vstack([corners, ozarow]), meta)


_PHI_VARIANTS = ("printed", "exponent-K")


def _phi_log_residual(phi, k, power, variant):
    lhs = (k - 1) * np.log1p(power * phi)
    inner = np.log1p((power / k) * phi * (k - phi))
    rhs = inner if variant == "printed" else k * inner
    return lhs - rhs


def phi_k(k, power, variant="exponent-K"):
    """Fixed-point parameter of the K-user symmetric sum capacity.

    variant="printed" solves (1+P*phi)^(K-1) = 1 + (P/K)*phi*(K-phi);
    variant="exponent-K" raises the right side to the K-th power, which
    is the form consistent with the two-user closed form.  Bisection in
    the log domain on [1, K]; raises when the bracket shows no sign
    change, reporting the endpoint residuals.
    """
    if variant not in _PHI_VARIANTS:
        raise ValueError(f"variant must be one of {_PHI_VARIANTS}")
    if int(k) != k or k < 2:
        raise ValueError("k must be an integer >= 2")
    if power <= 0:
        raise ValueError("power must be positive")
    k = int(k)
    lo, hi = 1.0, float(k)
    rlo = _phi_log_residual(lo, k, power, variant)
    rhi = _phi_log_residual(hi, k, power, variant)
    if rlo == 0.0:
        return lo
    if rhi == 0.0:
        return hi
    if rlo * rhi > 0.0:
        raise NoRootInIntervalError(
            f"variant '{variant}' has no root in [1, {k}] "
            f"(log-residuals {rlo:.6e} at 1 and {rhi:.6e} at {k})",
            variant=variant, residual_lo=rlo, residual_hi=rhi,
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        rm = _phi_log_residual(mid, k, power, variant)
        if rm == 0.0:
            return mid
        if (rm < 0.0) == (rlo < 0.0):
            lo, rlo = mid, rm
        else:
            hi = mid
        if hi - lo <= 4.0 * np.finfo(float).eps * k:
            break
    phi = 0.5 * (lo + hi)
    if abs(_phi_log_residual(phi, k, power, variant)) > 1e-11:
        raise ArithmeticError("fixed-point residual above 1e-11 after bisection")
    return phi


def k_user_symmetric_sum_capacity(k, power, variant="exponent-K"):
    """Symmetric K-user feedback sum capacity, 0.5*log2(1 + P*phi).

    ``power`` is the effective per-channel product (gain^2 times total
    power); unit gains take it verbatim.
    """
    return _half_log2(power * phi_k(k, power, variant))


def nofb_bc_siso_region(h1, h2, power, grid=513):
    """No-feedback degraded broadcast baseline via superposition.

    For each split alpha the stronger receiver gets a clean rate and the
    weaker one is interference-limited; rates are mapped back to user
    indices.
    """
    if power <= 0:
        raise ValueError("power must be positive")
    if grid < 2:
        raise ValueError("grid must be >= 2")
    g1sq = float(h1) ** 2
    g2sq = float(h2) ** 2
    gsq, wsq = max(g1sq, g2sq), min(g1sq, g2sq)
    alphas = np.linspace(0.0, 1.0, grid)
    r_strong = _half_log2(gsq * alphas * power)
    r_weak = _half_log2(wsq * (1.0 - alphas) * power / (1.0 + wsq * alphas * power))
    if g1sq >= g2sq:
        pts = np.column_stack([r_strong, r_weak])
    else:
        pts = np.column_stack([r_weak, r_strong])
    meta = _region_meta("nofb-bc", h1, h2, power, grid=grid)
    return RegionFrontier.from_points(pts, meta)
