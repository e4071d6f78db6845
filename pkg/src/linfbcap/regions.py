"""Gaussian-input rate regions of the transformed no-feedback channels.

A feedback design turns eta channel uses of the original uplink or
downlink into one use of a larger no-feedback channel.  This module
builds those effective channels, evaluates their log-det pentagons,
optimizes input covariances under the leftover sum-power budget, and
searches over designs.  Downlink requests are answered through the dual
uplink (reversed channels, reversed design), which is the route the
duality theorem itself takes.
"""

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .blockmat import (
    BlockTriangularSet,
    as_matrix,
    bc_N_matrices,
    exchange_matrix,
    kron_lift,
    mac_M_matrices,
    omega,
    omega_tilde,
    psd_sqrt,
    reverse,
    reverse_set,
)
from .exceptions import (
    DimensionMismatchError,
    InfeasibleDesignError,
    NonPsdCovarianceError,
)
from .frontier import RegionFrontier

__all__ = [
    "ChannelSpec",
    "FeedbackDesign",
    "CovariancePair",
    "dual_channel_spec",
    "effective_mac_channel",
    "effective_bc_channel",
    "mac_nofb_pentagon",
    "maximize_sum_rate",
    "multiletter_inner_bound",
    "search_feedback_design",
]

_LOG2 = np.log(2.0)


@dataclass(frozen=True)
class ChannelSpec:
    """Two-user channel: H_i are nu_i-by-kappa; the uplink uses transposes."""

    H1: np.ndarray
    H2: np.ndarray
    P: float
    direction: str = "mac"

    def __post_init__(self):
        h1 = as_matrix(self.H1)
        h2 = as_matrix(self.H2)
        if h1.shape[1] != h2.shape[1]:
            raise DimensionMismatchError(
                f"channel matrices share kappa columns, got {h1.shape} and {h2.shape}"
            )
        if np.all(h1 == 0.0) or np.all(h2 == 0.0):
            raise ValueError("channel matrices must be nonzero")
        if self.P <= 0:
            raise ValueError("power must be positive")
        if self.direction not in ("mac", "bc"):
            raise ValueError("direction must be 'mac' or 'bc'")
        object.__setattr__(self, "H1", h1)
        object.__setattr__(self, "H2", h2)
        object.__setattr__(self, "P", float(self.P))

    @property
    def nu1(self):
        return self.H1.shape[0]

    @property
    def nu2(self):
        return self.H2.shape[0]

    @property
    def kappa(self):
        return self.H1.shape[1]

    def digest(self):
        h = hashlib.sha256()
        h.update(self.direction.encode())
        h.update(np.array(self.H1.shape + self.H2.shape, dtype=np.int64).tobytes())
        h.update(self.H1.tobytes())
        h.update(self.H2.tobytes())
        h.update(np.float64(self.P).tobytes())
        return h.hexdigest()[:16]


def dual_channel_spec(spec):
    """Exchange-conjugated spec of the opposite direction.

    The transposed lifts of the dual spec equal the reversed lifts of the
    original, which is exactly the channel the duality argument runs the
    uplink evaluation on.
    """
    flip = "bc" if spec.direction == "mac" else "mac"
    e_k = exchange_matrix(spec.kappa)
    d1 = exchange_matrix(spec.nu1) @ spec.H1 @ e_k
    d2 = exchange_matrix(spec.nu2) @ spec.H2 @ e_k
    return ChannelSpec(d1, d2, spec.P, flip)


_FORMS = ("A", "B", "C", "D")


@dataclass(frozen=True)
class FeedbackDesign:
    """Pair of strictly-lower block-triangular gain sets in one of four forms.

    A/B forms hold downlink gains (kappa-by-nu_i blocks, feedback of
    outputs resp. noises); C/D forms hold uplink gains (nu_i-by-kappa
    blocks).  B/D forms must respect the trace budget when attached to a
    channel spec.
    """

    eta: int
    form: str
    M1: BlockTriangularSet
    M2: BlockTriangularSet

    def __post_init__(self):
        if self.form not in _FORMS:
            raise ValueError(f"form must be one of {_FORMS}")
        if self.M1.eta != self.eta or self.M2.eta != self.eta:
            raise DimensionMismatchError("both sets must share the design eta")
        if self.form in ("A", "B"):
            if self.M1.block_rows != self.M2.block_rows:
                raise DimensionMismatchError(
                    "A/B-form blocks share the transmitter dimension"
                )
        else:
            if self.M1.block_cols != self.M2.block_cols:
                raise DimensionMismatchError(
                    "C/D-form blocks share the receiver dimension"
                )

    @classmethod
    def zero(cls, eta, form, r1, c1, r2, c2):
        return cls(eta, form,
                   BlockTriangularSet.zeros(eta, r1, c1),
                   BlockTriangularSet.zeros(eta, r2, c2))

    def traces(self):
        m1, m2 = self.M1.materialize(), self.M2.materialize()
        return float(np.sum(m1 * m1)), float(np.sum(m2 * m2))

    def validate_for(self, spec):
        """Check block dimensions against a channel spec; return leftover budget."""
        nu1, nu2, kappa = spec.nu1, spec.nu2, spec.kappa
        if self.form in ("A", "B"):
            want1 = (kappa, nu1)
            want2 = (kappa, nu2)
        else:
            want1 = (nu1, kappa)
            want2 = (nu2, kappa)
        got1 = (self.M1.block_rows, self.M1.block_cols)
        got2 = (self.M2.block_rows, self.M2.block_cols)
        if got1 != want1 or got2 != want2:
            raise DimensionMismatchError(
                f"{self.form}-form blocks {got1}/{got2} do not match channel "
                f"dims nu=({nu1},{nu2}), kappa={kappa}"
            )
        t1, t2 = self.traces()
        budget = self.eta * spec.P - t1 - t2
        if self.form in ("B", "D") and budget < 0:
            raise InfeasibleDesignError(
                f"design consumes {t1 + t2:.6g} of the block budget "
                f"{self.eta * spec.P:.6g}"
            )
        return budget


@dataclass
class CovariancePair:
    """Input covariances for the two users, symmetric PSD within 1e-9."""

    K1: np.ndarray
    K2: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.K1 = _check_psd(self.K1, "K1")
        self.K2 = _check_psd(self.K2, "K2")

    def trace_sum(self):
        return float(np.trace(self.K1) + np.trace(self.K2))


def _check_psd(k, name, tol=1e-9):
    m = as_matrix(k)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"{name} must be square, got {m.shape}")
    scale = 1.0 + float(np.max(np.abs(m)))
    if np.max(np.abs(m - m.T)) > tol * scale:
        raise NonPsdCovarianceError(f"{name} is not symmetric within tolerance")
    sym = 0.5 * (m + m.T)
    w = np.linalg.eigvalsh(sym)
    if w[0] < -tol * scale:
        raise NonPsdCovarianceError(
            f"{name} has eigenvalue {w[0]:.3e} below -{tol:.1e} * scale"
        )
    return sym


def _design_in_form(design, spec, want):
    """Convert a design to noise form ('D' for uplink, 'B' for downlink)."""
    if design.form == want:
        return design
    eta = design.eta
    if want == "D":
        if design.form != "C":
            raise ValueError(f"cannot derive a D-form design from form {design.form}")
        h1t = kron_lift(spec.H1, eta).T
        h2t = kron_lift(spec.H2, eta).T
        d1, d2 = omega_tilde(design.M1, design.M2, h1t, h2t)
        return FeedbackDesign(eta, "D", d1, d2)
    if want == "B":
        if design.form != "A":
            raise ValueError(f"cannot derive a B-form design from form {design.form}")
        h1 = kron_lift(spec.H1, eta)
        h2 = kron_lift(spec.H2, eta)
        b1, b2 = omega(design.M1, design.M2, h1, h2)
        return FeedbackDesign(eta, "B", b1, b2)
    raise ValueError(f"unsupported target form {want}")


def effective_mac_channel(design, spec):
    """Whitened no-feedback uplink reached by a D-form design.

    Returns (G1, G2, budget) with G_i = (H_i^B)^T Q_i^-1: the invertible
    colored output multiplier is dropped, which preserves capacity, and
    Q_i whitens the effective noise seen through user i's inputs.
    """
    if design.form != "D":
        raise ValueError("effective_mac_channel requires a D-form design")
    budget = design.validate_for(spec)
    eta = design.eta
    h1t = kron_lift(spec.H1, eta).T
    h2t = kron_lift(spec.H2, eta).T
    m1, m2 = mac_M_matrices(design.M1, design.M2, h1t, h2t)
    q1 = psd_sqrt(m1)
    q2 = psd_sqrt(m2)
    g1 = h1t @ np.linalg.inv(q1)
    g2 = h2t @ np.linalg.inv(q2)
    return g1, g2, budget


def effective_bc_channel(design, spec):
    """Whitened no-feedback downlink reached by a B-form design.

    Returns (G1, G2, budget) with G_i = S_i^-1 H_i^B.
    """
    if design.form != "B":
        raise ValueError("effective_bc_channel requires a B-form design")
    budget = design.validate_for(spec)
    eta = design.eta
    h1 = kron_lift(spec.H1, eta)
    h2 = kron_lift(spec.H2, eta)
    n1, n2 = bc_N_matrices(design.M1, design.M2, h1, h2)
    s1 = psd_sqrt(n1)
    s2 = psd_sqrt(n2)
    g1 = np.linalg.inv(s1) @ h1
    g2 = np.linalg.inv(s2) @ h2
    return g1, g2, budget


def mac_nofb_pentagon(g1, g2, cov):
    """Log-det rate bounds of the no-feedback uplink at fixed covariances.

    I1 = 0.5*log2 det(I + G1 K1 G1^T), same for I2, and the sum bound
    with both terms.
    """
    g1 = as_matrix(g1)
    g2 = as_matrix(g2)
    if not isinstance(cov, CovariancePair):
        cov = CovariancePair(*cov)
    if g1.shape[1] != cov.K1.shape[0] or g2.shape[1] != cov.K2.shape[0]:
        raise DimensionMismatchError("covariances do not conform with channels")
    a1 = g1 @ cov.K1 @ g1.T
    a2 = g2 @ cov.K2 @ g2.T
    eye = np.eye(g1.shape[0])
    i1 = _half_logdet(eye + a1)
    i2 = _half_logdet(eye + a2)
    isum = _half_logdet(eye + a1 + a2)
    return i1, i2, isum


def _half_logdet(m):
    sign, logdet = np.linalg.slogdet(m)
    if sign <= 0:
        raise ArithmeticError("log-det argument is not positive definite")
    return 0.5 * logdet / _LOG2


def _waterline(w, budget):
    """Shift making sum(max(w - mu, 0)) equal the budget (simplex projection)."""
    ws = np.sort(w)[::-1]
    csum = np.cumsum(ws)
    ks = np.arange(1, ws.shape[0] + 1)
    mus = (csum - budget) / ks
    k_star = int(np.max(np.nonzero(ws - mus > 0)[0])) + 1
    return float(mus[k_star - 1])


def _project(k1, k2, budget):
    """Exact Euclidean projection onto {K_i PSD, tr K1 + tr K2 <= budget}.

    Joint eigenvalue waterline: both blocks keep their eigenbases and the
    eigenvalues are shifted down by a common amount before clipping.  A
    trace rescale is not a projection and stalls the ascent at any point
    where the iterate is proportional to the gradient, so it is not used.
    """
    eigs = [np.linalg.eigh(0.5 * (k + k.T)) for k in (k1, k2)]
    w = np.concatenate([e[0] for e in eigs])
    clipped = np.clip(w, 0.0, None)
    if clipped.sum() > budget:
        mu = _waterline(w, budget)
        clipped = np.clip(w - mu, 0.0, None)
    n1 = k1.shape[0]
    parts = (clipped[:n1], clipped[n1:])
    out = [(v * vals) @ v.T for vals, (_, v) in zip(parts, eigs)]
    return out[0], out[1]


def _weighted_objective(g1, g2, k1, k2, w_own, w_sum, own_idx):
    eye = np.eye(g1.shape[0])
    a1 = g1 @ k1 @ g1.T
    a2 = g2 @ k2 @ g2.T
    val = w_sum * _half_logdet(eye + a1 + a2)
    if w_own > 0.0:
        own = a1 if own_idx == 1 else a2
        val += w_own * _half_logdet(eye + own)
    return val


def _weighted_gradients(g1, g2, k1, k2, w_own, w_sum, own_idx):
    eye = np.eye(g1.shape[0])
    a1 = g1 @ k1 @ g1.T
    a2 = g2 @ k2 @ g2.T
    sinv = np.linalg.inv(eye + a1 + a2)
    c = 0.5 / _LOG2
    grad1 = w_sum * c * (g1.T @ sinv @ g1)
    grad2 = w_sum * c * (g2.T @ sinv @ g2)
    if w_own > 0.0:
        if own_idx == 1:
            grad1 = grad1 + w_own * c * (g1.T @ np.linalg.inv(eye + a1) @ g1)
        else:
            grad2 = grad2 + w_own * c * (g2.T @ np.linalg.inv(eye + a2) @ g2)
    return grad1, grad2


def _solve_weighted(g1, g2, budget, w1, w2, iters, step):
    """Projected-gradient ascent of the weighted-corner objective.

    For w1 >= w2 the pentagon corner value is (w1-w2)*I1 + w2*Isum and
    symmetrically otherwise; both are concave in the covariances.
    Backtracking keeps the iteration monotone.
    """
    n1, n2 = g1.shape[1], g2.shape[1]
    if budget <= 0.0:
        return np.zeros((n1, n1)), np.zeros((n2, n2)), {
            "converged": True, "iterations": 0, "pg_norm": 0.0}
    if w1 >= w2:
        w_own, w_sum, own_idx = w1 - w2, w2, 1
    else:
        w_own, w_sum, own_idx = w2 - w1, w1, 2
    if w_own == 0.0 and w_sum == 0.0:
        return np.zeros((n1, n1)), np.zeros((n2, n2)), {
            "converged": True, "iterations": 0, "pg_norm": 0.0}
    k1 = (budget / (2.0 * n1)) * np.eye(n1)
    k2 = (budget / (2.0 * n2)) * np.eye(n2)
    val = _weighted_objective(g1, g2, k1, k2, w_own, w_sum, own_idx)
    t = step
    pg_norm = np.inf
    it = 0
    for it in range(1, iters + 1):
        grad1, grad2 = _weighted_gradients(g1, g2, k1, k2, w_own, w_sum, own_idx)
        # Projected-gradient mapping at unit step; a fixed probe step keeps
        # the criterion meaningful when the line-search step has grown.
        p1, p2 = _project(k1 + grad1, k2 + grad2, budget)
        pg_norm = np.sqrt(np.sum((p1 - k1) ** 2) + np.sum((p2 - k2) ** 2))
        if pg_norm < 1e-6:
            break
        accepted = False
        for _ in range(40):
            c1, c2 = _project(k1 + t * grad1, k2 + t * grad2, budget)
            new_val = _weighted_objective(g1, g2, c1, c2, w_own, w_sum, own_idx)
            if new_val >= val - 1e-14:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        k1, k2, val = c1, c2, new_val
        t = min(t * 1.3, 1e3)
    return k1, k2, {"converged": bool(pg_norm < 1e-6), "iterations": it,
                    "pg_norm": float(pg_norm)}


def maximize_sum_rate(g1, g2, budget, iters=600, step=0.25):
    """Covariances maximizing the sum bound under the trace budget.

    Returns (cov, Isum); convergence status lives in ``cov.meta``.
    """
    if budget < 0:
        raise InfeasibleDesignError("budget must be nonnegative")
    g1 = as_matrix(g1)
    g2 = as_matrix(g2)
    k1, k2, meta = _solve_weighted(g1, g2, float(budget), 1.0, 1.0, iters, step)
    cov = CovariancePair(k1, k2, meta)
    _, _, isum = mac_nofb_pentagon(g1, g2, cov)
    return cov, isum


def multiletter_inner_bound(spec, design, rate_grid=65, iters=400, step=0.25):
    """Rate region of the transformed channel, scaled back by 1/eta.

    Sweeps weight angles, solves each weighted covariance problem, pools
    the resulting pentagon corners, and Pareto-filters.  Downlink specs
    are evaluated on the dual uplink with the reversed design, per the
    duality construction, and the result is returned unchanged.
    """
    if rate_grid < 2:
        raise ValueError("rate_grid must be >= 2")
    if spec.direction == "mac":
        d_design = _design_in_form(design, spec, "D")
        eval_spec = spec
        via = "direct"
    else:
        b_design = _design_in_form(design, spec, "B")
        b_design.validate_for(spec)
        eval_spec = dual_channel_spec(spec)
        d_design = FeedbackDesign(design.eta, "D",
                                  reverse_set(b_design.M1),
                                  reverse_set(b_design.M2))
        via = "duality"
    g1, g2, budget = effective_mac_channel(d_design, eval_spec)
    corners = [(0.0, 0.0)]
    angles = np.linspace(0.0, np.pi / 2.0, rate_grid)
    for theta in angles:
        w1, w2 = float(np.cos(theta)), float(np.sin(theta))
        k1, k2, _ = _solve_weighted(g1, g2, budget, w1, w2, iters, step)
        i1, i2, isum = mac_nofb_pentagon(g1, g2, CovariancePair(k1, k2))
        corners.append((i1, min(i2, isum - i1)))
        corners.append((min(i1, isum - i2), i2))
    pts = np.asarray(corners) / design.eta
    meta = {"eta": design.eta, "rate_grid": rate_grid, "via": via,
            "spec_digest": spec.digest(), "budget": budget}
    return RegionFrontier.from_points(pts, meta)


def _random_design(rng, eta, nu1, nu2, kappa, total_budget):
    """D-form design drawing a uniform fraction of the block budget."""
    blocks1 = {}
    blocks2 = {}
    for l in range(2, eta + 1):
        for tau in range(1, l):
            blocks1[(l, tau)] = rng.standard_normal((nu1, kappa))
            blocks2[(l, tau)] = rng.standard_normal((nu2, kappa))
    d1 = BlockTriangularSet(eta, nu1, kappa, blocks1)
    d2 = BlockTriangularSet(eta, nu2, kappa, blocks2)
    design = FeedbackDesign(eta, "D", d1, d2)
    t1, t2 = design.traces()
    used = t1 + t2
    if used > 0:
        target = rng.uniform(0.0, 1.0) * total_budget
        factor = np.sqrt(target / used)
        design = FeedbackDesign(eta, "D", d1.scaled(factor), d2.scaled(factor))
    return design


def _design_flat(design):
    return np.concatenate([design.M1.materialize().ravel(),
                           design.M2.materialize().ravel()])


def _design_sum_rate(design, spec, iters, step):
    g1, g2, budget = effective_mac_channel(design, spec)
    _, isum = maximize_sum_rate(g1, g2, budget, iters, step)
    return isum / design.eta


def _lex_less(a, b):
    for x, y in zip(a, b):
        if x != y:
            return x < y
    return False


def search_feedback_design(spec, eta, trials, seed, *, screen_iters=150,
                           refine_iters=600, step=0.25, rate_grid=65):
    """Random search plus coordinate refinement over D-form designs.

    Deterministic given the seed: trial t draws from a generator spawned
    at (seed, t), and ties in sum rate resolve to the lexicographically
    smaller flattened design, so the winner does not depend on
    evaluation order.
    """
    if eta < 1 or eta > 4:
        raise ValueError("eta must be in {1, 2, 3, 4}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    eval_spec = spec if spec.direction == "mac" else dual_channel_spec(spec)
    nu1, nu2, kappa = eval_spec.nu1, eval_spec.nu2, eval_spec.kappa
    total_budget = eta * eval_spec.P

    best = FeedbackDesign.zero(eta, "D", nu1, kappa, nu2, kappa)
    best_rate = _design_sum_rate(best, eval_spec, refine_iters, step)
    best_flat = _design_flat(best)
    if eta > 1:
        for t in range(trials):
            rng = np.random.default_rng(
                np.random.SeedSequence(entropy=int(seed), spawn_key=(t,)))
            cand = _random_design(rng, eta, nu1, nu2, kappa, total_budget)
            rate = _design_sum_rate(cand, eval_spec, screen_iters, step)
            flat = _design_flat(cand)
            if rate > best_rate or (rate == best_rate and _lex_less(flat, best_flat)):
                best, best_rate, best_flat = cand, rate, flat

        best_rate = _design_sum_rate(best, eval_spec, refine_iters, step)
        keys = [(l, tau) for l in range(2, eta + 1) for tau in range(1, l)]
        shapes = {1: (nu1, kappa), 2: (nu2, kappa)}
        delta = 0.25 * np.sqrt(total_budget)
        for _ in range(4):
            improved = False
            for which in (1, 2):
                for key in keys:
                    for idx in np.ndindex(shapes[which]):
                        for sign in (1.0, -1.0):
                            cand = _perturb(best, which, key, idx, sign * delta)
                            t1, t2 = cand.traces()
                            if t1 + t2 > total_budget:
                                continue
                            rate = _design_sum_rate(cand, eval_spec,
                                                    refine_iters, step)
                            if rate > best_rate + 1e-12:
                                best, best_rate = cand, rate
                                improved = True
            if not improved:
                delta *= 0.5
    frontier = multiletter_inner_bound(eval_spec, best, rate_grid,
                                       iters=refine_iters, step=step)
    frontier.meta.update({"seed": int(seed), "trials": int(trials),
                          "best_sum_rate": best_rate})
    return best, frontier


def _perturb(design, which, key, idx, delta):
    src = design.M1 if which == 1 else design.M2
    blocks = {k: v.copy() for k, v in src.blocks.items()}
    blk = blocks.get(key, np.zeros((src.block_rows, src.block_cols))).copy()
    blk[idx] += delta
    blocks[key] = blk
    new_set = BlockTriangularSet(src.eta, src.block_rows, src.block_cols, blocks)
    if which == 1:
        return FeedbackDesign(design.eta, "D", new_set, design.M2)
    return FeedbackDesign(design.eta, "D", design.M1, new_set)
