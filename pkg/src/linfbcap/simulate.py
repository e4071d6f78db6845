"""Causal simulation of the inner codes and power-accounting checks.

The feedback recursions are run sub-block by sub-block, exactly as a
transmitter would: inputs at sub-block t may use channel outputs only
from sub-blocks before t.  Closed-form matrix expressions for the same
quantities are used as oracles by the identity tests and for the
analytic side of the power lemma.
"""

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .blockmat import (
    kron_lift,
    mac_M_matrices,
    omega_tilde,
    omega_tilde_inv,
    psd_sqrt,
)
from .exceptions import DimensionMismatchError

__all__ = [
    "RngSpec",
    "BlockSample",
    "simulate_bc_block",
    "simulate_mac_block",
    "verify_power_lemma",
    "PowerReport",
]


@dataclass(frozen=True)
class RngSpec:
    """Named, seedable random stream (NumPy PCG64 under the hood)."""

    seed: int
    stream: str = "main"

    def generator(self):
        tag = int.from_bytes(
            hashlib.sha256(self.stream.encode()).digest()[:4], "little")
        return np.random.default_rng(
            np.random.SeedSequence(entropy=int(self.seed), spawn_key=(tag,)))


@dataclass
class BlockSample:
    """Realized one-block sample of the inner code (batched over rows)."""

    U: tuple
    Z: tuple
    X: tuple
    Y: tuple
    meta: dict = field(default_factory=dict)


def _rows(v, dim, name):
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise DimensionMismatchError(f"{name} must have {dim} columns, got {arr.shape}")
    return arr


def simulate_bc_block(a1, a2, spec, u, z1, z2):
    """Run one eta-block of the downlink inner code causally.

    The transmitter sends the precoded codeword plus raw feedback gains
    applied to past outputs; each receiver's output is its channel image
    plus its own noise.  ``u``, ``z1``, ``z2`` may carry a leading batch
    axis.
    """
    eta = a1.eta
    kappa, nu1 = a1.block_rows, a1.block_cols
    nu2 = a2.block_cols
    if (spec.nu1, spec.nu2, spec.kappa) != (nu1, nu2, kappa):
        raise DimensionMismatchError("design block dims do not match the channel")
    u = _rows(u, eta * kappa, "u")
    z1 = _rows(z1, eta * nu1, "z1")
    z2 = _rows(z2, eta * nu2, "z2")
    n = u.shape[0]
    if z1.shape[0] != n or z2.shape[0] != n:
        raise DimensionMismatchError("batch sizes of u, z1, z2 must agree")

    h1b = kron_lift(spec.H1, eta)
    h2b = kron_lift(spec.H2, eta)
    a1m = a1.materialize()
    a2m = a2.materialize()
    pre = np.eye(eta * kappa) - a1m @ h1b - a2m @ h2b
    v = u @ pre.T

    x = np.zeros((n, eta * kappa))
    y1 = np.zeros((n, eta * nu1))
    y2 = np.zeros((n, eta * nu2))
    for t in range(eta):
        xs = slice(t * kappa, (t + 1) * kappa)
        xt = v[:, xs].copy()
        for tau in range(t):
            blk1 = a1.blocks.get((t + 1, tau + 1))
            if blk1 is not None:
                xt += y1[:, tau * nu1:(tau + 1) * nu1] @ blk1.T
            blk2 = a2.blocks.get((t + 1, tau + 1))
            if blk2 is not None:
                xt += y2[:, tau * nu2:(tau + 1) * nu2] @ blk2.T
        x[:, xs] = xt
        y1[:, t * nu1:(t + 1) * nu1] = (
            xt @ spec.H1.T + z1[:, t * nu1:(t + 1) * nu1])
        y2[:, t * nu2:(t + 1) * nu2] = (
            xt @ spec.H2.T + z2[:, t * nu2:(t + 1) * nu2])
    return BlockSample(U=(u,), Z=(z1, z2), X=(x,), Y=(y1, y2),
                       meta={"eta": eta, "direction": "bc"})


def simulate_mac_block(c1, c2, spec, u1, u2, z):
    """Run one eta-block of the uplink inner code causally.

    Transmitter i sends its whitened codeword plus raw feedback gains
    applied to past receiver outputs; the receiver output sums both
    transposed channel images plus noise.
    """
    eta = c1.eta
    nu1, kappa = c1.block_rows, c1.block_cols
    nu2 = c2.block_rows
    if (spec.nu1, spec.nu2, spec.kappa) != (nu1, nu2, kappa):
        raise DimensionMismatchError("design block dims do not match the channel")
    u1 = _rows(u1, eta * nu1, "u1")
    u2 = _rows(u2, eta * nu2, "u2")
    z = _rows(z, eta * kappa, "z")
    n = u1.shape[0]
    if u2.shape[0] != n or z.shape[0] != n:
        raise DimensionMismatchError("batch sizes of u1, u2, z must agree")

    h1t = kron_lift(spec.H1, eta).T
    h2t = kron_lift(spec.H2, eta).T
    d1, d2 = omega_tilde(c1, c2, h1t, h2t)
    m1, m2 = mac_M_matrices(d1, d2, h1t, h2t)
    q1inv = np.linalg.inv(psd_sqrt(m1))
    q2inv = np.linalg.inv(psd_sqrt(m2))
    v1 = u1 @ q1inv.T
    v2 = u2 @ q2inv.T

    x1 = np.zeros((n, eta * nu1))
    x2 = np.zeros((n, eta * nu2))
    y = np.zeros((n, eta * kappa))
    for t in range(eta):
        x1t = v1[:, t * nu1:(t + 1) * nu1].copy()
        x2t = v2[:, t * nu2:(t + 1) * nu2].copy()
        for tau in range(t):
            ys = y[:, tau * kappa:(tau + 1) * kappa]
            blk1 = c1.blocks.get((t + 1, tau + 1))
            if blk1 is not None:
                x1t += ys @ blk1.T
            blk2 = c2.blocks.get((t + 1, tau + 1))
            if blk2 is not None:
                x2t += ys @ blk2.T
        x1[:, t * nu1:(t + 1) * nu1] = x1t
        x2[:, t * nu2:(t + 1) * nu2] = x2t
        y[:, t * kappa:(t + 1) * kappa] = (
            x1t @ spec.H1 + x2t @ spec.H2 + z[:, t * kappa:(t + 1) * kappa])
    return BlockSample(U=(u1, u2), Z=(z,), X=(x1, x2), Y=(y,),
                       meta={"eta": eta, "direction": "mac"})


def _sampling_root(sigma):
    """PSD factor for drawing correlated Gaussians; tolerates singular input."""
    sym = 0.5 * (sigma + sigma.T)
    w, v = np.linalg.eigh(sym)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T


@dataclass
class PowerReport:
    """Analytic vs Monte-Carlo total input power of the uplink inner code."""

    empirical: float
    analytic: float
    lemma_value: float
    analytic_residual: float
    mc_std_error: float
    relative_gap: float
    trials: int
    passed: bool


def verify_power_lemma(design, spec, trials, rng, u_covariances=None):
    """Check total average input power against the trace identity.

    The identity: total input power equals total codeword power plus the
    squared Frobenius norms of the noise-form gains.  The analytic side
    is evaluated by covariance algebra on the closed-form inputs; the
    empirical side runs the causal recursion on ``trials`` samples and
    must agree within three standard errors.
    """
    eta = design.eta
    h1t = kron_lift(spec.H1, eta).T
    h2t = kron_lift(spec.H2, eta).T
    if design.form == "C":
        c1, c2 = design.M1, design.M2
        d1s, d2s = omega_tilde(c1, c2, h1t, h2t)
    elif design.form == "D":
        d1s, d2s = design.M1, design.M2
        c1, c2 = omega_tilde_inv(d1s, d2s, h1t, h2t)
    else:
        raise ValueError("power lemma applies to uplink (C/D-form) designs")

    d1 = d1s.materialize()
    d2 = d2s.materialize()
    tr_d = float(np.sum(d1 * d1) + np.sum(d2 * d2))

    n1 = eta * spec.nu1
    n2 = eta * spec.nu2
    if u_covariances is None:
        budget = max(eta * spec.P - tr_d, 0.0)
        sig1 = (budget / (n1 + n2)) * np.eye(n1)
        sig2 = (budget / (n1 + n2)) * np.eye(n2)
    else:
        sig1 = np.asarray(u_covariances[0], dtype=np.float64)
        sig2 = np.asarray(u_covariances[1], dtype=np.float64)

    m1, m2 = mac_M_matrices(d1s, d2s, h1t, h2t)
    q1inv = np.linalg.inv(psd_sqrt(m1))
    q2inv = np.linalg.inv(psd_sqrt(m2))
    # Closed form: X_i = Q_i^-1 U_i + D_i (H1t Q1^-1 U1 + H2t Q2^-1 U2 + Z).
    t11 = q1inv + d1 @ h1t @ q1inv
    t12 = d1 @ h2t @ q2inv
    t21 = d2 @ h1t @ q1inv
    t22 = q2inv + d2 @ h2t @ q2inv
    analytic = float(
        np.trace(t11 @ sig1 @ t11.T) + np.trace(t12 @ sig2 @ t12.T)
        + np.trace(t21 @ sig1 @ t21.T) + np.trace(t22 @ sig2 @ t22.T)
        + tr_d)
    lemma_value = float(np.trace(sig1) + np.trace(sig2) + tr_d)
    analytic_residual = abs(analytic - lemma_value)

    gen = rng.generator() if isinstance(rng, RngSpec) else rng
    root1 = _sampling_root(sig1)
    root2 = _sampling_root(sig2)
    u1 = gen.standard_normal((trials, n1)) @ root1.T
    u2 = gen.standard_normal((trials, n2)) @ root2.T
    z = gen.standard_normal((trials, eta * spec.kappa))
    sample = simulate_mac_block(c1, c2, spec, u1, u2, z)
    powers = np.sum(sample.X[0] ** 2, axis=1) + np.sum(sample.X[1] ** 2, axis=1)
    empirical = float(np.mean(powers))
    se = float(np.std(powers, ddof=1) / np.sqrt(trials))
    gap = abs(empirical - analytic)
    return PowerReport(
        empirical=empirical,
        analytic=analytic,
        lemma_value=lemma_value,
        analytic_residual=analytic_residual,
        mc_std_error=se,
        relative_gap=gap / analytic if analytic > 0 else gap,
        trials=int(trials),
        passed=bool(gap <= 3.0 * se and analytic_residual <= 1e-9 * (1.0 + lemma_value)),
    )
