"""Parameter maps between dual uplink/downlink designs and their certificates.

The downlink noise-form gains equal the reversed uplink ones, and the
whitening roots on the two sides are exchange-conjugates of each other.
``verify_duality_identities`` evaluates those matrix identities at
machine precision for a concrete design; they are the computable core of
the capacity-region equality.
"""

from dataclasses import dataclass

import numpy as np

from .blockmat import (
    bc_N_matrices,
    exchange_matrix,
    kron_lift,
    mac_M_matrices,
    psd_sqrt,
    reverse,
    reverse_set,
)
from .exceptions import IndexRangeError
from .regions import FeedbackDesign, dual_channel_spec

__all__ = [
    "DualityReport",
    "map_bc_to_mac_params",
    "map_mac_to_bc_params",
    "map_scheme_params_corollary5",
    "verify_duality_identities",
]


@dataclass
class DualityReport:
    """Max-abs residuals of the three duality identities for one design."""

    residual_S_eq_EQE: float
    residual_channel_identity: float
    residual_trace_equality: float
    eta: int
    spec_digest: str

    def passed(self, tol=1e-8):
        return (self.residual_S_eq_EQE < tol
                and self.residual_channel_identity < tol
                and self.residual_trace_equality < tol)

    def worst(self):
        return max(self.residual_S_eq_EQE, self.residual_channel_identity,
                   self.residual_trace_equality)


def map_bc_to_mac_params(b1, b2):
    """Downlink noise-form gains to uplink ones: D_i is the reverse of B_i."""
    return reverse_set(b1), reverse_set(b2)


def map_mac_to_bc_params(d1, d2):
    """Uplink noise-form gains to downlink ones; involutive with the above."""
    return reverse_set(d1), reverse_set(d2)


def map_scheme_params_corollary5(c_blocks, eta):
    """Per-block index map from uplink raw gains to downlink raw gains.

    Maps block (tau, l) to the reverse of block (eta - tau, eta - l + 2),
    as printed.  The mapped index pair can leave the strictly-lower
    range for eta >= 3 (for example tau=1, l=3 maps to (2, 2)); such
    indices raise IndexRangeError.  The whole-matrix correspondence
    A^B = reverse(C^B) is the unambiguous form and is what
    :func:`map_bc_to_mac_params` implements.
    """
    out = {}
    for (tau, l) in c_blocks:
        if not (1 <= tau < l <= eta):
            raise IndexRangeError(f"input index ({tau}, {l}) outside 1 <= tau < l <= {eta}")
    for (tau, l) in sorted(c_blocks):
        tau_m = eta - tau
        l_m = eta - l + 2
        if not (1 <= tau_m < l_m <= eta):
            raise IndexRangeError(
                f"block (tau={tau}, l={l}) maps to (tau={tau_m}, l={l_m}), "
                f"outside 1 <= tau < l <= {eta}"
            )
        out[(tau, l)] = reverse(c_blocks[(tau_m, l_m)])
    return out


def verify_duality_identities(design, spec, corrupt=0.0):
    """Residuals of the whitening-root and trace identities for one design.

    Takes a D-form design for the uplink of ``spec`` (given in downlink
    orientation: H_i are nu_i-by-kappa).  Builds B_i as the reverse of
    D_i, the downlink roots S_i on the lifted channels, and the uplink
    roots Q_i on the reversed lifted channels, then reports max-abs
    residuals of

      (a)  S_i - E Q_i E,
      (b)  E S_i^-1 H_i^B E - (Hbar_i^B Q_i^-1)^T,
      (c)  tr(B_i B_i^T) - tr(D_i D_i^T).

    ``corrupt`` perturbs one entry of B1 after the map (negative-control
    hook for the command-line check).
    """
    if design.form != "D":
        raise ValueError("verify_duality_identities requires a D-form design")
    design.validate_for(spec if spec.direction == "mac" else dual_channel_spec(spec))
    eta = design.eta
    d1 = design.M1.materialize()
    d2 = design.M2.materialize()
    b1 = reverse(d1)
    b2 = reverse(d2)
    if corrupt:
        b1 = b1.copy()
        row = b1.shape[0] - 1
        b1[row, 0] += corrupt

    h1b = kron_lift(spec.H1, eta)
    h2b = kron_lift(spec.H2, eta)
    h1r = kron_lift(reverse(spec.H1), eta)
    h2r = kron_lift(reverse(spec.H2), eta)

    n1, n2 = bc_N_matrices(b1, b2, h1b, h2b)
    s1, s2 = psd_sqrt(n1), psd_sqrt(n2)
    m1, m2 = mac_M_matrices(d1, d2, h1r, h2r)
    q1, q2 = psd_sqrt(m1), psd_sqrt(m2)

    res_a = 0.0
    res_b = 0.0
    for s, q, hb, hr in ((s1, q1, h1b, h1r), (s2, q2, h2b, h2r)):
        e_out = exchange_matrix(s.shape[0])
        e_in = exchange_matrix(hb.shape[1])
        res_a = max(res_a, float(np.max(np.abs(s - e_out @ q @ e_out))))
        lhs = e_out @ np.linalg.solve(s, hb) @ e_in
        rhs = (hr @ np.linalg.inv(q)).T
        res_b = max(res_b, float(np.max(np.abs(lhs - rhs))))
    res_c = max(abs(float(np.sum(b1 * b1)) - float(np.sum(d1 * d1))),
                abs(float(np.sum(b2 * b2)) - float(np.sum(d2 * d2))))
    return DualityReport(res_a, res_b, res_c, eta, spec.digest())
