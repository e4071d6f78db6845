"""Exchange-matrix algebra and block-triangular feedback parameter maps.

Everything here operates on dense float64 arrays; block-triangular
parameter sets are materialized before any product or inverse.  The
matrices involved stay at desk scale (a few dozen rows at most), so
generic dense LU inverses are used even where the unit lower
block-triangular structure would admit forward substitution.
"""

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    NotPositiveDefiniteError,
    NotSymmetricError,
)

__all__ = [
    "exchange_matrix",
    "reverse",
    "kron_lift",
    "as_matrix",
    "BlockTriangularSet",
    "reverse_set",
    "omega",
    "omega_inv",
    "omega_tilde",
    "omega_tilde_inv",
    "psd_sqrt",
    "mac_M_matrices",
    "bc_N_matrices",
]


def as_matrix(a):
    """Validate and return a 2-D float64 array with finite entries."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise DimensionMismatchError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionMismatchError(f"matrix dimensions must be positive, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def exchange_matrix(d):
    """The d-by-d matrix with ones on the counter-diagonal, zeros elsewhere."""
    if d < 1:
        raise DimensionMismatchError("exchange matrix size must be >= 1")
    return np.eye(d)[::-1].copy()


def reverse(a):
    """Conjugate the transpose by exchange matrices: E @ a.T @ E.

    Implemented as a pure re-indexing (rotate the matrix by 180 degrees,
    then transpose) so the operation is exact and involutive bit for bit.
    """
    m = as_matrix(a)
    return np.ascontiguousarray(m[::-1, ::-1].T)


def kron_lift(h, eta):
    """Block-diagonal lift with eta copies of h: I_eta (x) h."""
    if eta < 1:
        raise DimensionMismatchError("eta must be >= 1")
    return np.kron(np.eye(eta), as_matrix(h))


class BlockTriangularSet:
    """A strictly-lower block-triangular matrix stored block by block.

    ``blocks`` maps (row-block l, col-block tau) with 1 <= tau < l <= eta
    to a dense block of shape (block_rows, block_cols).  Blocks on and
    above the block diagonal are implicitly zero.
    """

    def __init__(self, eta, block_rows, block_cols, blocks=None):
        if eta < 1 or block_rows < 1 or block_cols < 1:
            raise DimensionMismatchError("eta and block dimensions must be >= 1")
        self.eta = int(eta)
        self.block_rows = int(block_rows)
        self.block_cols = int(block_cols)
        self.blocks = {}
        for (l, tau), blk in (blocks or {}).items():
            if not (1 <= tau < l <= self.eta):
                raise DimensionMismatchError(
                    f"block index ({l}, {tau}) outside the strictly-lower range"
                )
            b = as_matrix(blk)
            if b.shape != (self.block_rows, self.block_cols):
                raise DimensionMismatchError(
                    f"block ({l}, {tau}) has shape {b.shape}, expected "
                    f"({self.block_rows}, {self.block_cols})"
                )
            self.blocks[(l, tau)] = b.copy()

    @property
    def shape(self):
        return (self.eta * self.block_rows, self.eta * self.block_cols)

    @classmethod
    def zeros(cls, eta, block_rows, block_cols):
        return cls(eta, block_rows, block_cols)

    def is_zero(self, tol=0.0):
        return all(np.max(np.abs(b)) <= tol for b in self.blocks.values())

    def materialize(self):
        r, c = self.block_rows, self.block_cols
        out = np.zeros(self.shape)
        for (l, tau), blk in self.blocks.items():
            out[(l - 1) * r:l * r, (tau - 1) * c:tau * c] = blk
        return out

    @classmethod
    def from_dense(cls, mat, eta, block_rows, block_cols, tol=1e-9):
        """Extract the strictly-lower blocks of a dense matrix.

        Entries on or above the block diagonal must not exceed ``tol`` in
        magnitude; they are discarded so the stored set is exactly
        strictly-lower block-triangular.
        """
        m = as_matrix(mat)
        if m.shape != (eta * block_rows, eta * block_cols):
            raise DimensionMismatchError(
                f"dense shape {m.shape} does not match eta={eta} blocks of "
                f"({block_rows}, {block_cols})"
            )
        blocks = {}
        for l in range(1, eta + 1):
            for tau in range(1, eta + 1):
                blk = m[(l - 1) * block_rows:l * block_rows,
                        (tau - 1) * block_cols:tau * block_cols]
                if tau < l:
                    if np.max(np.abs(blk)) > 0.0:
                        blocks[(l, tau)] = blk
                elif np.max(np.abs(blk)) > tol:
                    raise DimensionMismatchError(
                        f"block ({l}, {tau}) on/above the diagonal is nonzero "
                        f"(max abs {np.max(np.abs(blk)):.3e} > tol {tol:.1e})"
                    )
        return cls(eta, block_rows, block_cols, blocks)

    def scaled(self, factor):
        return BlockTriangularSet(
            self.eta, self.block_rows, self.block_cols,
            {k: factor * v for k, v in self.blocks.items()},
        )

    def allclose(self, other, tol=1e-12):
        if (self.eta, self.block_rows, self.block_cols) != (
                other.eta, other.block_rows, other.block_cols):
            return False
        return np.max(np.abs(self.materialize() - other.materialize()), initial=0.0) <= tol


def reverse_set(s):
    """Reverse a block-triangular set; block dimensions swap roles."""
    rev = reverse(s.materialize())
    return BlockTriangularSet.from_dense(rev, s.eta, s.block_cols, s.block_rows, tol=0.0)


def _mat_of(x):
    return x.materialize() if isinstance(x, BlockTriangularSet) else as_matrix(x)


def _check_pair(s1, s2):
    if s1.eta != s2.eta:
        raise DimensionMismatchError(f"eta mismatch: {s1.eta} vs {s2.eta}")
    if s1.block_rows != s2.block_rows:
        raise DimensionMismatchError(
            f"shared block-row dimension mismatch: {s1.block_rows} vs {s2.block_rows}"
        )


def _check_channel(s, hmat, name):
    if hmat.shape != (s.shape[1], s.shape[0]):
        raise DimensionMismatchError(
            f"{name} has shape {hmat.shape}, expected {(s.shape[1], s.shape[0])} "
            f"to conform with the design blocks"
        )


def omega(a1, a2, h1b, h2b):
    """Map raw output-feedback gains to noise-form gains.

    B_i = (I - A1^B H1^B - A2^B H2^B)^-1 A_i^B.  The inverted matrix is
    unit lower block-triangular, so it is always invertible and the
    outputs stay strictly-lower block-triangular.
    """
    _check_pair(a1, a2)
    h1 = as_matrix(h1b)
    h2 = as_matrix(h2b)
    _check_channel(a1, h1, "H1^B")
    _check_channel(a2, h2, "H2^B")
    a1m, a2m = a1.materialize(), a2.materialize()
    n = a1m.shape[0]
    inv = np.linalg.inv(np.eye(n) - a1m @ h1 - a2m @ h2)
    return (
        BlockTriangularSet.from_dense(inv @ a1m, a1.eta, a1.block_rows, a1.block_cols),
        BlockTriangularSet.from_dense(inv @ a2m, a2.eta, a2.block_rows, a2.block_cols),
    )


def omega_inv(b1, b2, h1b, h2b):
    """Inverse of :func:`omega`: A_i = (I + B1^B H1^B + B2^B H2^B)^-1 B_i^B."""
    _check_pair(b1, b2)
    h1 = as_matrix(h1b)
    h2 = as_matrix(h2b)
    _check_channel(b1, h1, "H1^B")
    _check_channel(b2, h2, "H2^B")
    b1m, b2m = b1.materialize(), b2.materialize()
    n = b1m.shape[0]
    inv = np.linalg.inv(np.eye(n) + b1m @ h1 + b2m @ h2)
    return (
        BlockTriangularSet.from_dense(inv @ b1m, b1.eta, b1.block_rows, b1.block_cols),
        BlockTriangularSet.from_dense(inv @ b2m, b2.eta, b2.block_rows, b2.block_cols),
    )


def omega_tilde(c1, c2, h1bt, h2bt):
    """Map raw output-feedback gains to noise-form gains on the uplink side.

    D_i = C_i^B (I - H1^Bt C1^B - H2^Bt C2^B)^-1 where H_i^Bt are the
    transposed lifted channel matrices.
    """
    if c1.eta != c2.eta:
        raise DimensionMismatchError(f"eta mismatch: {c1.eta} vs {c2.eta}")
    if c1.block_cols != c2.block_cols:
        raise DimensionMismatchError(
            f"shared block-column dimension mismatch: {c1.block_cols} vs {c2.block_cols}"
        )
    h1t = as_matrix(h1bt)
    h2t = as_matrix(h2bt)
    for s, h, name in ((c1, h1t, "H1^Bt"), (c2, h2t, "H2^Bt")):
        if h.shape != (s.shape[1], s.shape[0]):
            raise DimensionMismatchError(
                f"{name} has shape {h.shape}, expected {(s.shape[1], s.shape[0])}"
            )
    c1m, c2m = c1.materialize(), c2.materialize()
    n = c1m.shape[1]
    inv = np.linalg.inv(np.eye(n) - h1t @ c1m - h2t @ c2m)
    return (
        BlockTriangularSet.from_dense(c1m @ inv, c1.eta, c1.block_rows, c1.block_cols),
        BlockTriangularSet.from_dense(c2m @ inv, c2.eta, c2.block_rows, c2.block_cols),
    )


def omega_tilde_inv(d1, d2, h1bt, h2bt):
    """Inverse of :func:`omega_tilde`: C_i = D_i^B (I + H1^Bt D1^B + H2^Bt D2^B)^-1."""
    if d1.eta != d2.eta:
        raise DimensionMismatchError(f"eta mismatch: {d1.eta} vs {d2.eta}")
    h1t = as_matrix(h1bt)
    h2t = as_matrix(h2bt)
    for s, h, name in ((d1, h1t, "H1^Bt"), (d2, h2t, "H2^Bt")):
        if h.shape != (s.shape[1], s.shape[0]):
            raise DimensionMismatchError(
                f"{name} has shape {h.shape}, expected {(s.shape[1], s.shape[0])}"
            )
    d1m, d2m = d1.materialize(), d2.materialize()
    n = d1m.shape[1]
    inv = np.linalg.inv(np.eye(n) + h1t @ d1m + h2t @ d2m)
    return (
        BlockTriangularSet.from_dense(d1m @ inv, d1.eta, d1.block_rows, d1.block_cols),
        BlockTriangularSet.from_dense(d2m @ inv, d2.eta, d2.block_rows, d2.block_cols),
    )


def psd_sqrt(m, sym_tol=1e-9):
    """Unique symmetric positive-definite square root via eigendecomposition.

    Fails loudly when the input is not symmetric within a relative
    tolerance or has an eigenvalue at or below 1e-12 * trace / dim; the
    uniqueness of the positive root is only meaningful for genuinely
    positive-definite inputs, so nothing is clamped.
    """
    mat = as_matrix(m)
    if mat.shape[0] != mat.shape[1]:
        raise DimensionMismatchError(f"square matrix required, got {mat.shape}")
    scale = 1.0 + np.max(np.abs(mat))
    if np.max(np.abs(mat - mat.T)) > sym_tol * scale:
        raise NotSymmetricError(
            f"asymmetry {np.max(np.abs(mat - mat.T)):.3e} exceeds {sym_tol:.1e} * {scale:.3e}"
        )
    sym = 0.5 * (mat + mat.T)
    w, v = np.linalg.eigh(sym)
    floor = 1e-12 * np.trace(sym) / sym.shape[0]
    if w[0] <= floor:
        raise NotPositiveDefiniteError(
            f"smallest eigenvalue {w[0]:.3e} is at or below the floor {floor:.3e}"
        )
    root = (v * np.sqrt(w)) @ v.T
    root = 0.5 * (root + root.T)
    if np.max(np.abs(root @ root - sym)) > 1e-9 * scale:
        raise ArithmeticError("square-root residual exceeds tolerance")
    return root


def mac_M_matrices(d1, d2, h1bt, h2bt):
    """Whitening targets for the uplink inner code.

    M1 = (I + D1 H1t)^T (I + D1 H1t) + (D2 H1t)^T (D2 H1t) and the
    symmetric counterpart for user 2, with H_it the transposed lifted
    channels (or their exchange-conjugated variants on the dual route).
    """
    d1m, d2m = _mat_of(d1), _mat_of(d2)
    h1t, h2t = as_matrix(h1bt), as_matrix(h2bt)
    if h1t.shape[0] != h2t.shape[0]:
        raise DimensionMismatchError("channel lifts must share the receiver dimension")
    if d1m.shape[1] != h1t.shape[0] or d2m.shape[1] != h2t.shape[0]:
        raise DimensionMismatchError("design and channel dimensions do not conform")
    if h1t.shape[1] != d1m.shape[0] or h2t.shape[1] != d2m.shape[0]:
        raise DimensionMismatchError("channel column counts do not match design rows")
    e11 = np.eye(d1m.shape[0]) + d1m @ h1t
    e21 = d2m @ h1t
    m1 = e11.T @ e11 + e21.T @ e21
    e22 = np.eye(d2m.shape[0]) + d2m @ h2t
    e12 = d1m @ h2t
    m2 = e22.T @ e22 + e12.T @ e12
    return 0.5 * (m1 + m1.T), 0.5 * (m2 + m2.T)


def bc_N_matrices(b1, b2, h1b, h2b):
    """Whitening targets for the downlink inner code.

    N1 = (I + H1 B1)(I + H1 B1)^T + (H1 B2)(H1 B2)^T and the symmetric
    counterpart for user 2.
    """
    b1m, b2m = _mat_of(b1), _mat_of(b2)
    h1, h2 = as_matrix(h1b), as_matrix(h2b)
    if h1.shape[1] != h2.shape[1]:
        raise DimensionMismatchError("channel lifts must share the transmitter dimension")
    if h1.shape[1] != b1m.shape[0] or h2.shape[1] != b2m.shape[0]:
        raise DimensionMismatchError("design and channel dimensions do not conform")
    if b1m.shape[1] != h1.shape[0] or b2m.shape[1] != h2.shape[0]:
        raise DimensionMismatchError("design column counts do not match channel rows")
    f11 = np.eye(h1.shape[0]) + h1 @ b1m
    f12 = h1 @ b2m
    n1 = f11 @ f11.T + f12 @ f12.T
    f22 = np.eye(h2.shape[0]) + h2 @ b2m
    f21 = h2 @ b1m
    n2 = f22 @ f22.T + f21 @ f21.T
    return 0.5 * (n1 + n1.T), 0.5 * (n2 + n2.T)
