import numpy as np
import pytest

from conftest import random_lower_set
from linfbcap.blockmat import (
    BlockTriangularSet,
    bc_N_matrices,
    exchange_matrix,
    kron_lift,
    mac_M_matrices,
    omega,
    omega_inv,
    omega_tilde,
    omega_tilde_inv,
    psd_sqrt,
    reverse,
    reverse_set,
)
from linfbcap.exceptions import (
    DimensionMismatchError,
    NotPositiveDefiniteError,
    NotSymmetricError,
)


class TestExchangeAndReverse:
    def test_exchange_examples(self):
        assert np.array_equal(exchange_matrix(1), [[1.0]])
        assert np.array_equal(exchange_matrix(2), [[0, 1], [1, 0]])
        assert np.array_equal(
            exchange_matrix(3), [[0, 0, 1], [0, 1, 0], [1, 0, 0]])

    def test_exchange_is_involution(self):
        for d in (1, 2, 5):
            e = exchange_matrix(d)
            assert np.array_equal(e, e.T)
            assert np.array_equal(e @ e, np.eye(d))

    def test_reverse_hand_example(self):
        assert np.array_equal(reverse([[1.0, 2.0], [3.0, 4.0]]),
                              [[4.0, 2.0], [3.0, 1.0]])

    def test_reverse_equals_exchange_conjugation(self):
        rng = np.random.default_rng(0)
        a = rng.standard_normal((3, 5))
        want = exchange_matrix(5) @ a.T @ exchange_matrix(3)
        assert np.max(np.abs(reverse(a) - want)) < 1e-15

    def test_double_reverse_identity_exact(self):
        rng = np.random.default_rng(1)
        for shape in [(3, 5), (1, 1), (4, 2), (6, 6)]:
            a = rng.standard_normal(shape)
            assert np.array_equal(reverse(reverse(a)), a)

    def test_product_rule(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            p, q, r = rng.integers(1, 6, 3)
            a = rng.standard_normal((q, r))
            b = rng.standard_normal((p, q))
            assert np.max(np.abs(reverse(a) @ reverse(b) - reverse(b @ a))) < 1e-12

    def test_inverse_rule(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            d = int(rng.integers(1, 7))
            a = rng.standard_normal((d, d)) + 2.0 * np.eye(d)
            lhs = np.linalg.inv(reverse(a))
            rhs = reverse(np.linalg.inv(a))
            assert np.max(np.abs(lhs - rhs)) < 1e-9

    def test_reverse_maps_block_triangular_structure(self):
        rng = np.random.default_rng(4)
        s = random_lower_set(rng, 4, 2, 3)
        rev = reverse(s.materialize())
        # extraction with tol=0 verifies every off-pattern entry is exactly 0
        back = BlockTriangularSet.from_dense(rev, 4, 3, 2, tol=0.0)
        assert back.shape == (12, 8)


class TestKronLift:
    def test_scalar_lift(self):
        assert np.array_equal(kron_lift([[2.0]], 2), [[2, 0], [0, 2]])

    def test_eta_one_identity(self):
        h = np.array([[1.0, 0.0], [0.0, 1.0]])
        assert np.array_equal(kron_lift(h, 1), h)

    def test_reverse_commutes_with_lift(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            h = rng.standard_normal((int(rng.integers(1, 4)),
                                     int(rng.integers(1, 4))))
            eta = int(rng.integers(1, 5))
            assert np.max(np.abs(reverse(kron_lift(h, eta))
                                 - kron_lift(reverse(h), eta))) < 1e-15


class TestBlockTriangularSet:
    def test_rejects_bad_indices_and_shapes(self):
        with pytest.raises(DimensionMismatchError):
            BlockTriangularSet(2, 1, 1, {(1, 1): np.eye(1)})
        with pytest.raises(DimensionMismatchError):
            BlockTriangularSet(2, 1, 1, {(2, 1): np.eye(2)})

    def test_materialize_roundtrip(self):
        rng = np.random.default_rng(6)
        s = random_lower_set(rng, 3, 2, 1)
        back = BlockTriangularSet.from_dense(s.materialize(), 3, 2, 1)
        assert back.allclose(s, tol=0.0)

    def test_from_dense_rejects_upper_content(self):
        m = np.triu(np.ones((4, 4)), k=1)
        with pytest.raises(DimensionMismatchError):
            BlockTriangularSet.from_dense(m, 4, 1, 1, tol=1e-12)


class TestOmegaMaps:
    def _channels(self, rng, eta, nu1, nu2, kappa):
        h1 = rng.standard_normal((nu1, kappa))
        h2 = rng.standard_normal((nu2, kappa))
        return kron_lift(h1, eta), kron_lift(h2, eta)

    def test_zero_fixed_point(self):
        rng = np.random.default_rng(7)
        h1b, h2b = self._channels(rng, 3, 2, 1, 2)
        a1 = BlockTriangularSet.zeros(3, 2, 2)
        a2 = BlockTriangularSet.zeros(3, 2, 1)
        b1, b2 = omega(a1, a2, h1b, h2b)
        assert b1.is_zero() and b2.is_zero()

    def test_eta2_scalar_expansion(self):
        # One sub-diagonal block: products of two strictly-lower factors
        # vanish, so the map is the identity on the single blocks.
        a1 = BlockTriangularSet(2, 1, 1, {(2, 1): np.array([[0.7]])})
        a2 = BlockTriangularSet(2, 1, 1, {(2, 1): np.array([[-0.4]])})
        eye = np.eye(2)
        b1, b2 = omega(a1, a2, eye, eye)
        assert abs(b1.blocks[(2, 1)][0, 0] - 0.7) < 1e-15
        assert abs(b2.blocks[(2, 1)][0, 0] + 0.4) < 1e-15

    @pytest.mark.parametrize("eta", [1, 2, 3, 4])
    def test_omega_roundtrip(self, eta):
        rng = np.random.default_rng(8 + eta)
        for _ in range(13):
            nu1, nu2, kappa = rng.integers(1, 3, 3)
            h1b, h2b = self._channels(rng, eta, nu1, nu2, kappa)
            a1 = random_lower_set(rng, eta, kappa, nu1)
            a2 = random_lower_set(rng, eta, kappa, nu2)
            b1, b2 = omega(a1, a2, h1b, h2b)
            r1, r2 = omega_inv(b1, b2, h1b, h2b)
            assert r1.allclose(a1, 1e-10) and r2.allclose(a2, 1e-10)

    @pytest.mark.parametrize("eta", [1, 2, 3, 4])
    def test_omega_tilde_roundtrip(self, eta):
        rng = np.random.default_rng(20 + eta)
        for _ in range(13):
            nu1, nu2, kappa = rng.integers(1, 3, 3)
            h1b, h2b = self._channels(rng, eta, nu1, nu2, kappa)
            c1 = random_lower_set(rng, eta, nu1, kappa)
            c2 = random_lower_set(rng, eta, nu2, kappa)
            d1, d2 = omega_tilde(c1, c2, h1b.T, h2b.T)
            r1, r2 = omega_tilde_inv(d1, d2, h1b.T, h2b.T)
            assert r1.allclose(c1, 1e-10) and r2.allclose(c2, 1e-10)

    def test_omega_tilde_one_sided_zero_preserved(self):
        rng = np.random.default_rng(30)
        h1b, h2b = self._channels(rng, 3, 1, 1, 1)
        c1 = random_lower_set(rng, 3, 1, 1)
        c2 = BlockTriangularSet.zeros(3, 1, 1)
        d1, d2 = omega_tilde(c1, c2, h1b.T, h2b.T)
        assert d2.is_zero()

    def test_outputs_structurally_lower(self):
        rng = np.random.default_rng(31)
        h1b, h2b = self._channels(rng, 4, 2, 1, 2)
        c1 = random_lower_set(rng, 4, 2, 2)
        c2 = random_lower_set(rng, 4, 1, 2)
        d1, d2 = omega_tilde(c1, c2, h1b.T, h2b.T)
        # from_dense inside omega_tilde already enforces the zero pattern;
        # verify the materialization explicitly against a 1e-12 scan
        for d in (d1, d2):
            m = d.materialize()
            r, c = d.block_rows, d.block_cols
            for l in range(1, 5):
                for tau in range(l, 5):
                    blk = m[(l - 1) * r:l * r, (tau - 1) * c:tau * c]
                    assert np.max(np.abs(blk), initial=0.0) < 1e-12

    def test_dimension_mismatch_raises(self):
        a1 = BlockTriangularSet.zeros(2, 1, 1)
        a2 = BlockTriangularSet.zeros(2, 1, 1)
        with pytest.raises(DimensionMismatchError):
            omega(a1, a2, np.eye(3), np.eye(2))


class TestPsdSqrt:
    def test_identity(self):
        assert np.array_equal(psd_sqrt(np.eye(3)), np.eye(3))

    def test_diagonal(self):
        got = psd_sqrt(np.diag([4.0, 9.0]))
        assert np.max(np.abs(got - np.diag([2.0, 3.0]))) < 1e-12

    def test_random_residuals(self):
        rng = np.random.default_rng(32)
        for _ in range(100):
            d = int(rng.integers(1, 7))
            g = rng.standard_normal((d, d))
            m = g.T @ g + np.eye(d)
            q = psd_sqrt(m)
            assert np.max(np.abs(q - q.T)) == 0.0
            assert np.min(np.linalg.eigvalsh(q)) > 0
            assert np.max(np.abs(q @ q - m)) < 1e-9 * (1 + np.max(np.abs(m)))

    def test_rejects_asymmetric(self):
        with pytest.raises(NotSymmetricError):
            psd_sqrt(np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_rejects_indefinite(self):
        with pytest.raises(NotPositiveDefiniteError):
            psd_sqrt(np.diag([1.0, -0.1]))
        with pytest.raises(NotPositiveDefiniteError):
            psd_sqrt(np.diag([1.0, 0.0]))


class TestWhiteningTargets:
    def test_zero_designs_give_identity(self):
        d0 = BlockTriangularSet.zeros(2, 1, 1)
        m1, m2 = mac_M_matrices(d0, d0, np.eye(2), np.eye(2))
        assert np.array_equal(m1, np.eye(2)) and np.array_equal(m2, np.eye(2))
        b0 = BlockTriangularSet.zeros(2, 1, 1)
        n1, n2 = bc_N_matrices(b0, b0, np.eye(2), np.eye(2))
        assert np.array_equal(n1, np.eye(2)) and np.array_equal(n2, np.eye(2))

    def test_eta2_siso_hand_expansion(self):
        d1v, d2v = 0.8, -0.3
        d1 = BlockTriangularSet(2, 1, 1, {(2, 1): np.array([[d1v]])})
        d2 = BlockTriangularSet(2, 1, 1, {(2, 1): np.array([[d2v]])})
        m1, _ = mac_M_matrices(d1, d2, np.eye(2), np.eye(2))
        want = np.array([[1 + d1v ** 2 + d2v ** 2, d1v], [d1v, 1.0]])
        assert np.max(np.abs(m1 - want)) < 1e-15

    def test_symmetry_and_definiteness_on_random(self):
        rng = np.random.default_rng(33)
        for _ in range(30):
            eta = int(rng.integers(1, 4))
            nu1, nu2, kappa = rng.integers(1, 3, 3)
            h1t = kron_lift(rng.standard_normal((nu1, kappa)), eta).T
            h2t = kron_lift(rng.standard_normal((nu2, kappa)), eta).T
            d1 = random_lower_set(rng, eta, nu1, kappa)
            d2 = random_lower_set(rng, eta, nu2, kappa)
            for m in mac_M_matrices(d1, d2, h1t, h2t):
                assert np.max(np.abs(m - m.T)) < 1e-12
                assert np.min(np.linalg.eigvalsh(m)) > 0
            b1 = reverse_set(d1)
            b2 = reverse_set(d2)
            for n in bc_N_matrices(b1, b2, h1t.T, h2t.T):
                assert np.max(np.abs(n - n.T)) < 1e-12

    def test_bc_targets_are_exchange_conjugated_mac_targets(self):
        # With B_i the reverse of D_i and the downlink run on H_i, the
        # uplink targets on the reversed channels satisfy N_i = E M_i E.
        rng = np.random.default_rng(34)
        for _ in range(20):
            eta = int(rng.integers(1, 4))
            nu1, nu2, kappa = rng.integers(1, 3, 3)
            h1 = rng.standard_normal((nu1, kappa))
            h2 = rng.standard_normal((nu2, kappa))
            d1 = random_lower_set(rng, eta, nu1, kappa)
            d2 = random_lower_set(rng, eta, nu2, kappa)
            m1, m2 = mac_M_matrices(d1, d2, kron_lift(reverse(h1), eta),
                                    kron_lift(reverse(h2), eta))
            n1, n2 = bc_N_matrices(reverse_set(d1), reverse_set(d2),
                                   kron_lift(h1, eta), kron_lift(h2, eta))
            for n, m in ((n1, m1), (n2, m2)):
                e = exchange_matrix(n.shape[0])
                assert np.max(np.abs(n - e @ m @ e)) < 1e-10
