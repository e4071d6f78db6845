import numpy as np
import pytest

from linfbcap import _kernels


def brute_pareto(points):
    pts = np.asarray(points)
    keep = []
    for i, p in enumerate(pts):
        dominated = False
        for j, q in enumerate(pts):
            if i == j:
                continue
            if q[0] >= p[0] and q[1] >= p[1] and (q[0] > p[0] or q[1] > p[1]):
                dominated = True
                break
        if not dominated:
            keep.append(tuple(p))
    return sorted(set(keep))


def test_pareto_matches_bruteforce():
    rng = np.random.default_rng(0)
    for _ in range(20):
        pts = rng.uniform(0, 1, (40, 2))
        got = _kernels.pareto_filter(pts, tol=0.0)
        want = brute_pareto(pts)
        assert [tuple(p) for p in got] == want


def test_pareto_handles_ties_and_duplicates():
    pts = np.array([[1.0, 1.0], [1.0, 1.0], [1.0, 0.5], [0.5, 1.0], [2.0, 0.0]])
    got = _kernels.pareto_filter(pts, tol=0.0)
    assert [tuple(p) for p in got] == [(1.0, 1.0), (2.0, 0.0)]


def test_pareto_output_sorted_and_undominated():
    rng = np.random.default_rng(1)
    pts = rng.uniform(0, 2, (500, 2))
    got = _kernels.pareto_filter(pts)
    assert np.all(np.diff(got[:, 0]) > 0)
    assert np.all(np.diff(got[:, 1]) < 0)


def test_rho_star_grid_residuals():
    rng = np.random.default_rng(2)
    a = rng.uniform(0, 50, 1000)
    b = rng.uniform(0, 50, 1000)
    rho = _kernels.rho_star_grid(a, b)
    lhs = 1 + a + b + 2 * np.sqrt(a * b) * rho
    s = 1 - rho ** 2
    rhs = (1 + a * s) * (1 + b * s)
    assert np.max(np.abs(lhs - rhs) / (1 + np.abs(lhs))) < 1e-12
    assert np.all(rho >= 0) and np.all(rho <= 1)


def test_rho_star_degenerate_is_zero():
    a = np.array([0.0, 5.0, 0.0])
    b = np.array([3.0, 0.0, 0.0])
    assert np.all(_kernels.rho_star_grid(a, b) == 0.0)


@pytest.mark.skipif(not _kernels.HAS_NUMBA, reason="numba unavailable")
def test_backends_agree():
    rng = np.random.default_rng(3)
    a = rng.uniform(0, 30, 500)
    b = rng.uniform(0, 30, 500)
    rho = rng.uniform(0, 1, 500)
    s = a + b + 2 * np.sqrt(a * b) * rho
    assert np.max(np.abs(_kernels.rho_star_grid_numba(a, b)
                         - _kernels.rho_star_grid_numpy(a, b))) < 1e-15
    assert np.max(np.abs(_kernels.pentagon_corners_numba(a, b, s)
                         - _kernels.pentagon_corners_numpy(a, b, s))) < 1e-15
    pts = rng.uniform(0, 1, (300, 2))
    fa = _kernels.pareto_filter_numba(pts)
    fb = _kernels.pareto_filter_numpy(pts)
    assert fa.shape == fb.shape and np.max(np.abs(fa - fb)) == 0.0
