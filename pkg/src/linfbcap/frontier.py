"""Pareto frontiers of achievable rate pairs.

A frontier stores the componentwise-undominated corner points of a rate
region, sorted by ascending R1.  Regions are convex (time sharing), so
queries against a frontier interpolate along the concave upper envelope
of its points: any point on or below that envelope is achievable.
"""

import numpy as np

from . import _kernels

__all__ = ["RegionFrontier", "hausdorff_distance"]


def _upper_envelope(points):
    """Upper concave hull of frontier points (input sorted by ascending R1)."""
    if points.shape[0] <= 2:
        return points
    hull = [points[0]]
    for p in points[1:]:
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
            if cross >= 0.0:
                hull.pop()
            else:
                break
        hull.append(p)
    return np.array(hull)


class RegionFrontier:
    """Pareto-dominant rate pairs (R1, R2) in bits per channel use."""

    def __init__(self, points, meta=None):
        pts = np.asarray(points, dtype=np.float64)
        if pts.size == 0:
            pts = np.zeros((1, 2))
        pts = pts.reshape(-1, 2)
        if np.any(pts < -1e-12):
            raise ValueError("rates must be nonnegative")
        self.points = np.clip(pts, 0.0, None)
        self.meta = dict(meta or {})
        self._envelope = None

    @classmethod
    def from_points(cls, raw_points, meta=None, tol=1e-12):
        """Pareto-filter a cloud of achievable corner points."""
        pts = np.asarray(raw_points, dtype=np.float64).reshape(-1, 2)
        pts = np.clip(pts, 0.0, None)
        return cls(_kernels.pareto_filter(pts, tol), meta)

    def __len__(self):
        return self.points.shape[0]

    def max_sum(self):
        """Largest R1 + R2 over the stored points."""
        return float(np.max(self.points.sum(axis=1)))

    def max_r1(self):
        return float(self.points[-1, 0])

    def max_r2(self):
        return float(self.points[0, 1])

    def envelope(self):
        if self._envelope is None:
            self._envelope = _upper_envelope(self.points)
        return self._envelope

    def r2_at(self, r1):
        """Largest achievable R2 at abscissa r1, by time sharing.

        Interpolates the concave envelope; left of the first point the
        leftmost R2 is achievable (excess R1 discarded), right of the
        last point the region ends and -inf is returned.
        """
        env = self.envelope()
        r1 = np.asarray(r1, dtype=np.float64)
        out = np.interp(r1, env[:, 0], env[:, 1], left=env[0, 1], right=-np.inf)
        # np.interp cannot signal out-of-range on the right with a finite
        # frontier ending at R2=0, so patch values just past max R1.
        out = np.where(r1 <= env[-1, 0] + 1e-12,
                       np.where(r1 > env[-1, 0], env[-1, 1], out), -np.inf)
        return out if out.ndim else float(out)

    def dominates(self, other, slack=0.0):
        """True when every point of ``other`` is covered within ``slack``."""
        return bool(self.dominance_margin(other) >= -slack)

    def dominance_margin(self, other):
        """min over other's points of (own envelope height - other R2)."""
        heights = self.r2_at(other.points[:, 0])
        return float(np.min(heights - other.points[:, 1]))

    def scaled(self, factor):
        return RegionFrontier(self.points * factor, self.meta)

    def check_invariants(self):
        """Raise when the stored list is not a sorted Pareto frontier."""
        p = self.points
        if np.any(p < 0):
            raise ValueError("negative rate in frontier")
        if p.shape[0] > 1:
            if np.any(np.diff(p[:, 0]) <= 0):
                raise ValueError("R1 not strictly increasing")
            if np.any(np.diff(p[:, 1]) >= 0):
                raise ValueError("R2 not strictly decreasing")
        return True


def hausdorff_distance(a, b):
    """Symmetric Hausdorff distance between two frontiers' point sets."""
    pa, pb = a.points, b.points
    d = np.sqrt(((pa[:, None, :] - pb[None, :, :]) ** 2).sum(axis=2))
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))
