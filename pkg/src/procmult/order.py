"""Nondominated and minimal points of finite sets under a cone order."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptySet
from .geometry import ConvexCone, SpaceSpec

__all__ = ["OrderedSample", "is_nondominated", "min_set", "nd_check_program", "lex_sorted"]


@dataclass(frozen=True)
class OrderedSample:
    """A finite point set ``A`` ordered by the cone ``cone``."""

    space: SpaceSpec
    cone: ConvexCone
    points: np.ndarray

    def __post_init__(self):
        if self.cone.dim != self.space.dim:
            raise DimensionMismatch("cone and space dimensions differ")
        pts = np.asarray(self.points, dtype=float)
        if pts.size == 0:
            pts = pts.reshape(0, self.space.dim)
        object.__setattr__(self, "points", self.space.check(np.atleast_2d(pts)))

    @classmethod
    def of(cls, points, cone: ConvexCone) -> "OrderedSample":
        return cls(cone.space, cone, points)


def lex_sorted(points: np.ndarray) -> np.ndarray:
    points = np.atleast_2d(points)
    if len(points) == 0:
        return points
    return points[np.lexsort(points.T[::-1])]


def _nd_mask(points: np.ndarray, y0: np.ndarray, cone: ConvexCone) -> np.ndarray:
    """True where ``a`` breaks nondominance of ``y0``."""
    below = np.asarray(cone.contains(y0 - points), dtype=bool).reshape(-1)
    if not np.any(below):
        return below
    above = np.asarray(cone.contains(points[below] - y0), dtype=bool).reshape(-1)
    bad = below.copy()
    bad[below] = ~above
    return bad


def is_nondominated(y0, sample: OrderedSample) -> bool:
    """``A cap (y0 - K) subset y0 + K``.

    Every point of ``A`` lying below ``y0`` must also lie above it; for a
    pointed cone that means it equals ``y0`` (up to tolerance).
    """
    y0 = sample.space.check(y0)
    if y0.ndim != 1:
        raise DimensionMismatch("y0 must be a single vector")
    if len(sample.points) == 0:
        return True
    return not bool(np.any(_nd_mask(sample.points, y0, sample.cone)))


def min_set(sample: OrderedSample) -> np.ndarray:
    """The minimal elements of ``A``, lexicographically sorted."""
    pts = sample.points
    if len(pts) == 0:
        raise EmptySet("min_set of an empty set")
    cone = sample.cone
    # pairwise differences a_i - a_j, one membership call for the whole table
    diff = pts[None, :, :] - pts[:, None, :]
    below = np.asarray(cone.contains(-diff), dtype=bool)  # row i: y0 - a_j in K
    above = np.asarray(cone.contains(diff), dtype=bool)
    keep = ~np.any(below & ~above, axis=1)
    return lex_sorted(pts[keep])


def nd_check_program(value_set, y0, cone: ConvexCone) -> bool:
    """Whether ``y0`` is nondominated by the sampled program values.

    An empty value set means the regularity requirement ``V(z) != {}``
    fails, which is reported as :class:`EmptySet`.
    """
    pts = np.asarray(value_set, dtype=float)
    if pts.size == 0:
        raise EmptySet("the value set is empty (regularity violated)")
    return is_nondominated(y0, OrderedSample.of(pts.reshape(-1, cone.dim), cone))
