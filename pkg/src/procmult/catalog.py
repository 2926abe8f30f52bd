"""Named maps used by problem files and the bundled examples."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["CatalogEntry", "CATALOG", "lookup", "half_disc_grid", "grid_points"]


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    fn: Callable
    codomain_dim: Callable[[int], int]
    domain_dim: int | None = None  # None: any dimension
    shift: str | None = None  # "orthant": values are shifted by the orthant
    description: str = ""


def _e38_f(x):
    return [(x[0] ** 2 + x[1] ** 2, x[1] ** 2 + x[0] * x[1])]


def _e38_g(x):
    return [(x[0],)]


CATALOG = {
    e.name: e
    for e in [
        CatalogEntry("example_3_8_F", _e38_f, lambda n: 2, 2,
                     description="(x1^2 + x2^2, x2^2 + x1 x2)"),
        CatalogEntry("example_3_8_G", _e38_g, lambda n: 1, 2, description="x1"),
        CatalogEntry("example_3_9_F_n", lambda x: [np.square(x)], lambda n: n, None, "orthant",
                     description="(x_i^2) + R^n_+"),
        CatalogEntry("example_3_9_G_n", lambda x: [np.power(x, 3)], lambda n: n,
                     description="(x_i^3)"),
        CatalogEntry("parabola_f", lambda x: [(-x[0] ** 2,)], lambda n: 1, 1, description="-x^2"),
        CatalogEntry("identity_g", lambda x: [np.asarray(x, dtype=float)], lambda n: n,
                     description="x"),
        CatalogEntry("cube_g", lambda x: [np.power(x, 3)], lambda n: n, description="x^3"),
        CatalogEntry("abs_shift_f", lambda x: [(abs(x[0] - 0.5),)], lambda n: 1, 1,
                     description="|x - 0.5|"),
    ]
}


def lookup(name: str) -> CatalogEntry:
    try:
        return CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown catalog map {name!r}; known: {sorted(CATALOG)}") from None


def grid_points(ranges) -> np.ndarray:
    """Cartesian grid from ``(start, stop, step)`` triples.

    Points are built from integer multiples of the step so that values such
    as ``0`` and ``+-1`` are hit exactly.
    """
    axes = []
    for start, stop, step in ranges:
        if step <= 0 or stop < start:
            raise ValueError("grid ranges need step > 0 and stop >= start")
        n = int(round((stop - start) / step)) + 1
        axes.append(np.round(start + step * np.arange(n), 12) + 0.0)
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.reshape(-1) for m in mesh])


def half_disc_grid(step: float = 0.05) -> np.ndarray:
    """``{x : |x| <= 1, x2 >= 0}`` sampled on a square grid."""
    pts = grid_points([(-1.0, 1.0, step), (0.0, 1.0, step)])
    return pts[np.sum(pts ** 2, axis=1) <= 1.0 + 1e-12]
