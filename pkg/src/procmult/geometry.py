"""
Finite-dimensional convex cone algebra.

Cones come in three representations:

* :class:`Sector` -- a planar cone given by an angle interval. This is the
  exact reference path; every 2-D cone can be converted to one.
* :class:`Generators` -- ``cone(r_1, ..., r_k)``, the nonnegative combinations
  of a finite ray list.
* :class:`Halfspaces` -- ``{y : g_i . y >= 0 for all i}``.

Membership is tolerance based: ``y`` belongs to ``K`` when the euclidean
distance from ``y`` to ``K`` is at most ``tol * max(1, |y|)``.

The dilation operators ``C_eps`` (conic neighbourhood) and ``C_(B,eps)``
(Henig dilating cone) are exact in the plane and in 1-D. In higher dimensions
they are inner approximations generated by sampled rays, see
:func:`dilate_eps`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import linprog, minimize, nnls

from .errors import (
    DegenerateCone,
    DimensionMismatch,
    EmptySet,
    EpsilonOutOfRange,
    EpsilonTooLarge,
    NoBase,
    NotQuasiInterior,
    SeparationViolated,
)

__all__ = [
    "EXACT_TOL",
    "SAMPLED_TOL",
    "SpaceSpec",
    "ConvexCone",
    "Sector",
    "Generators",
    "Halfspaces",
    "ConeBase",
    "orthant",
    "cone_contains",
    "dual_cone",
    "quasi_interior_functional",
    "base_from_functional",
    "dilate_eps",
    "dilation_contains",
    "henig_dilate",
    "henig_bounded_base",
    "rescale_base_for_separation",
    "distance_to_set",
    "cone_from_spec",
    "cone_to_spec",
]

EXACT_TOL = 1e-9
SAMPLED_TOL = 1e-6
TWO_PI = 2.0 * math.pi

# Number of rays used by the sampled (n-D) dilation paths.
DILATION_SAMPLES = 4000


# ---------------------------------------------------------------------------
# spaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpaceSpec:
    """A finite-dimensional normed space ``R^dim``.

    ``norm`` is one of ``"euclidean"``, ``"supremum"`` or ``"abs"`` (the
    absolute value, only for ``dim == 1``).
    """

    dim: int
    norm: str = "euclidean"

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim!r}")
        if self.norm not in ("euclidean", "supremum", "abs"):
            raise ValueError(f"unknown norm {self.norm!r}")
        if self.norm == "abs" and self.dim != 1:
            raise ValueError("the absolute-value norm needs dim == 1")

    def check(self, v) -> np.ndarray:
        """Return ``v`` as a float array whose last axis has length ``dim``."""
        a = np.asarray(v, dtype=float)
        if a.ndim == 0 and self.dim == 1:
            a = a.reshape(1)
        if a.shape[-1:] != (self.dim,):
            raise DimensionMismatch(
                f"expected vectors of dimension {self.dim}, got shape {a.shape}"
            )
        return a

    def norm_of(self, v) -> np.ndarray:
        a = self.check(v)
        if self.norm == "supremum":
            return np.max(np.abs(a), axis=-1)
        return np.linalg.norm(a, axis=-1)

    def dual_norm_of(self, f) -> np.ndarray:
        a = self.check(f)
        if self.norm == "supremum":
            return np.sum(np.abs(a), axis=-1)
        return np.linalg.norm(a, axis=-1)

    def sphere_samples(self, n: int, rng=None) -> np.ndarray:
        """Points of the unit sphere: the signed axis vectors first, then
        ``n`` random directions rescaled to unit norm."""
        rng = np.random.default_rng(rng)
        eye = np.eye(self.dim)
        axes = np.concatenate([eye, -eye])
        if self.dim == 1:
            return axes
        if self.dim == 2:
            t = np.linspace(0.0, TWO_PI, max(n, 4), endpoint=False)
            pts = np.column_stack([np.cos(t), np.sin(t)])
        else:
            pts = rng.standard_normal((n, self.dim))
        pts = np.concatenate([axes, pts])
        return pts / self.norm_of(pts)[:, None]

    def ball_samples(self, n: int, rng=None) -> np.ndarray:
        """Points of the closed unit ball (sphere points with random radii,
        plus the sphere itself and the origin)."""
        rng = np.random.default_rng(rng)
        sph = self.sphere_samples(n, rng)
        r = rng.uniform(0.0, 1.0, size=len(sph)) ** (1.0 / self.dim)
        return np.concatenate([np.zeros((1, self.dim)), sph, sph * r[:, None]])


def _unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    return v / np.where(n > 0, n, 1.0)


def _angle(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return np.mod(np.arctan2(v[..., 1], v[..., 0]), TWO_PI)


def _ray(theta: float) -> np.ndarray:
    return np.array([math.cos(theta), math.sin(theta)])


def _rel_tol(y: np.ndarray, tol: float) -> np.ndarray:
    return tol * np.maximum(1.0, np.linalg.norm(y, axis=-1))


# ---------------------------------------------------------------------------
# cones
# ---------------------------------------------------------------------------

class ConvexCone:
    """Common interface of the three cone representations.

    Subclasses implement ``_distance`` (euclidean distance to the cone for an
    ``(m, dim)`` array) and ``extreme_rays``. Everything else is shared.
    """

    space: SpaceSpec
    default_tol: float = EXACT_TOL

    @property
    def dim(self) -> int:
        return self.space.dim

    def contains(self, y, tol: float | None = None):
        """Tolerance membership; vectorised over leading axes of ``y``."""
        tol = self.default_tol if tol is None else tol
        y = self.space.check(y)
        flat = y.reshape(-1, self.dim)
        out = self._distance(flat) <= _rel_tol(flat, tol)
        out = out.reshape(y.shape[:-1])
        return bool(out) if out.ndim == 0 else out

    def distance(self, y) -> np.ndarray:
        y = self.space.check(y)
        flat = y.reshape(-1, self.dim)
        d = self._distance(flat).reshape(y.shape[:-1])
        return float(d) if d.ndim == 0 else d

    def project(self, y) -> np.ndarray:
        """Euclidean projection onto the cone (vectorised)."""
        y = self.space.check(y)
        flat = y.reshape(-1, self.dim)
        return self._project(flat).reshape(y.shape)

    # -- structure ----------------------------------------------------------
    @cached_property
    def sector(self) -> "Sector":
        """The same cone as an exact planar sector (2-D only)."""
        if self.dim != 2:
            raise DimensionMismatch("sector form exists only in dimension 2")
        return self._to_sector()

    @cached_property
    def is_pointed(self) -> bool:
        try:
            quasi_interior_functional(self)
        except NoBase:
            return False
        return True

    def is_solid(self) -> bool:
        """True when the cone has nonempty interior (= nonempty core)."""
        if self.dim == 1:
            return True
        if self.dim == 2:
            return self.sector.width > 1e-12
        rays = self.extreme_rays()
        return np.linalg.matrix_rank(rays, tol=1e-10) == self.dim

    def sample_rays(self, n: int, rng=None) -> np.ndarray:
        """Unit (euclidean) members: the extreme rays first, then random ones."""
        rng = np.random.default_rng(rng)
        if self.dim == 2:
            return self.sector.sample_rays(n, rng)
        rays = _unit(self.extreme_rays())
        if n <= 0:
            return rays
        w = rng.dirichlet(np.full(len(rays), 0.5), size=n)
        mix = _unit(w @ rays)
        return np.concatenate([rays, mix[np.linalg.norm(mix, axis=1) > 0]])

    def sample_members(self, n: int, rng=None, radius: float = 1.0) -> np.ndarray:
        rng = np.random.default_rng(rng)
        rays = self.sample_rays(n, rng)
        r = rng.uniform(0.0, radius, size=len(rays))
        return np.concatenate([np.zeros((1, self.dim)), rays * r[:, None]])

    def _check_nontrivial(self):
        eye = np.eye(self.dim)
        if all(self.contains(v) for v in np.concatenate([eye, -eye])):
            raise DegenerateCone("cone is the whole space")


def _arc_of_angles(angles: np.ndarray) -> tuple[float, float]:
    """Smallest arc (start, width) containing all the given directions."""
    a = np.sort(np.mod(angles, TWO_PI))
    gaps = np.diff(np.concatenate([a, [a[0] + TWO_PI]]))
    i = int(np.argmax(gaps))
    start = a[(i + 1) % len(a)]
    return float(start), float(TWO_PI - gaps[i])


class Sector(ConvexCone):
    """Planar cone ``{r (cos t, sin t) : r >= 0, start <= t <= start + width}``.

    Angles are radians; ``start`` is normalised to ``[0, 2 pi)``. A width up
    to ``pi`` gives a convex cone. Wider sectors only arise as dilations of
    wide cones and are kept as (non-convex) ray unions.
    """

    def __init__(self, start: float, width: float, space: SpaceSpec | None = None):
        self.space = space or SpaceSpec(2)
        if self.space.dim != 2:
            raise DimensionMismatch("Sector lives in dimension 2")
        if not (0.0 <= width < TWO_PI - 1e-12):
            raise DegenerateCone(f"sector width {width} must lie in [0, 2*pi)")
        self.start = float(start) % TWO_PI
        self.width = float(width)

    @classmethod
    def from_degrees(cls, lo: float, hi: float, space: SpaceSpec | None = None) -> "Sector":
        return cls(math.radians(lo), math.radians(hi - lo), space)

    @property
    def end(self) -> float:
        return self.start + self.width

    @property
    def degrees(self) -> tuple[float, float]:
        """Angle interval in degrees with the start in ``(-180, 180]``."""
        s = math.degrees(self.start)
        if s > 180.0:
            s -= 360.0
        return s, s + math.degrees(self.width)

    @property
    def is_convex(self) -> bool:
        return self.width <= math.pi + 1e-12

    def boundary_rays(self) -> np.ndarray:
        if self.width == 0.0:
            return _ray(self.start)[None, :]
        return np.array([_ray(self.start), _ray(self.end)])

    def extreme_rays(self) -> np.ndarray:
        return self.boundary_rays()

    def _to_sector(self):
        return self

    def _gap(self, y: np.ndarray) -> np.ndarray:
        rel = np.mod(_angle(y) - self.start, TWO_PI)
        inside = rel <= self.width
        gap = np.minimum(rel - self.width, TWO_PI - rel)
        return np.where(inside, 0.0, gap)

    def _distance(self, y):
        r = np.linalg.norm(y, axis=-1)
        g = self._gap(y)
        return np.where(g < math.pi / 2, r * np.sin(g), r)

    def _project(self, y):
        out = y.copy()
        g = self._gap(y)
        rel = np.mod(_angle(y) - self.start, TWO_PI)
        for i in np.nonzero(g > 0)[0]:
            to_end = rel[i] - self.width
            u = _ray(self.end) if to_end <= TWO_PI - rel[i] else _ray(self.start)
            out[i] = max(float(u @ y[i]), 0.0) * u
        return out

    def sample_rays(self, n, rng=None):
        rng = np.random.default_rng(rng)
        t = self.start + self.width * rng.uniform(0.0, 1.0, size=max(n, 0))
        return np.concatenate([self.boundary_rays(), np.column_stack([np.cos(t), np.sin(t)])])

    def widened(self, left: float, right: float | None = None) -> "Sector":
        right = left if right is None else right
        w = self.width + left + right
        if w >= TWO_PI - 1e-12:
            raise DegenerateCone("the dilation covers the whole plane")
        return Sector(self.start - left, w, self.space)

    def __repr__(self):
        lo, hi = self.degrees
        return f"Sector([{lo:.6g}deg, {hi:.6g}deg])"


class Generators(ConvexCone):
    """``cone(rays)``: nonnegative combinations of the rows of ``rays``.

    ``sampled=True`` marks cones produced by the sampled dilation path; their
    default membership tolerance is ``SAMPLED_TOL``.
    """

    def __init__(self, rays, space: SpaceSpec | None = None, sampled: bool = False,
                 check: bool = True):
        rays = np.atleast_2d(np.asarray(rays, dtype=float))
        self.space = space or SpaceSpec(rays.shape[1])
        rays = self.space.check(rays)
        norms = np.linalg.norm(rays, axis=1)
        if np.any(norms == 0.0):
            raise DegenerateCone("generator list contains the zero vector")
        if len(rays) == 0:
            raise DegenerateCone("no generators")
        self.rays = rays
        self.sampled = sampled
        self.default_tol = SAMPLED_TOL if sampled else EXACT_TOL
        if check:
            self._check_nontrivial()
            if self.dim == 2:
                self.sector  # rejects lines

    @cached_property
    def _simplicial(self):
        # independent square generator matrix: membership is a sign test
        if len(self.rays) != self.dim:
            return None
        if np.linalg.matrix_rank(self.rays, tol=1e-12) < self.dim:
            return None
        return np.linalg.inv(self.rays.T)

    def extreme_rays(self):
        return self.rays

    def _is_whole(self) -> bool:
        eye = np.eye(self.dim)
        return bool(np.all(ConvexCone.contains(self, np.concatenate([eye, -eye]))))

    def _distance(self, y):
        return np.linalg.norm(y - self._project(y), axis=-1)

    def _project(self, y):
        inv = self._simplicial
        out = np.empty_like(y)
        for i, v in enumerate(y):
            if inv is not None:
                c = inv @ v
                if np.all(c >= 0.0):
                    out[i] = v
                    continue
            coef, _ = nnls(self.rays.T, v)
            out[i] = self.rays.T @ coef
        return out

    def contains(self, y, tol=None):
        inv = self._simplicial
        if inv is None:
            return super().contains(y, tol)
        # sign test against the dual basis, scaled to a distance
        tol = self.default_tol if tol is None else tol
        y = self.space.check(y)
        flat = y.reshape(-1, self.dim)
        g = inv / np.linalg.norm(inv, axis=1, keepdims=True)
        viol = np.max(-(flat @ g.T), axis=1)
        out = (viol <= _rel_tol(flat, tol)).reshape(y.shape[:-1])
        return bool(out) if out.ndim == 0 else out

    def _to_sector(self):
        ang = _angle(self.rays)
        start, width = _arc_of_angles(ang)
        if width > math.pi + 1e-12:
            raise DegenerateCone("generators span the whole plane")
        if abs(width - math.pi) <= 1e-12:
            inner = np.mod(ang - start, TWO_PI)
            if not np.any((inner > 1e-12) & (inner < width - 1e-12)):
                raise DegenerateCone("generators span a line")
        return Sector(start, width, self.space)

    def __repr__(self):
        return f"Generators({self.rays.tolist()})"


class Halfspaces(ConvexCone):
    """``{y : g_i . y >= 0}`` for the rows ``g_i`` of ``normals``."""

    def __init__(self, normals, space: SpaceSpec | None = None, check: bool = True):
        g = np.atleast_2d(np.asarray(normals, dtype=float))
        self.space = space or SpaceSpec(g.shape[1])
        g = self.space.check(g)
        keep = np.linalg.norm(g, axis=1) > 0
        if not np.any(keep):
            raise DegenerateCone("all normals are zero: the cone is the whole space")
        self.normals = g[keep]
        if check:
            self._check_nontrivial()
            if Generators(-self.normals, self.space, check=False)._is_whole():
                raise DegenerateCone("the halfspaces cut the cone down to {0}")
            if self.dim == 2:
                self.sector  # rejects lines

    def _distance(self, y):
        g = self.normals / np.linalg.norm(self.normals, axis=1, keepdims=True)
        viol = np.max(-(y @ g.T), axis=1)
        if self.dim == 1 or len(g) == 1:
            return np.maximum(viol, 0.0)
        # exact distance (Moreau) only where the cheap bound is ambiguous
        d = np.maximum(viol, 0.0)
        bad = d > 0
        if np.any(bad):
            d[bad] = np.linalg.norm(y[bad] - self._project(y[bad]), axis=-1)
        return d

    def _project(self, y):
        polar = -self.normals
        out = np.empty_like(y)
        for i, v in enumerate(y):
            if np.all(self.normals @ v >= 0):
                out[i] = v
                continue
            coef, _ = nnls(polar.T, v)
            out[i] = v - polar.T @ coef
        return out

    def extreme_rays(self) -> np.ndarray:
        """Extreme rays of a pointed halfspace cone, by enumerating
        ``dim - 1`` active constraints."""
        rays = self._extreme
        if isinstance(rays, NoBase):
            raise rays
        return rays

    @cached_property
    def _extreme(self):
        try:
            return self._enumerate_rays()
        except NoBase as exc:
            return exc

    def _enumerate_rays(self) -> np.ndarray:
        n = self.dim
        if n == 1:
            cand = [np.array([1.0]), np.array([-1.0])]
        else:
            cand = []
            for rows in itertools.combinations(range(len(self.normals)), n - 1):
                sub = self.normals[list(rows)]
                _, s, vt = np.linalg.svd(sub)
                if np.sum(s > 1e-10) != n - 1:
                    continue
                cand += [vt[-1], -vt[-1]]
        rays = []
        for v in cand:
            if np.all(self.normals @ v >= -1e-10) and not any(
                np.allclose(v, r, atol=1e-9) for r in rays
            ):
                rays.append(v)
        if not rays:
            raise NoBase("halfspace cone is not pointed; no extreme rays")
        rays = np.array(rays)
        if n > 1:
            gens = Generators(rays, self.space, check=False)
            probe = np.random.default_rng(0).standard_normal((64, n))
            proj = self.project(probe)
            if not np.all(gens.contains(proj, tol=1e-7)):
                raise NoBase("halfspace cone is not pointed; extreme rays do not generate it")
        return rays

    def _to_sector(self):
        dual = Generators(self.normals, self.space, check=False)
        try:
            ds = dual.sector
        except DegenerateCone as exc:
            raise DegenerateCone(f"halfspace cone is degenerate ({exc})") from None
        return Sector(ds.end - math.pi / 2, math.pi - ds.width, self.space)

    def __repr__(self):
        return f"Halfspaces({self.normals.tolist()})"


def orthant(dim: int, norm: str = "euclidean") -> Generators:
    """The nonnegative orthant ``R^dim_+``."""
    return Generators(np.eye(dim), SpaceSpec(dim, "abs" if norm == "abs" else norm))


# ---------------------------------------------------------------------------
# module-level operations
# ---------------------------------------------------------------------------

def cone_contains(cone: ConvexCone, y, tol: float | None = None):
    """Membership predicate; raises :class:`DimensionMismatch` on bad input."""
    return cone.contains(y, tol)


def dual_cone(cone: ConvexCone) -> ConvexCone:
    """``K* = {f : f . y >= 0 for all y in K}`` in the same family.

    Sectors map to sectors (``[a, b] -> [b - 90deg, a + 90deg]``) and
    generator/halfspace representations swap.
    """
    if isinstance(cone, Sector):
        if not cone.is_convex:
            raise DegenerateCone("dual of a non-convex sector is not defined here")
        return Sector(cone.end - math.pi / 2, math.pi - cone.width, cone.space)
    if isinstance(cone, Generators):
        return Halfspaces(cone.rays, cone.space)
    if isinstance(cone, Halfspaces):
        return Generators(cone.normals, cone.space)
    raise TypeError(f"unsupported cone type {type(cone).__name__}")


def quasi_interior_functional(cone: ConvexCone) -> np.ndarray:
    """Return ``f`` with ``f(c) > 0`` for every nonzero member ``c``.

    The sum of the unit extreme rays is tried first (it works for every
    pointed planar cone); otherwise a small LP maximises the worst margin.
    Raises :class:`NoBase` when the cone is not well based.
    """
    if cone.dim == 2:
        s = cone.sector
        if s.width >= math.pi - 1e-12:
            raise NoBase(f"{s!r} contains a line; it has no base")
        return s.boundary_rays().sum(axis=0)
    rays = _unit(cone.extreme_rays())
    f = rays.sum(axis=0)
    if np.all(rays @ f > 1e-12):
        return f
    # max t  s.t.  r_j . f >= t,  -1 <= f_i <= 1
    n = cone.dim
    c = np.zeros(n + 1)
    c[-1] = -1.0
    a_ub = np.hstack([-rays, np.ones((len(rays), 1))])
    res = linprog(c, A_ub=a_ub, b_ub=np.zeros(len(rays)),
                  bounds=[(-1, 1)] * n + [(None, 1)], method="highs")
    if not res.success or -res.fun <= 1e-10:
        raise NoBase("no strictly positive functional exists")
    return res.x[:n]


def _min_norm_in_hull(vertices: np.ndarray, space: SpaceSpec) -> np.ndarray:
    """Point of least norm in ``conv(vertices)``."""
    if len(vertices) == 1:
        return vertices[0].copy()
    if len(vertices) == 2 and space.norm != "supremum":
        p, q = vertices
        d = q - p
        t = float(np.clip(-(p @ d) / (d @ d), 0.0, 1.0))
        return p + t * d
    k, n = vertices.shape
    if space.norm == "supremum":
        # min s  s.t. -s <= (V^T w)_i <= s, w in simplex
        c = np.zeros(k + 1)
        c[-1] = 1.0
        vt = vertices.T
        a_ub = np.vstack([np.hstack([vt, -np.ones((n, 1))]),
                          np.hstack([-vt, -np.ones((n, 1))])])
        a_eq = np.hstack([np.ones((1, k)), np.zeros((1, 1))])
        res = linprog(c, A_ub=a_ub, b_ub=np.zeros(2 * n), A_eq=a_eq, b_eq=[1.0],
                      bounds=[(0, None)] * (k + 1), method="highs")
        return vertices.T @ res.x[:k]
    gram = vertices @ vertices.T
    res = minimize(
        lambda w: w @ gram @ w,
        np.full(k, 1.0 / k),
        jac=lambda w: 2.0 * gram @ w,
        bounds=[(0.0, 1.0)] * k,
        constraints=[{"type": "eq", "fun": lambda w: w.sum() - 1.0,
                      "jac": lambda w: np.ones_like(w)}],
        method="SLSQP",
        options={"ftol": 1e-16, "maxiter": 500},
    )
    w = np.clip(res.x, 0.0, None)
    return vertices.T @ (w / w.sum())


@dataclass(frozen=True)
class ConeBase:
    """Bounded base ``B = {x in C : f(x) = level}``.

    ``vertices`` are the points where ``B`` meets the extreme rays; ``sigma``
    and ``delta`` are the largest and smallest norms over ``B`` and
    ``closest`` is a point of ``B`` where ``delta`` is attained.
    """

    cone: ConvexCone
    functional: np.ndarray
    level: float
    sigma: float
    delta: float
    vertices: np.ndarray = field(repr=False)
    closest: np.ndarray = field(repr=False)

    @property
    def space(self) -> SpaceSpec:
        return self.cone.space

    def coefficient(self, y) -> np.ndarray:
        """``lambda_y = f(y) / level`` so that ``y = lambda_y * b_y``."""
        y = self.space.check(y)
        return (y @ self.functional) / self.level

    def decompose(self, y) -> tuple[float, np.ndarray]:
        y = self.space.check(y)
        lam = float(self.coefficient(y))
        if lam <= 0:
            raise ValueError("only nonzero cone members decompose over the base")
        return lam, y / lam

    def contains(self, b, tol: float = EXACT_TOL):
        b = self.space.check(b)
        on_level = np.abs(b @ self.functional - self.level) <= tol * max(1.0, self.level)
        return np.logical_and(on_level, self.cone.contains(b, tol))

    def scaled(self, factor: float) -> "ConeBase":
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return ConeBase(self.cone, self.functional, self.level * factor,
                        self.sigma * factor, self.delta * factor,
                        self.vertices * factor, self.closest * factor)

    def sample(self, n: int, rng=None) -> np.ndarray:
        """Vertices, edge midpoints, the closest point and random convex
        combinations."""
        rng = np.random.default_rng(rng)
        v = self.vertices
        mids = [(a + b) / 2 for a, b in itertools.combinations(v, 2)]
        parts = [v, self.closest[None, :]]
        if mids:
            parts.append(np.array(mids))
        if len(v) > 1 and n > 0:
            parts.append(rng.dirichlet(np.ones(len(v)), size=n) @ v)
        return np.concatenate(parts)


def base_from_functional(cone: ConvexCone, f, level: float = 1.0) -> ConeBase:
    """Build ``B = {x in C : f(x) = level}`` and its norm bounds.

    ``sigma`` is attained at a vertex; ``delta`` is the least norm over the
    convex hull of the vertices (a closed form for segments, a small convex
    program otherwise).
    """
    f = cone.space.check(f).astype(float)
    if level <= 0:
        raise ValueError("base level must be positive")
    rays = cone.sector.boundary_rays() if cone.dim == 2 else cone.extreme_rays()
    vals = rays @ f
    if np.any(vals <= 1e-12 * np.linalg.norm(rays, axis=1) * max(1.0, np.linalg.norm(f))):
        raise NotQuasiInterior("functional is not strictly positive on the cone")
    vertices = level * rays / vals[:, None]
    sigma = float(np.max(cone.space.norm_of(vertices)))
    closest = _min_norm_in_hull(vertices, cone.space)
    delta = float(cone.space.norm_of(closest))
    return ConeBase(cone, f, float(level), sigma, delta, vertices, closest)


def _check_eps(eps: float):
    if not (0.0 < eps < 1.0):
        raise EpsilonOutOfRange(f"epsilon must lie in (0, 1), got {eps}")


def dilate_eps(cone: ConvexCone, eps: float, samples: int = DILATION_SAMPLES,
               rng=0) -> ConvexCone:
    """The eps-conic neighbourhood ``C_eps = cone(S_C + eps B_Y)``.

    Exact for 1-D cones (unchanged) and planar euclidean cones (each boundary
    ray turns outwards by ``asin(eps)``). Otherwise an inner approximation:
    the cone generated by ``samples`` normalised points ``c + eps*b`` with
    ``c`` on the unit slice of the cone and ``b`` in the unit ball.
    """
    _check_eps(eps)
    if cone.dim == 1:
        return cone
    if cone.dim == 2 and cone.space.norm == "euclidean":
        return cone.sector.widened(math.asin(eps))
    rng = np.random.default_rng(rng)
    c = cone.sample_rays(samples, rng)
    c = c / cone.space.norm_of(c)[:, None]
    b = cone.space.sphere_samples(samples, rng)
    pick = rng.integers(0, len(b), size=len(c))
    pts = np.concatenate([c, c + eps * b[pick]])
    return Generators(pts, cone.space, sampled=True, check=False)


def dilation_contains(cone: ConvexCone, y, eps: float, tol: float | None = None):
    """Exact membership ``y in C_eps`` without materialising the dilation.

    Euclidean spaces use ``d(y, C) <= eps |y|`` (the scaling ``t`` of the
    characterisation ``t y in S_C + eps B_Y`` is optimised in closed form).
    For the supremum norm the scaling is found by a bounded line search
    against a dense sample of the unit slice of ``C``.
    """
    _check_eps(eps)
    tol = cone.default_tol if tol is None else tol
    y = cone.space.check(y)
    flat = y.reshape(-1, cone.dim)
    if cone.dim == 1:
        out = cone.contains(flat, tol)
    elif cone.space.norm != "supremum":
        if cone.dim == 2:
            s = cone.sector
            ok = s.width + 2 * math.asin(eps) < TWO_PI - 1e-12
            out = s.widened(math.asin(eps)).contains(flat, tol) if ok else np.ones(len(flat), bool)
        else:
            r = np.linalg.norm(flat, axis=1)
            out = cone.distance(flat) <= eps * r + _rel_tol(flat, tol)
    else:
        out = np.array([_sup_dilation_member(cone, v, eps, tol) for v in flat])
    out = np.asarray(out).reshape(y.shape[:-1])
    return bool(out) if out.ndim == 0 else out


def _sup_dilation_member(cone, v, eps, tol, samples=20000):
    space = cone.space
    nv = float(space.norm_of(v))
    if nv == 0:
        return True
    c = cone.sample_rays(samples, 0)
    c = c / space.norm_of(c)[:, None]
    u = v / nv
    ts = np.linspace(0.5 - eps, 1.0 + eps, 401)
    best = min(float(np.min(space.norm_of(t * u - c))) for t in ts)
    return best <= eps + max(tol, SAMPLED_TOL)


def henig_dilate(base: ConeBase, eps: float, samples: int = DILATION_SAMPLES,
                 rng=0) -> ConvexCone:
    """Henig dilating cone ``C_(B,eps) = cone({y : d(y, B) <= eps})``.

    Requires ``0 < eps < min(1, delta_B)``. In the euclidean plane ``B`` is a
    segment (or a point) and the cone is bounded by the tangents from the
    origin to the discs of radius ``eps`` around its endpoints.
    """
    if not (0.0 < eps < min(1.0, base.delta)):
        raise EpsilonTooLarge(
            f"epsilon {eps} must lie in (0, min(1, delta_B={base.delta:.6g}))"
        )
    cone = base.cone
    if cone.dim == 1:
        return cone
    if cone.dim == 2 and cone.space.norm == "euclidean":
        v = base.vertices
        ang = _angle(v)
        # unwrap around the first vertex so the segment does not straddle 0
        ang = ang[0] + np.mod(ang - ang[0] + math.pi, TWO_PI) - math.pi
        half = np.arcsin(eps / np.linalg.norm(v, axis=1))
        lo = float(np.min(ang - half))
        hi = float(np.max(ang + half))
        return Sector(lo, hi - lo, cone.space)
    rng = np.random.default_rng(rng)
    b = base.sample(samples, rng)
    ball = cone.space.sphere_samples(samples, rng)
    pick = rng.integers(0, len(ball), size=len(b))
    pts = np.concatenate([b, b + eps * ball[pick]])
    return Generators(pts, cone.space, sampled=True, check=False)


def henig_bounded_base(base: ConeBase, eps: float) -> ConeBase:
    """A bounded base of the Henig cone ``C_(B,eps)``.

    ``{0}`` is separated from ``B + eps B_X`` by the unit normal ``g`` at the
    closest point of ``B``; the new base is ``{x : g(x) = gamma}`` with
    ``gamma`` half of ``inf g`` over the fattened base.
    """
    if not (0.0 < eps < base.level) or eps >= base.delta:
        raise EpsilonTooLarge(
            f"epsilon {eps} must be below the base level {base.level:.6g} "
            f"and delta_B {base.delta:.6g}"
        )
    cone = henig_dilate(base, eps)
    g = _unit(base.closest)
    margin = float(np.min(base.vertices @ g) - eps * base.space.dual_norm_of(g))
    if margin <= 0:
        raise EpsilonTooLarge("the fattened base reaches the origin")
    return base_from_functional(cone, g, margin / 2.0)


def distance_to_set(y, a, space: SpaceSpec | None = None) -> float:
    """``d(y, A) = min |y - a|`` over a finite sample ``A``."""
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        raise EmptySet("distance to an empty set")
    y = np.asarray(y, dtype=float)
    if a.ndim == 1:
        a = a[:, None] if y.ndim == 0 or y.shape == (1,) else a[None, :]
    space = space or SpaceSpec(a.shape[-1])
    y = space.check(y)
    return float(np.min(space.norm_of(a - y)))


def rescale_base_for_separation(base: ConeBase, lipschitz: float, delta: float,
                                samples_a_minus_y, tol: float = EXACT_TOL,
                                rng=0) -> ConeBase:
    """Rescale ``base`` so that ``d(-lam b, A - y) >= 2 L lam`` for all
    ``b`` in the new base and ``lam > 0``.

    First ``B2 = B / delta_B`` (so every element has norm at least one), then
    ``B = (2L/delta) B2``. The hypothesis ``(A - y) cap (-C_delta) in {0}``
    is checked on the samples, and the conclusion is re-checked on a grid
    of base points and scales.
    """
    if lipschitz <= 0:
        raise ValueError("the Lipschitz constant must be positive")
    _check_eps(delta)
    s = base.space.check(np.atleast_2d(np.asarray(samples_a_minus_y, dtype=float)))
    nonzero = base.space.norm_of(s) > tol
    bad = nonzero & np.asarray(dilation_contains(base.cone, -s, delta, tol), dtype=bool).reshape(-1)
    if np.any(bad):
        raise SeparationViolated("a sample lies in -C_delta \\ {0}", s[np.argmax(bad)])
    out = base.scaled((2.0 * lipschitz / delta) / base.delta)
    pts = out.sample(16, rng)
    for lam in np.logspace(-3, 3, 13):
        d = np.min(base.space.norm_of(s[None, :, :] + lam * pts[:, None, :]), axis=1)
        if np.any(d < 2.0 * lipschitz * lam * (1.0 - 1e-9) - tol):
            i = int(np.argmin(d - 2.0 * lipschitz * lam))
            raise SeparationViolated("rescaled base fails the distance bound", pts[i])
    return out


# ---------------------------------------------------------------------------
# (de)serialisation
# ---------------------------------------------------------------------------

def cone_from_spec(spec: dict, space: SpaceSpec | None = None) -> ConvexCone:
    """Build a cone from ``{"kind": "sector"|"generators"|"halfspaces", ...}``.

    Sectors use ``"angles": [lo, hi]`` in degrees; the other kinds take
    ``"rays"`` or ``"normals"`` as lists of number arrays.
    """
    kind = spec.get("kind")
    if kind == "sector":
        lo, hi = spec["angles"]
        return Sector.from_degrees(float(lo), float(hi), space or SpaceSpec(2))
    if kind == "generators":
        return Generators(spec["rays"], space)
    if kind == "halfspaces":
        return Halfspaces(spec["normals"], space)
    raise ValueError(f"unknown cone kind {kind!r}")


def cone_to_spec(cone: ConvexCone) -> dict:
    if isinstance(cone, Sector):
        lo, hi = cone.degrees
        return {"kind": "sector", "angles": [lo, hi]}
    if isinstance(cone, Generators):
        return {"kind": "generators", "rays": cone.rays.tolist()}
    if isinstance(cone, Halfspaces):
        return {"kind": "halfspaces", "normals": cone.normals.tolist()}
    raise TypeError(f"unsupported cone type {type(cone).__name__}")
