"""
Sampled set-valued maps.

A :class:`SampledMap` stores a finite graph ``x -> P(x)`` where each image is
a finite point list. Optionally the values are shifted by a cone ``K``, so
the map stands for ``x -> P(x) + K`` (an epigraph-like, unbounded value).
Membership and excess for shifted maps are computed exactly from the base
points; a truncated point cloud (radius ``truncation``) is only produced when
an operation needs explicit image points, such as :func:`invert`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.spatial.distance import cdist

from .errors import AnchorMissing, DimensionMismatch, EmptySet, RegularityViolated
from .geometry import EXACT_TOL, ConvexCone, SpaceSpec

__all__ = [
    "SampledMap",
    "LipschitzEstimate",
    "point_key",
    "cone_distance",
    "excess",
    "invert",
    "compose_V",
    "embed_inequality_constraint",
    "lipschitz_at",
    "lipschitz_on_set",
    "composition_lipschitz_bound",
]

KEY_DECIMALS = 12
DEFAULT_TRUNCATION = 10.0


def point_key(x) -> tuple:
    """Hashable key of a vector (rounded so grid arithmetic noise merges)."""
    a = np.round(np.asarray(x, dtype=float).reshape(-1), KEY_DECIMALS) + 0.0
    return tuple(a.tolist())


def _metric(space: SpaceSpec) -> str:
    return "chebyshev" if space.norm == "supremum" else "euclidean"


def cone_distance(cone: ConvexCone, v: np.ndarray) -> np.ndarray:
    """Distance, in the norm of ``cone.space``, from each row of ``v`` to ``cone``."""
    v = cone.space.check(np.atleast_2d(v))
    if cone.space.norm != "supremum":
        return np.asarray(cone.distance(v), dtype=float).reshape(-1)
    # sup-norm distance: min s  s.t.  |v - R c|_inf <= s, c >= 0
    rays = cone.sector.boundary_rays() if cone.dim == 2 else cone.extreme_rays()
    k, n = len(rays), cone.dim
    c = np.zeros(k + 1)
    c[-1] = 1.0
    rt = rays.T
    a_ub = np.vstack([np.hstack([-rt, -np.ones((n, 1))]), np.hstack([rt, -np.ones((n, 1))])])
    out = np.empty(len(v))
    for i, row in enumerate(v):
        if cone.contains(row):
            out[i] = 0.0
            continue
        res = linprog(c, A_ub=a_ub, b_ub=np.concatenate([-row, row]),
                      bounds=[(0, None)] * (k + 1), method="highs")
        out[i] = res.fun
    return out


@dataclass(frozen=True)
class SampledMap:
    """Finite graph of a set-valued map.

    ``points[i]`` is a domain sample and ``images[i]`` an ``(k_i, m)`` array
    of its values. With ``shift_cone`` set, the value at ``points[i]`` is
    ``images[i] + shift_cone``.
    """

    domain_space: SpaceSpec
    codomain_space: SpaceSpec
    points: np.ndarray
    images: tuple
    name: str | None = None
    shift_cone: ConvexCone | None = None
    truncation: float = DEFAULT_TRUNCATION
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        pts = self.domain_space.check(np.atleast_2d(np.asarray(self.points, dtype=float)))
        imgs = []
        for im in self.images:
            im = self.codomain_space.check(np.atleast_2d(np.asarray(im, dtype=float)))
            if len(im) == 0:
                raise EmptySet("every sampled image must be nonempty")
            imgs.append(im)
        if len(imgs) != len(pts):
            raise DimensionMismatch("points and images differ in length")
        if self.shift_cone is not None and self.shift_cone.dim != self.codomain_space.dim:
            raise DimensionMismatch("shift cone lives in the wrong space")
        index = {}
        for i, x in enumerate(pts):
            k = point_key(x)
            if k in index:
                raise ValueError(f"duplicate domain sample {k}")
            index[k] = i
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "images", tuple(imgs))
        object.__setattr__(self, "_index", index)

    # -- construction ---------------------------------------------------------
    @classmethod
    def from_function(cls, fn, points, domain_space: SpaceSpec, codomain_space: SpaceSpec,
                      name: str | None = None, shift_cone: ConvexCone | None = None):
        """Tabulate ``fn(x)`` (returning one or several values) on ``points``."""
        pts = domain_space.check(np.atleast_2d(np.asarray(points, dtype=float)))
        imgs = [np.atleast_2d(np.asarray(fn(x), dtype=float)) for x in pts]
        return cls(domain_space, codomain_space, pts, tuple(imgs), name, shift_cone)

    @classmethod
    def from_pairs(cls, pairs, domain_space: SpaceSpec, codomain_space: SpaceSpec, **kw):
        """Build from ``(x, y)`` pairs, grouping values by domain point."""
        groups: dict = {}
        order = []
        for x, y in pairs:
            k = point_key(x)
            if k not in groups:
                groups[k] = (np.asarray(x, dtype=float).reshape(-1), [])
                order.append(k)
            groups[k][1].append(np.asarray(y, dtype=float).reshape(-1))
        pts = np.array([groups[k][0] for k in order]).reshape(-1, domain_space.dim)
        imgs = tuple(np.unique(np.round(np.array(groups[k][1]), KEY_DECIMALS) + 0.0, axis=0)
                     for k in order)
        return cls(domain_space, codomain_space, pts, imgs, **kw)

    # -- queries --------------------------------------------------------------
    def __len__(self):
        return len(self.points)

    def has(self, x) -> bool:
        return point_key(x) in self._index

    def base_values(self, x) -> np.ndarray:
        """The finite part ``P(x)`` of the value at ``x``."""
        try:
            return self.images[self._index[point_key(x)]]
        except KeyError:
            raise AnchorMissing(f"{point_key(x)} is not a domain sample") from None

    def values(self, x) -> np.ndarray:
        """Explicit image points (truncated cloud for cone-shifted maps)."""
        base = self.base_values(x)
        if self.shift_cone is None:
            return base
        return _truncated_cloud(base, self.shift_cone, self.truncation)

    def contains(self, x, y, tol: float = EXACT_TOL) -> bool:
        """``y in value(x)``; exact for cone-shifted values."""
        y = self.codomain_space.check(y)
        base = self.base_values(x)
        if self.shift_cone is None:
            d = cdist(y[None, :], base, _metric(self.codomain_space))
            return bool(np.min(d) <= tol * max(1.0, float(np.linalg.norm(y))))
        return bool(np.any(self.shift_cone.contains(y - base, tol)))

    def pairs(self):
        for x, im in zip(self.points, self.images):
            for y in im:
                yield x, y

    def graph_array(self) -> np.ndarray:
        """All ``(x, y)`` base pairs stacked as rows ``[x, y]``."""
        return np.array([np.concatenate([x, y]) for x, y in self.pairs()])

    def restrict(self, keep) -> "SampledMap":
        keep = np.asarray(keep, dtype=bool)
        return SampledMap(self.domain_space, self.codomain_space, self.points[keep],
                          tuple(im for im, k in zip(self.images, keep) if k),
                          self.name, self.shift_cone, self.truncation)

    def materialized(self, ray_samples: int = 8) -> "SampledMap":
        """Drop the shift cone by adding sampled offsets up to the truncation radius."""
        if self.shift_cone is None:
            return self
        imgs = tuple(_truncated_cloud(b, self.shift_cone, self.truncation, ray_samples)
                     for b in self.images)
        return SampledMap(self.domain_space, self.codomain_space, self.points, imgs,
                          self.name, None, self.truncation)


def _truncated_cloud(base, cone, radius, ray_samples: int = 8, steps: int = 5):
    rays = cone.sample_rays(ray_samples, 0)
    t = np.linspace(0.0, radius, steps + 1)[1:]
    offsets = (t[:, None, None] * rays[None, :, :]).reshape(-1, cone.dim)
    cloud = (base[:, None, :] + offsets[None, :, :]).reshape(-1, cone.dim)
    return np.concatenate([base, cloud])


@dataclass(frozen=True)
class LipschitzEstimate:
    anchor: np.ndarray
    constant: float
    sample_count: int
    argmax: np.ndarray | None = None


def excess(a, b, space: SpaceSpec, shift_cone: ConvexCone | None = None) -> float:
    """``e(A, B) = max_{a in A} d(a, B)``; with a shift cone, of ``A + K``
    over ``B + K``, which reduces to ``max_a min_b d(a - b, K)``."""
    a = space.check(np.atleast_2d(a))
    b = space.check(np.atleast_2d(b))
    if len(a) == 0:
        return 0.0
    if len(b) == 0:
        raise EmptySet("excess over an empty set")
    if shift_cone is None:
        return float(np.max(np.min(cdist(a, b, _metric(space)), axis=1)))
    diff = (a[:, None, :] - b[None, :, :]).reshape(-1, space.dim)
    d = cone_distance(shift_cone, diff).reshape(len(a), len(b))
    return float(np.max(np.min(d, axis=1)))


def invert(m: SampledMap) -> SampledMap:
    """Graph transpose ``y -> {x : y in m(x)}`` (shifted maps are materialised)."""
    if len(m) == 0:
        raise EmptySet("cannot invert an empty graph")
    m = m.materialized()
    return SampledMap.from_pairs(((y, x) for x, y in m.pairs()),
                                 m.codomain_space, m.domain_space,
                                 name=f"inverse({m.name})" if m.name else None)


def compose_V(F: SampledMap, G: SampledMap, omega, z_points=None, strict: bool = False,
              required=None) -> SampledMap:
    """``V = F o G^{-1}`` restricted to the feasible samples ``omega``.

    ``V(z)`` is the union of ``F(x)`` over ``x in omega`` with ``z in G(x)``.
    By default the ``z`` samples are the images ``G(omega)``; a cone-shifted
    ``G`` (inequality constraints) also needs explicit ``z_points``. The
    result carries ``F``'s shift cone. With ``strict``, any ``z`` in
    ``required`` that gets an empty value raises :class:`RegularityViolated`.
    """
    omega = F.domain_space.check(np.atleast_2d(np.asarray(omega, dtype=float)))
    for x in omega:
        if not (F.has(x) and G.has(x)):
            raise AnchorMissing(f"{point_key(x)} is missing from F or G")
    zspace = G.codomain_space
    if z_points is None:
        z_points = np.concatenate([G.base_values(x) for x in omega])
    z_points = zspace.check(np.atleast_2d(np.asarray(z_points, dtype=float)))
    zkeys = {}
    for z in z_points:
        zkeys.setdefault(point_key(z), z)
    zs = np.array(list(zkeys.values())).reshape(-1, zspace.dim)
    groups: dict = {k: [] for k in zkeys}
    for x in omega:
        gx = G.base_values(x)
        if G.shift_cone is None:
            hit = np.min(cdist(zs, gx, _metric(zspace)), axis=1) <= EXACT_TOL
        else:
            diff = zs[:, None, :] - gx[None, :, :]
            hit = np.any(np.asarray(G.shift_cone.contains(diff), dtype=bool).reshape(len(zs), len(gx)), axis=1)
        fx = F.base_values(x)
        for k in np.nonzero(hit)[0]:
            groups[point_key(zs[k])].append(fx)
    if strict and required is not None:
        for z in zspace.check(np.atleast_2d(required)):
            if not groups.get(point_key(z)):
                raise RegularityViolated(f"V({point_key(z)}) is empty")
    keys = [k for k in zkeys if groups[k]]
    pts = np.array([zkeys[k] for k in keys]).reshape(-1, zspace.dim)
    imgs = tuple(np.unique(np.round(np.concatenate(groups[k]), KEY_DECIMALS) + 0.0, axis=0)
                 for k in keys)
    return SampledMap(zspace, F.codomain_space, pts, imgs, name="V",
                      shift_cone=F.shift_cone, truncation=F.truncation)


def embed_inequality_constraint(G: SampledMap, cone: ConvexCone,
                                ray_samples: int = 8) -> SampledMap:
    """``x -> G(x) + Z_+``: the inequality constraint ``G(x) in -Z_+``
    becomes the equality-type constraint ``0 in G(x) + Z_+``.

    Membership on the result is exact; ``ray_samples`` controls the point
    cloud used when explicit values are needed.
    """
    if cone.dim != G.codomain_space.dim:
        raise DimensionMismatch("constraint cone lives in the wrong space")
    if G.shift_cone is not None:
        raise ValueError("map is already cone-shifted")
    return SampledMap(G.domain_space, G.codomain_space, G.points, G.images,
                      name=f"{G.name}+cone" if G.name else None, shift_cone=cone,
                      truncation=G.truncation)


def lipschitz_at(m: SampledMap, anchor) -> LipschitzEstimate:
    """Sampled constant of ``m(w) subset m(anchor) + L |w - anchor| B_Y``."""
    anchor = m.domain_space.check(anchor)
    ref = m.base_values(anchor)
    dist = m.domain_space.norm_of(m.points - anchor)
    best, arg, count = 0.0, None, 0
    for w, im, d in zip(m.points, m.images, dist):
        if d <= 0.0:
            continue
        count += 1
        q = excess(im, ref, m.codomain_space, m.shift_cone) / d
        if q > best:
            best, arg = q, w
    return LipschitzEstimate(anchor, float(best), count, arg)


def lipschitz_on_set(m: SampledMap, anchors=None) -> float:
    """Largest pairwise ratio ``e(m(w), m(x)) / |w - x|`` over the samples
    (a lower estimate of a whole-set Lipschitz constant)."""
    anchors = m.points if anchors is None else np.atleast_2d(anchors)
    return max(lipschitz_at(m, x).constant for x in anchors)


def composition_lipschitz_bound(outer: float, inner: float) -> float:
    """Product bound for the Lipschitz constant of a composition."""
    if outer < 0 or inner < 0 or not np.isfinite(outer) or not np.isfinite(inner):
        raise ValueError("Lipschitz constants must be finite and nonnegative")
    return float(outer * inner)
