"""
Multiplier processes.

A process ``Delta: Z => Y`` is stored through its graph, a closed convex cone
in ``Z x Y``. Three families are supported:

* :class:`NormCoupledHalfspaces` -- ``{(z, y) : g_i . y >= alpha_i |z|}``
* :class:`BaseGenerated` -- ``cl cone(B_Z x B)`` for a bounded base ``B``
* :class:`SublinearEpigraph` -- ``epi(phi)`` for a sublinear ``phi: Z -> R``

The module also checks the three structural conditions a multiplier needs
(interior of the graph, compatibility with the ordering cone at ``0``, and
separation from the shifted value graph) and runs the constructive pipeline
that builds a multiplier from a bounded base of a Henig dilation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import linprog, minimize

from .errors import (
    CertificateFailed,
    DimensionMismatch,
    NoBase,
    NoBoundedBase,
    NondegeneracyViolated,
    NotPositive,
    NotSublinear,
    RegularityViolated,
    Unbounded,
    UnboundedBase,
)
from .geometry import (
    EXACT_TOL,
    ConeBase,
    ConvexCone,
    Halfspaces,
    SpaceSpec,
    base_from_functional,
    cone_from_spec,
    cone_to_spec,
    dilation_contains,
    henig_bounded_base,
    henig_dilate,
    quasi_interior_functional,
    rescale_base_for_separation,
)
from .order import nd_check_program
from .setvalued import SampledMap, compose_V, lipschitz_at, point_key

__all__ = [
    "SublinearFn",
    "ScaledNorm",
    "MaxOfLinear",
    "CallableSublinear",
    "Process",
    "NormCoupledHalfspaces",
    "BaseGenerated",
    "SublinearEpigraph",
    "CheckResult",
    "GammaCertificate",
    "AugmentedReport",
    "SetValuedProblem",
    "graph_contains",
    "delta_mu",
    "evaluate",
    "process_norm",
    "upsilon",
    "upsilon_inverse",
    "build_from_base",
    "check_assumption_a",
    "check_assumption_b",
    "check_assumption_c",
    "certify",
    "find_multiplier",
    "largest_nondegenerate_delta",
    "augmented_nd_check",
    "process_from_spec",
    "process_to_spec",
]

SCALAR = SpaceSpec(1, "abs")


# ---------------------------------------------------------------------------
# sublinear functions
# ---------------------------------------------------------------------------

class SublinearFn:
    """A finite sublinear function ``Z -> R``, vectorised over rows."""

    space: SpaceSpec

    def __call__(self, z) -> np.ndarray:
        raise NotImplementedError

    def sphere_sup(self) -> float:
        """``sup`` of the function over the unit sphere of ``Z``."""
        z = self.space.sphere_samples(2000, 0)
        return float(np.max(self(z)))


@dataclass(frozen=True)
class ScaledNorm(SublinearFn):
    """``phi(z) = mu |z|``."""

    mu: float
    space: SpaceSpec = SCALAR

    def __post_init__(self):
        if not (self.mu >= 0 and math.isfinite(self.mu)):
            raise NotSublinear(f"mu must be finite and nonnegative, got {self.mu}")

    def __call__(self, z):
        out = self.mu * self.space.norm_of(self.space.check(z))
        return float(out) if np.ndim(out) == 0 else out

    def sphere_sup(self):
        return float(self.mu)


@dataclass(frozen=True)
class MaxOfLinear(SublinearFn):
    """``phi(z) = max_i f_i . z``."""

    functionals: np.ndarray
    space: SpaceSpec = SCALAR

    def __post_init__(self):
        f = np.atleast_2d(np.asarray(self.functionals, dtype=float))
        object.__setattr__(self, "functionals", self.space.check(f))

    def __call__(self, z):
        z = self.space.check(z)
        out = np.max(z @ self.functionals.T, axis=-1)
        return float(out) if np.ndim(out) == 0 else out

    def sphere_sup(self):
        # each linear piece peaks at its dual norm on the sphere
        return float(np.max(self.space.dual_norm_of(self.functionals)))


@dataclass(frozen=True)
class CallableSublinear(SublinearFn):
    """Arbitrary callable, validated for sublinearity on samples."""

    fn: object
    space: SpaceSpec = SCALAR

    def __call__(self, z):
        z = self.space.check(z)
        if z.ndim == 1:
            return float(self.fn(z))
        return np.array([float(self.fn(v)) for v in z])


def validate_sublinear(phi: SublinearFn, samples: int = 200, rng=0, tol: float = 1e-9):
    """Sampled homogeneity and subadditivity; raises :class:`NotSublinear`."""
    rng = np.random.default_rng(rng)
    a = rng.standard_normal((samples, phi.space.dim))
    b = rng.standard_normal((samples, phi.space.dim))
    fa, fb = np.atleast_1d(phi(a)), np.atleast_1d(phi(b))
    if not np.all(np.isfinite(fa)):
        raise NotSublinear("function is not finite on the samples")
    if abs(float(phi(np.zeros(phi.space.dim)))) > tol:
        raise NotSublinear("phi(0) must be 0")
    for lam in (0.5, 2.0, 7.0):
        if np.any(np.abs(np.atleast_1d(phi(lam * a)) - lam * fa) > tol * (1 + np.abs(fa) * lam)):
            raise NotSublinear("positive homogeneity fails on samples")
    slack = tol * (1 + np.abs(fa) + np.abs(fb))
    if np.any(np.atleast_1d(phi(a + b)) > fa + fb + slack):
        raise NotSublinear("subadditivity fails on samples")


# ---------------------------------------------------------------------------
# processes
# ---------------------------------------------------------------------------

def _slack(z, y, tol):
    scale = np.maximum(1.0, np.maximum(np.linalg.norm(z, axis=-1), np.linalg.norm(y, axis=-1)))
    return tol * scale


class Process:
    """Closed convex process ``Z => Y`` described by its graph."""

    domain_space: SpaceSpec
    codomain_space: SpaceSpec

    def contains(self, z, y, tol: float = EXACT_TOL):
        z, y = _broadcast_rows(self.domain_space.check(z), self.codomain_space.check(y))
        out = self._contains(z, y, tol)
        return bool(out) if np.ndim(out) == 0 else out

    def _contains(self, z, y, tol):
        raise NotImplementedError

    def zero_value_cone(self) -> ConvexCone | None:
        """``Delta(0)`` as a cone, when it is a proper convex cone."""
        return None

    def value_probes(self, z: np.ndarray, scales=(0.5, 1.0, 2.0, 4.0)) -> np.ndarray:
        """A finite set of points of ``Delta(z)`` including its lowest points."""
        raise NotImplementedError


def _broadcast_rows(z, y):
    lead = np.broadcast_shapes(z.shape[:-1], y.shape[:-1])
    return (np.broadcast_to(z, lead + z.shape[-1:]), np.broadcast_to(y, lead + y.shape[-1:]))


class NormCoupledHalfspaces(Process):
    """``Delta(z) = {y : g_i . y >= alpha_i |z|}``."""

    def __init__(self, normals, alphas, domain_space: SpaceSpec,
                 codomain_space: SpaceSpec | None = None):
        g = np.atleast_2d(np.asarray(normals, dtype=float))
        a = np.asarray(alphas, dtype=float).reshape(-1)
        self.domain_space = domain_space
        self.codomain_space = codomain_space or SpaceSpec(g.shape[1])
        self.normals = self.codomain_space.check(g)
        if len(a) != len(g):
            raise DimensionMismatch("one alpha per normal is required")
        if np.any(a < 0):
            raise ValueError("coupling constants must be nonnegative")
        self.alphas = a

    def _contains(self, z, y, tol):
        lhs = y @ self.normals.T
        rhs = self.domain_space.norm_of(z)[..., None] * self.alphas
        return np.all(lhs >= rhs - _slack(z, y, tol)[..., None], axis=-1)

    @cached_property
    def recession(self) -> Halfspaces | None:
        try:
            return Halfspaces(self.normals, self.codomain_space, check=False)
        except Exception:
            return None

    @cached_property
    def _recession_rays(self):
        if self.recession is None:
            return None
        try:
            return self.recession.extreme_rays()
        except NoBase:
            return None

    def zero_value_cone(self):
        try:
            return Halfspaces(self.normals, self.codomain_space)
        except Exception:
            return None

    def vertices(self, znorm: float) -> np.ndarray:
        """Vertices of the polyhedron ``{y : G y >= alpha |z|}``."""
        m = self.codomain_space.dim
        rhs = self.alphas * znorm
        out = []
        for rows in itertools.combinations(range(len(self.normals)), m):
            a = self.normals[list(rows)]
            if abs(np.linalg.det(a)) < 1e-12:
                continue
            v = np.linalg.solve(a, rhs[list(rows)])
            if np.all(self.normals @ v >= rhs - 1e-10 * max(1.0, np.abs(v).max())):
                if not any(np.allclose(v, w, atol=1e-12) for w in out):
                    out.append(v)
        return np.array(out).reshape(-1, m)

    def value_probes(self, z, scales=(0.5, 1.0, 2.0, 4.0)):
        znorm = float(self.domain_space.norm_of(z))
        verts = self.vertices(znorm)
        rays = self._recession_rays
        parts = [verts]
        if rays is not None and len(verts):
            shifts = np.array([t * r for t in scales for r in rays])
            parts.append((verts[:, None, :] + shifts[None, :, :]).reshape(-1, self.codomain_space.dim))
        return np.concatenate(parts) if parts else np.zeros((0, self.codomain_space.dim))

    def __repr__(self):
        return f"NormCoupledHalfspaces(normals={self.normals.tolist()}, alphas={self.alphas.tolist()})"


class BaseGenerated(Process):
    """Graph ``cl cone(B_Z x B)``: ``(z, y)`` belongs iff ``y in C`` and
    ``f(y)/level >= |z|`` (``C`` the cone of the base ``B``)."""

    def __init__(self, base: ConeBase, domain_space: SpaceSpec):
        self.base = base
        self.domain_space = domain_space
        self.codomain_space = base.space

    def _contains(self, z, y, tol):
        flat_y = y.reshape(-1, y.shape[-1])
        in_cone = np.asarray(self.base.cone.contains(flat_y, tol), dtype=bool).reshape(y.shape[:-1])
        lam = self.base.coefficient(y)
        return in_cone & (lam >= self.domain_space.norm_of(z) - _slack(z, y, tol))

    def zero_value_cone(self):
        return self.base.cone

    def value_probes(self, z, scales=(0.5, 1.0, 2.0, 4.0)):
        znorm = float(self.domain_space.norm_of(z))
        pts = self.base.sample(8, 0)
        lows = pts * znorm
        shifts = np.array([t * p for t in scales for p in self.base.vertices])
        return np.concatenate([lows, (lows[:, None, :] + shifts[None, :, :]).reshape(-1, lows.shape[1])])

    def __repr__(self):
        return f"BaseGenerated(cone={self.base.cone!r}, level={self.base.level:.6g})"


class SublinearEpigraph(Process):
    """Graph ``epi(phi) = {(z, r) : r >= phi(z)}``."""

    def __init__(self, phi: SublinearFn):
        self.phi = phi
        self.domain_space = phi.space
        self.codomain_space = SCALAR

    def _contains(self, z, y, tol):
        return y[..., 0] >= np.asarray(self.phi(z)) - _slack(z, y, tol)

    def zero_value_cone(self):
        from .geometry import Generators

        return Generators([[1.0]], SCALAR)

    def value_probes(self, z, scales=(0.5, 1.0, 2.0, 4.0)):
        low = float(self.phi(z))
        return np.array([[low]] + [[low + t] for t in scales])

    def __repr__(self):
        return f"SublinearEpigraph({self.phi!r})"


def graph_contains(p: Process, z, y, tol: float = EXACT_TOL):
    """``(z, y) in Gph(p)`` (vectorised over matching leading axes)."""
    return p.contains(z, y, tol)


def delta_mu(space: SpaceSpec, mu: float) -> NormCoupledHalfspaces:
    """The scalar process ``z -> {r : r >= mu |z|}``."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    return NormCoupledHalfspaces([[1.0]], [mu], space, SCALAR)


def evaluate(p: Process, z, probe) -> np.ndarray:
    """Members of ``p(z)`` among the probe points."""
    probe = p.codomain_space.check(np.atleast_2d(probe))
    z = p.domain_space.check(z)
    return probe[np.asarray(p.contains(np.broadcast_to(z, (len(probe), z.shape[-1])), probe), dtype=bool)]


def _min_norm_polyhedron(normals, rhs, space: SpaceSpec) -> float:
    """``min |y|`` subject to ``G y >= rhs`` (``inf`` when infeasible)."""
    n = space.dim
    if space.norm == "supremum":
        c = np.zeros(n + 1)
        c[-1] = 1.0
        a_ub = np.vstack([np.hstack([-normals, np.zeros((len(normals), 1))]),
                          np.hstack([np.eye(n), -np.ones((n, 1))]),
                          np.hstack([-np.eye(n), -np.ones((n, 1))])])
        b_ub = np.concatenate([-rhs, np.zeros(2 * n)])
        res = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=[(None, None)] * n + [(0, None)],
                      method="highs")
        return float(res.fun) if res.status == 0 else math.inf
    # feasibility first, then a least-norm QP started from a feasible point
    c = np.zeros(n)
    res = linprog(c, A_ub=-normals, b_ub=-rhs, bounds=[(None, None)] * n, method="highs")
    if res.status != 0:
        return math.inf
    if np.all(rhs <= 0):
        return 0.0
    qp = minimize(lambda y: y @ y, res.x, jac=lambda y: 2 * y, method="SLSQP",
                  constraints=[{"type": "ineq", "fun": lambda y: normals @ y - rhs,
                                "jac": lambda y: normals}],
                  options={"ftol": 1e-15, "maxiter": 500})
    return float(np.sqrt(max(qp.fun, 0.0)))


def process_norm(p: Process, sphere_samples: int = 200, cap: float = 1e12, rng=0) -> float:
    """``|Delta| = sup_{z in S_Z} d(0, Delta(z))``."""
    if isinstance(p, SublinearEpigraph):
        val = max(0.0, p.phi.sphere_sup())
    elif isinstance(p, BaseGenerated):
        # Delta(z) = union of lam*B over lam >= |z|, nearest at |z| * delta_B
        val = p.base.delta
    elif isinstance(p, NormCoupledHalfspaces):
        # depends on z only through |z| = 1
        val = _min_norm_polyhedron(p.normals, p.alphas, p.codomain_space)
    else:
        zs = p.domain_space.sphere_samples(sphere_samples, rng)
        val = max(float(np.min(p.codomain_space.norm_of(p.value_probes(z)))) for z in zs)
    if not val <= cap:
        raise Unbounded(f"process norm exceeds {cap:g} (values may be empty)")
    return float(val)


def upsilon(phi: SublinearFn, validate: bool = True) -> SublinearEpigraph:
    """The process whose graph is the epigraph of ``phi``."""
    if validate:
        validate_sublinear(phi)
    return SublinearEpigraph(phi)


def upsilon_inverse(p: Process) -> SublinearFn:
    """``phi(z) = min {r : (z, r) in Gph(p)}`` for a scalar process with
    ``p(0) = R_+``."""
    if isinstance(p, SublinearEpigraph):
        return p.phi
    if p.codomain_space.dim != 1:
        raise NotPositive("only scalar processes correspond to sublinear functions")
    if isinstance(p, NormCoupledHalfspaces):
        g = p.normals[:, 0]
        if not np.all(g > 0):
            raise NotPositive("the value at 0 is not R_+")
        return ScaledNorm(float(np.max(p.alphas / g)), p.domain_space)
    if isinstance(p, BaseGenerated):
        b = float(p.base.vertices[0, 0])
        if b <= 0:
            raise NotPositive("the value at 0 is not R_+")
        return ScaledNorm(b, p.domain_space)
    raise NotPositive(f"unsupported process {type(p).__name__}")


def build_from_base(space: SpaceSpec, base: ConeBase) -> BaseGenerated:
    if not (math.isfinite(base.sigma) and base.delta > 0):
        raise UnboundedBase("the base must be bounded and away from the origin")
    return BaseGenerated(base, space)


# ---------------------------------------------------------------------------
# structural checks
# ---------------------------------------------------------------------------

@dataclass
class CheckResult:
    ok: bool
    witness: np.ndarray | None = None
    radius: float | None = None
    violation: tuple | None = None
    samples: int = 0
    note: str = ""

    def to_dict(self) -> dict:
        d = {"ok": bool(self.ok), "samples": int(self.samples)}
        if self.witness is not None:
            d["witness"] = np.asarray(self.witness).tolist()
        if self.radius is not None:
            d["radius"] = float(self.radius)
        if self.violation is not None:
            d["violation"] = [np.asarray(v).tolist() for v in self.violation]
        if self.note:
            d["note"] = self.note
        return d


def _perturbation_dirs(dim: int, count: int, rng) -> np.ndarray:
    eye = np.eye(dim)
    rnd = rng.standard_normal((count, dim))
    rnd /= np.linalg.norm(rnd, axis=1, keepdims=True)
    return np.concatenate([eye, -eye, rnd])


def _interior_radius(p: Process, z0, y0, dirs, iters: int = 50) -> float:
    nz = p.domain_space.dim
    w = np.concatenate([z0, y0])
    scale = max(1.0, float(np.linalg.norm(w)))

    def ok(r):
        pts = w + r * dirs
        return bool(np.all(p.contains(pts[:, :nz], pts[:, nz:], tol=0.0)))

    if not ok(0.0):
        return 0.0
    lo, hi = 0.0, scale
    if ok(hi):
        return hi
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if ok(mid) else (lo, mid)
    return lo


def _witness(p: Process):
    nz, ny = p.domain_space.dim, p.codomain_space.dim
    z0 = np.zeros(nz)
    if isinstance(p, NormCoupledHalfspaces):
        # max s  s.t.  g_i . y >= s,  |y|_inf <= 1,  s <= 1
        c = np.zeros(ny + 1)
        c[-1] = -1.0
        a_ub = np.hstack([-p.normals, np.ones((len(p.normals), 1))])
        res = linprog(c, A_ub=a_ub, b_ub=np.zeros(len(p.normals)),
                      bounds=[(-1, 1)] * ny + [(None, 1)], method="highs")
        if res.status != 0 or -res.fun <= 1e-12:
            return None
        return z0, res.x[:ny]
    if isinstance(p, SublinearEpigraph):
        return z0, np.array([2.0 * max(1.0, process_norm(p))])
    if isinstance(p, BaseGenerated):
        if not p.base.cone.is_solid():
            return None
        return z0, p.base.vertices.mean(axis=0)
    return None


def check_assumption_a(p: Process, directions: int = 100, rng=0) -> CheckResult:
    """Look for an interior point of the graph.

    A witness ``(0, y*)`` is proposed from the structure of the process and
    the largest perturbation radius keeping ``axis +- and random`` moves
    inside the graph is found by bisection. No witness means only that none
    was found.
    """
    rng = np.random.default_rng(rng)
    cand = _witness(p)
    dirs = _perturbation_dirs(p.domain_space.dim + p.codomain_space.dim, directions, rng)
    if cand is None:
        return CheckResult(False, samples=len(dirs), note="no interior witness found")
    z0, y0 = cand
    r = _interior_radius(p, z0, y0, dirs)
    wit = np.concatenate([z0, y0])
    if r <= 1e-9 * max(1.0, float(np.linalg.norm(wit))):
        return CheckResult(False, wit, r, samples=len(dirs), note="witness is not interior")
    return CheckResult(True, wit, r, samples=len(dirs))


def check_assumption_b(p: Process, cone: ConvexCone, samples: int = 200, rng=0,
                       tol: float = EXACT_TOL) -> CheckResult:
    """``Y_+ subset Delta(0)`` and ``(-Y_+) cap Delta(0) subset Y_+`` on rays."""
    rays = cone.sample_rays(samples, rng)
    zero = np.zeros(p.domain_space.dim)
    inside = np.asarray(p.contains(np.broadcast_to(zero, (len(rays), len(zero))), rays, tol), dtype=bool)
    if not np.all(inside):
        bad = rays[np.argmin(inside)]
        return CheckResult(False, violation=(zero, bad), samples=len(rays),
                           note="a cone ray is missing from Delta(0)")
    neg = -rays
    hit = np.asarray(p.contains(np.broadcast_to(zero, neg.shape[:-1] + (len(zero),)), neg, tol), dtype=bool)
    bad = hit & ~np.asarray(cone.contains(neg, tol), dtype=bool)
    if np.any(bad):
        return CheckResult(False, violation=(zero, neg[np.argmax(bad)]), samples=2 * len(rays),
                           note="Delta(0) meets -Y_+ outside Y_+")
    return CheckResult(True, samples=2 * len(rays))


def check_assumption_c(p: Process, vgraph: SampledMap, y0, tol: float = EXACT_TOL) -> CheckResult:
    """``Gph(-Delta) cap (Gph(V) - (0, y0)) subset {0}`` on the sampled graph."""
    y0 = p.codomain_space.check(y0)
    g = vgraph.materialized()
    rows = g.graph_array()
    nz = p.domain_space.dim
    z, w = rows[:, :nz], rows[:, nz:] - y0
    zero = (np.linalg.norm(z, axis=1) <= tol) & (np.linalg.norm(w, axis=1) <= tol)
    hit = np.asarray(p.contains(z, -w, tol), dtype=bool) & ~zero
    if np.any(hit):
        i = int(np.argmax(hit))
        return CheckResult(False, violation=(z[i], w[i]), samples=len(rows),
                           note="a shifted value pair lies in Gph(-Delta)")
    return CheckResult(True, samples=len(rows))


@dataclass
class GammaCertificate:
    process: Process
    a: CheckResult
    b: CheckResult
    c: CheckResult
    details: dict = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        return self.a.ok and self.b.ok and self.c.ok

    def failing(self) -> list[str]:
        return [k for k in ("a", "b", "c") if not getattr(self, k).ok]

    def to_dict(self) -> dict:
        return {
            "process": process_to_spec(self.process),
            "valid": self.valid,
            "a": self.a.to_dict(),
            "b": self.b.to_dict(),
            "c": self.c.to_dict(),
            **({"details": self.details} if self.details else {}),
        }


def certify(p: Process, cone: ConvexCone, vgraph: SampledMap, y0, rng=0) -> GammaCertificate:
    return GammaCertificate(p, check_assumption_a(p, rng=rng), check_assumption_b(p, cone, rng=rng),
                            check_assumption_c(p, vgraph, y0))


# ---------------------------------------------------------------------------
# problems and the constructive pipeline
# ---------------------------------------------------------------------------

@dataclass
class SetValuedProblem:
    """Sampled program ``min F(x)`` subject to ``0 in G(x)``, ``x in omega``."""

    F: SampledMap
    G: SampledMap
    omega: np.ndarray
    cone: ConvexCone
    z_points: np.ndarray | None = None
    name: str | None = None

    def __post_init__(self):
        if self.cone.dim != self.F.codomain_space.dim:
            raise DimensionMismatch("ordering cone and F codomain differ in dimension")
        self.omega = self.F.domain_space.check(np.atleast_2d(np.asarray(self.omega, dtype=float)))

    @cached_property
    def V(self) -> SampledMap:
        zp = self.z_points
        if zp is None and self.G.shift_cone is not None:
            zp = np.concatenate([self.G.base_values(x) for x in self.omega]
                                + [np.zeros((1, self.G.codomain_space.dim))])
        return compose_V(self.F, self.G, self.omega, z_points=zp)

    @property
    def zero(self) -> np.ndarray:
        return np.zeros(self.G.codomain_space.dim)

    def values_at_zero(self, materialize: bool = True) -> np.ndarray:
        V = self.V
        if not V.has(self.zero):
            raise RegularityViolated("V(0) is empty on the samples")
        return V.values(self.zero) if materialize else V.base_values(self.zero)

    def feasible_points(self, tol: float = EXACT_TOL) -> np.ndarray:
        return np.array([x for x in self.omega if self.G.contains(x, self.zero, tol)])


def _check_nondegenerate(cone, values, y0, delta, tol=EXACT_TOL):
    if not nd_check_program(values, y0, cone):
        raise NondegeneracyViolated("y0 is dominated by V(0)", None)
    diff = y0 - values
    far = np.linalg.norm(diff, axis=1) > tol
    bad = far & np.asarray(dilation_contains(cone, diff, delta, tol), dtype=bool).reshape(-1)
    if np.any(bad):
        raise NondegeneracyViolated("V(0) meets y0 - (Y_+)_delta away from y0",
                                    values[np.argmax(bad)])


def largest_nondegenerate_delta(problem: SetValuedProblem, y0, lo: float = 1e-4,
                                hi: float = 0.999, iters: int = 40) -> float:
    """Bisection for the largest ``delta`` passing the sampled condition
    ``V(0) cap (y0 - (Y_+)_delta) subset {y0}`` (0 when even ``lo`` fails)."""
    values = problem.values_at_zero()
    y0 = problem.cone.space.check(y0)

    def ok(d):
        try:
            _check_nondegenerate(problem.cone, values, y0, d)
        except NondegeneracyViolated:
            return False
        return True

    if not ok(lo):
        return 0.0
    if ok(hi):
        return hi
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if ok(mid) else (lo, mid)
    return lo


def find_multiplier(problem: SetValuedProblem, y0, delta: float, rho: float | None = None,
                    safety: float = 1.25, rng=0) -> tuple[Process, GammaCertificate]:
    """Construct a multiplier process from a bounded base of a Henig dilation.

    Steps: ``delta' = delta/4``; ``mu = rho/2`` with ``0 < rho < delta'``
    (default ``delta'/2``); the base of ``Y_+`` is scaled to have least norm
    1 so that its Henig cone with radius ``mu`` sits inside ``(Y_+)_mu``;
    a bounded base of that Henig cone is rescaled against ``V(0) - y0`` with
    ``L = safety * L_hat``; the process is generated from the result and
    certified on the samples.
    """
    cone = problem.cone
    y0 = cone.space.check(y0)
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    values = problem.values_at_zero()
    _check_nondegenerate(cone, values, y0, delta)
    d_prime = delta / 4.0
    rho = d_prime / 2.0 if rho is None else float(rho)
    if not 0 < rho < d_prime:
        raise ValueError(f"rho must lie in (0, delta/4 = {d_prime:g})")
    mu = rho / 2.0
    try:
        f = quasi_interior_functional(cone)
        b0 = base_from_functional(cone, f, 1.0)
    except NoBase as exc:
        raise NoBoundedBase(str(exc)) from None
    b1 = b0.scaled(1.0 / b0.delta)
    henig = henig_dilate(b1, mu)
    b_henig = henig_bounded_base(b1, mu)
    l_hat = lipschitz_at(problem.V, problem.zero)
    lip = safety * max(l_hat.constant, 1e-6)
    base = rescale_base_for_separation(b_henig, lip, d_prime, values - y0)
    proc = build_from_base(problem.G.codomain_space, base)
    cert = certify(proc, cone, problem.V, y0, rng)
    cert.details = {
        "delta": delta, "delta_prime": d_prime, "rho": rho, "mu": mu,
        "L_hat": l_hat.constant, "L": lip, "safety": safety,
        "henig_cone": cone_to_spec(henig), "base_level": base.level,
        "base_delta": base.delta, "base_sigma": base.sigma,
    }
    if not cert.valid:
        raise CertificateFailed(f"checks failed: {', '.join(cert.failing())}", cert, proc)
    return proc, cert


@dataclass
class AugmentedReport:
    ok: bool
    nondominated: bool
    minimal: bool | None
    compatible: bool | None
    pairs: int
    violation: tuple | None = None

    def to_dict(self) -> dict:
        d = {"ok": self.ok, "nondominated": self.nondominated, "minimal": self.minimal,
             "compatible": self.compatible, "pairs": self.pairs}
        if self.violation is not None:
            d["violation"] = [np.asarray(v).tolist() for v in self.violation]
        return d


def _shift_inside(shift: ConvexCone | None, cone: ConvexCone) -> bool:
    if shift is None:
        return True
    try:
        rays = shift.sample_rays(32, 0)
    except NoBase:
        return False
    return bool(np.all(cone.contains(rays)))


def augmented_nd_check(problem: SetValuedProblem, p: Process, y0, probe_radius: float = 2.0,
                       grid_probes=None, rng=0, tol: float = EXACT_TOL) -> AugmentedReport:
    """Is ``y0`` nondominated by the sampled augmented values
    ``F(x) + Delta(G(x))``?

    ``Delta(z)`` is probed by its lowest points (vertices), those points
    moved along the recession rays, and optional ``grid_probes`` filtered by
    membership within ``probe_radius``. When some feasible ``x0`` attains
    ``y0``, minimality and ``Delta(G(x0)) cap (-Y_+) subset Y_+`` are checked
    as well.
    """
    cone = problem.cone
    y0 = cone.space.check(y0)
    F = problem.F if _shift_inside(problem.F.shift_cone, cone) else problem.F.materialized()
    G = problem.G.materialized()
    extra = None if grid_probes is None else cone.space.check(np.atleast_2d(grid_probes))
    if extra is not None:
        extra = extra[cone.space.norm_of(extra) <= probe_radius]
    cache: dict = {}
    pairs = 0
    for x in problem.omega:
        fx = F.base_values(x)
        for z in G.base_values(x):
            k = point_key(z)
            if k not in cache:
                probes = p.value_probes(z)
                if extra is not None and len(extra):
                    probes = np.concatenate([probes, evaluate(p, z, extra)])
                cache[k] = probes
            probes = cache[k]
            if len(probes) == 0:
                continue
            aug = (fx[:, None, :] + probes[None, :, :]).reshape(-1, cone.dim)
            pairs += len(aug)
            below = np.asarray(cone.contains(y0 - aug, tol), dtype=bool).reshape(-1)
            if np.any(below):
                above = np.asarray(cone.contains(aug[below] - y0, tol), dtype=bool).reshape(-1)
                if not np.all(above):
                    bad = aug[below][np.argmin(above)]
                    return AugmentedReport(False, False, None, None, pairs, (x, bad))
    # attainment, minimality and compatibility at a feasible x0
    zero = problem.zero
    x0s = [x for x in problem.omega
           if problem.G.contains(x, zero, tol) and problem.F.contains(x, y0, tol)]
    minimal = compatible = None
    violation = None
    if x0s:
        minimal = True
        compatible = True
        neg = -cone.sample_rays(200, rng)
        for x0 in x0s:
            for z in problem.G.base_values(x0):
                hit = np.asarray(p.contains(np.broadcast_to(z, (len(neg), len(z))), neg, tol), dtype=bool)
                bad = hit & ~np.asarray(cone.contains(neg, tol), dtype=bool)
                if np.any(bad):
                    compatible = False
                    violation = (x0, neg[np.argmax(bad)])
                    break
    ok = compatible is not False
    return AugmentedReport(ok, True, minimal, compatible, pairs, violation)


# ---------------------------------------------------------------------------
# (de)serialisation
# ---------------------------------------------------------------------------

def process_from_spec(spec: dict, domain: SpaceSpec, codomain: SpaceSpec) -> Process:
    """Build a process from ``{"kind": "halfspaces"|"base"|"sublinear", ...}``."""
    kind = spec.get("kind")
    if kind == "halfspaces":
        return NormCoupledHalfspaces(spec["normals"], spec["alphas"], domain, codomain)
    if kind == "base":
        cone = cone_from_spec(spec["cone"], codomain)
        base = base_from_functional(cone, spec["functional"], float(spec.get("level", 1.0)))
        return build_from_base(domain, base)
    if kind == "sublinear":
        if codomain.dim != 1:
            raise DimensionMismatch("sublinear processes are scalar valued")
        if "mu" in spec:
            return upsilon(ScaledNorm(float(spec["mu"]), domain))
        return upsilon(MaxOfLinear(spec["functionals"], domain))
    raise ValueError(f"unknown process kind {kind!r}")


def process_to_spec(p: Process) -> dict:
    if isinstance(p, NormCoupledHalfspaces):
        return {"kind": "halfspaces", "normals": p.normals.tolist(), "alphas": p.alphas.tolist()}
    if isinstance(p, BaseGenerated):
        return {"kind": "base", "cone": cone_to_spec(p.base.cone),
                "functional": p.base.functional.tolist(), "level": p.base.level}
    if isinstance(p, SublinearEpigraph):
        phi = p.phi
        if isinstance(phi, ScaledNorm):
            return {"kind": "sublinear", "mu": phi.mu}
        if isinstance(phi, MaxOfLinear):
            return {"kind": "sublinear", "functionals": phi.functionals.tolist()}
        return {"kind": "sublinear", "callable": repr(phi.fn)}
    raise TypeError(f"unsupported process {type(p).__name__}")
