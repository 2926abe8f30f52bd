"""Vector equilibrium problems on sampled feasible sets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyViolated
from .geometry import EXACT_TOL, ConvexCone, Halfspaces, SpaceSpec
from .multiplier import (
    AugmentedReport,
    CheckResult,
    NormCoupledHalfspaces,
    Process,
    SetValuedProblem,
    augmented_nd_check,
    evaluate,
)
from .order import nd_check_program
from .setvalued import SampledMap

__all__ = [
    "DiscretizedFunction",
    "EquilibriumProblem",
    "is_equilibrium",
    "reformulate",
    "equilibrium_multiplier_check",
    "slanted_cone",
    "example_5_4_process",
    "example_5_4_bifunction",
    "random_sigma",
    "run_example_5_4",
]


@dataclass(frozen=True)
class DiscretizedFunction:
    """Piecewise-linear function on a uniform grid of ``[0, 1]``."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1)
        if len(v) < 2:
            raise ValueError("at least two grid values are needed")
        object.__setattr__(self, "values", v)

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, len(self.values))

    def at0(self) -> float:
        return float(self.values[0])

    def integral(self) -> float:
        # the trapezoid rule is exact for piecewise-linear data
        return float(np.trapezoid(self.values, self.grid))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __call__(self, t):
        return np.interp(t, self.grid, self.values)


@dataclass
class EquilibriumProblem:
    """Bifunction ``Fbar: Sigma x Sigma -> Y`` tabulated on the samples.

    ``bifunction(u, v)`` returns one value or an ``(k, dim Y)`` value set.
    Consistency ``Fbar(x, x) = {0}`` is asserted at construction.
    """

    sigma: np.ndarray
    bifunction: object
    cone: ConvexCone
    x_space: SpaceSpec | None = None
    tol: float = EXACT_TOL
    table: dict = field(default=None, repr=False)

    def __post_init__(self):
        self.sigma = np.atleast_2d(np.asarray(self.sigma, dtype=float))
        if self.x_space is None:
            self.x_space = SpaceSpec(self.sigma.shape[1], "supremum")
        m = self.cone.dim
        self.table = {}
        for i, u in enumerate(self.sigma):
            for j, v in enumerate(self.sigma):
                self.table[i, j] = self.cone.space.check(
                    np.atleast_2d(np.asarray(self.bifunction(u, v), dtype=float)).reshape(-1, m))
        for i in range(len(self.sigma)):
            vals = self.table[i, i]
            if np.any(np.linalg.norm(vals, axis=1) > self.tol):
                raise ConsistencyViolated(f"Fbar(x, x) != {{0}} at sample {i}", self.sigma[i])

    def index_of(self, x0) -> int:
        x0 = np.asarray(x0, dtype=float).reshape(-1)
        d = np.max(np.abs(self.sigma - x0), axis=1)
        i = int(np.argmin(d))
        if d[i] > self.tol:
            raise KeyError("x0 is not a sample of Sigma")
        return i


def is_equilibrium(p: EquilibriumProblem, x0) -> CheckResult:
    """``Fbar(x0, x) cap (-Y_+) subset Y_+`` for every sampled ``x``."""
    i = p.index_of(x0)
    count = 0
    for j in range(len(p.sigma)):
        vals = p.table[i, j]
        count += len(vals)
        below = np.asarray(p.cone.contains(-vals, p.tol), dtype=bool).reshape(-1)
        above = np.asarray(p.cone.contains(vals, p.tol), dtype=bool).reshape(-1)
        bad = below & ~above
        if np.any(bad):
            return CheckResult(False, violation=(p.sigma[j], vals[np.argmax(bad)]), samples=count)
    return CheckResult(True, samples=count)


def reformulate(p: EquilibriumProblem, x0) -> tuple[SampledMap, SampledMap]:
    """``F(x) = Fbar(x0, x)`` and ``G(x) = Fbar(x, x)`` on ``Sigma``."""
    i = p.index_of(x0)
    n = len(p.sigma)
    y = p.cone.space
    F = SampledMap(p.x_space, y, p.sigma, tuple(p.table[i, j] for j in range(n)), name="F")
    G = SampledMap(p.x_space, y, p.sigma, tuple(p.table[j, j] for j in range(n)), name="G")
    if not G.contains(p.sigma[i], np.zeros(y.dim), p.tol):
        raise ConsistencyViolated("G(x0) does not contain 0", p.sigma[i])
    return F, G


def equilibrium_multiplier_check(p: EquilibriumProblem, x0, process: Process,
                                 probes=None) -> AugmentedReport:
    """Run the augmented nondominance check on the reformulated program
    with ``y0 = 0``; compatibility at ``G(x0)`` is part of the report."""
    F, G = reformulate(p, x0)
    prob = SetValuedProblem(F, G, p.sigma, p.cone)
    return augmented_nd_check(prob, process, np.zeros(p.cone.dim), grid_probes=probes)


# ---------------------------------------------------------------------------
# the slanted-cone example on C[0, 1]
# ---------------------------------------------------------------------------

R2 = math.sqrt(2.0) / 2.0
R3 = math.sqrt(3.0) / 2.0


def slanted_cone() -> Halfspaces:
    """``{y : (sqrt2/2) y1 <= y2 <= (sqrt3/2) y1, y1 >= 0}``."""
    return Halfspaces([[-R2, 1.0], [R3, -1.0], [1.0, 0.0]], SpaceSpec(2))


def example_5_4_process() -> NormCoupledHalfspaces:
    y = SpaceSpec(2)
    return NormCoupledHalfspaces([[-R2, 1.0], [R3, -1.0], [1.0, 0.0]], [1.0, 1.0, 0.0], y, y)


def example_5_4_bifunction(u, v) -> np.ndarray:
    """``(u(0)^2 + (v(0) - u(0))^2, int_0^1 (u - v))`` on grid values."""
    fu, fv = DiscretizedFunction(u), DiscretizedFunction(v)
    d = DiscretizedFunction(fu.values - fv.values)
    return np.array([fu.at0() ** 2 + (fv.at0() - fu.at0()) ** 2, d.integral()])


def random_sigma(n_grid: int, count: int, seed=7) -> np.ndarray:
    """``count`` functions with ``u(0) = 0`` and ``|u|_sup <= 1``; the zero
    function comes first."""
    if n_grid < 2 or count < 1:
        raise ValueError("need n_grid >= 2 and count >= 1")
    rng = np.random.default_rng(seed)
    vals = rng.uniform(-1.0, 1.0, size=(count, n_grid))
    vals[0] = 0.0
    vals[:, 0] = 0.0
    return vals


def run_example_5_4(n_grid: int = 11, count: int = 50, seed=7,
                    cone: ConvexCone | None = None) -> dict:
    """Discretised slanted-cone equilibrium: checks and per-sample rows."""
    cone = cone or slanted_cone()
    sigma = random_sigma(n_grid, count, seed)
    prob = EquilibriumProblem(sigma, example_5_4_bifunction, cone, SpaceSpec(n_grid, "supremum"))
    x0 = sigma[0]
    eq = is_equilibrium(prob, x0)
    proc = example_5_4_process()
    aug = equilibrium_multiplier_check(prob, x0, proc)
    F, G = reformulate(prob, x0)
    v0 = np.concatenate([F.base_values(x) for x in sigma])
    nd = nd_check_program(v0, np.zeros(2), cone)
    # F(v) + Delta(G(v)) stays in the closed right half-plane
    halfplane = True
    for x in sigma:
        for z in G.base_values(x):
            pts = (F.base_values(x)[:, None, :] + proc.value_probes(z)[None, :, :]).reshape(-1, 2)
            halfplane &= bool(np.all(pts[:, 0] >= -EXACT_TOL))
    # Delta(G(u0)) cap (-Y_+) = {0} on sampled rays
    neg = -cone.sample_rays(400, seed)
    hit = evaluate(proc, G.base_values(x0)[0], neg)
    compat = bool(len(hit) == 0 or np.all(np.linalg.norm(hit, axis=1) <= EXACT_TOL))
    rows = []
    for j, v in enumerate(sigma):
        f = F.base_values(v)[0]
        rows.append({"index": j, "v0": float(v[0]), "integral": DiscretizedFunction(v).integral(),
                     "F1": float(f[0]), "F2": float(f[1]),
                     "in_halfplane": bool(f[0] >= -EXACT_TOL)})
    return {
        "grid": n_grid, "samples": count, "seed": seed,
        "is_equilibrium": eq.ok,
        "nd_check": bool(nd),
        "multiplier_check": aug.ok and aug.nondominated,
        "minimal": aug.minimal,
        "compatible": bool(aug.compatible) and compat,
        "halfplane": halfplane,
        "pairs": aug.pairs,
        "ok": bool(eq.ok and nd and aug.ok and compat and halfplane),
        "rows": rows,
    }
