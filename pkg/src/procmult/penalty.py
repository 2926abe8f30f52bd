"""Scalar exact penalization on sampled programs ``min f(x) s.t. g(x) = 0``."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GapExceedsTolerance, Infeasible
from .geometry import SpaceSpec
from .multiplier import CheckResult, ScaledNorm, SublinearFn
from .setvalued import SampledMap, lipschitz_at

__all__ = [
    "ScalarProblem",
    "PenaltyReport",
    "SweepResult",
    "constrained_infimum",
    "penalized_infimum",
    "s_r0_membership",
    "value_map",
    "exact_penalty_verify",
    "penalty_threshold_sweep",
]

TIE_TOL = 1e-12
MU_FLOOR = 1e-6
SCALAR = SpaceSpec(1, "abs")


@dataclass
class ScalarProblem:
    """Sampled scalar program.

    ``f_values[i]`` and ``g_values[i]`` are the (finite) value sets of ``f``
    and ``g`` at ``omega[i]``; single-valued data are one-element sets.
    """

    omega: np.ndarray
    f_values: list
    g_values: list
    z_space: SpaceSpec = SCALAR
    feasibility_tol: float = 1e-9
    name: str | None = None

    def __post_init__(self):
        self.omega = np.asarray(self.omega, dtype=float)
        if self.omega.ndim == 1:
            self.omega = self.omega[:, None]
        if len(self.f_values) != len(self.omega) or len(self.g_values) != len(self.omega):
            raise ValueError("value tables must cover every sample of omega")
        if self.feasibility_tol < 0:
            raise ValueError("feasibility_tol must be nonnegative")
        self.f_values = [np.atleast_1d(np.asarray(v, dtype=float)).reshape(-1) for v in self.f_values]
        self.g_values = [self.z_space.check(np.atleast_2d(np.asarray(v, dtype=float)).reshape(-1, self.z_space.dim))
                         for v in self.g_values]

    @classmethod
    def from_functions(cls, f, g, omega, z_space: SpaceSpec = SCALAR, **kw) -> "ScalarProblem":
        omega = np.asarray(omega, dtype=float)
        if omega.ndim == 1:
            omega = omega[:, None]
        return cls(omega, [f(x) for x in omega], [g(x) for x in omega], z_space, **kw)

    def feasible_pairs(self):
        """``(index, f-value)`` for every tolerance-feasible combination."""
        for i, (fv, gv) in enumerate(zip(self.f_values, self.g_values)):
            if np.any(self.z_space.norm_of(gv) <= self.feasibility_tol):
                for r in fv:
                    yield i, float(r)


def _argmins(values: np.ndarray, omega: np.ndarray) -> tuple[float, np.ndarray]:
    best = float(np.min(values)) + 0.0
    idx = np.nonzero(values <= best + TIE_TOL * max(1.0, abs(best)))[0]
    pts = omega[idx]
    return best, pts[np.lexsort(pts.T[::-1])]


def constrained_infimum(p: ScalarProblem) -> tuple[float, np.ndarray]:
    """``r0 = min f`` over the tolerance-feasible samples, with all minimisers."""
    vals = np.full(len(p.omega), np.inf)
    for i, r in p.feasible_pairs():
        vals[i] = min(vals[i], r)
    if not np.any(np.isfinite(vals)):
        raise Infeasible("no sample satisfies |g(x)| <= feasibility_tol")
    return _argmins(vals, p.omega)


def _penalized_values(p: ScalarProblem, phi: SublinearFn) -> np.ndarray:
    out = np.empty(len(p.omega))
    for i, (fv, gv) in enumerate(zip(p.f_values, p.g_values)):
        out[i] = np.min(fv) + np.min(np.atleast_1d(phi(gv)))
    return out


def penalized_infimum(p: ScalarProblem, phi: SublinearFn) -> tuple[float, np.ndarray]:
    """``min_x min (F(x) + phi(G(x)))`` over the samples."""
    return _argmins(_penalized_values(p, phi), p.omega)


def s_r0_membership(p: ScalarProblem, phi: SublinearFn, r0: float,
                    margin: float = 1e-12) -> CheckResult:
    """Sampled test of ``-phi(z) < r - r0`` for every ``z != 0`` in the
    image of ``g`` and every ``r`` in ``f`` at the corresponding ``x``."""
    count = 0
    worst = None
    for fv, gv in zip(p.f_values, p.g_values):
        nz = p.z_space.norm_of(gv) > p.feasibility_tol
        for z in gv[nz]:
            phz = float(phi(z))
            for r in fv:
                count += 1
                m = (r - r0) + phz
                if m < margin and (worst is None or m < worst[0]):
                    worst = (m, z, r)
    if worst is not None:
        return CheckResult(False, violation=(worst[1], np.array([worst[2]])), samples=count,
                           note=f"-phi(z) < r - r0 fails with margin {worst[0]:.12g}")
    return CheckResult(True, samples=count)


def value_map(p: ScalarProblem) -> SampledMap:
    """``V(z) = f(g^{-1}(z))`` with tolerance-feasible images snapped to ``0``."""
    pairs = []
    zero = np.zeros(p.z_space.dim)
    for fv, gv in zip(p.f_values, p.g_values):
        for z in gv:
            zz = zero if p.z_space.norm_of(z) <= p.feasibility_tol else z
            for r in fv:
                pairs.append((zz, [r]))
    return SampledMap.from_pairs(pairs, p.z_space, SCALAR, name="V")


@dataclass
class PenaltyReport:
    r0: float
    L_hat: float
    mu: float
    penalized_inf: float
    gap: float
    argmin: np.ndarray
    constrained_argmin: np.ndarray
    exact: bool
    x0_recovered: bool
    samples: int = 0
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "r0": self.r0, "L_hat": self.L_hat, "mu": self.mu,
            "penalized_inf": self.penalized_inf, "gap": self.gap,
            "argmin": self.argmin.tolist(), "constrained_argmin": self.constrained_argmin.tolist(),
            "exact": self.exact, "x0_recovered": self.x0_recovered, "samples": self.samples,
        }


def _report(p, r0, cargs, l_hat, mu, gap_tol):
    pen, pargs = penalized_infimum(p, ScaledNorm(mu, p.z_space))
    gap = r0 - pen + 0.0
    pset = {tuple(a) for a in pargs}
    recovered = all(tuple(a) in pset for a in cargs)
    return PenaltyReport(r0, l_hat, mu, pen, gap, pargs, cargs,
                         bool(gap <= gap_tol), bool(recovered), len(p.omega))


def exact_penalty_verify(p: ScalarProblem, safety: float = 1.25, mu: float | None = None,
                         gap_tol: float = 1e-12, strict: bool = False) -> PenaltyReport:
    """Penalise with ``mu = safety * max(L_hat, 1e-6)`` (or a given ``mu``)
    and compare the penalised infimum with ``r0``.

    ``L_hat`` is the sampled Lipschitz constant of ``V`` at ``0``. With
    ``strict`` a positive gap raises :class:`GapExceedsTolerance`.
    """
    r0, cargs = constrained_infimum(p)
    l_hat = lipschitz_at(value_map(p), np.zeros(p.z_space.dim)).constant
    if mu is None:
        if safety <= 0:
            raise ValueError("safety must be positive")
        mu = safety * max(l_hat, MU_FLOOR)
    rep = _report(p, r0, cargs, l_hat, float(mu), gap_tol)
    if strict and not rep.exact:
        raise GapExceedsTolerance(f"gap {rep.gap:.12g} exceeds {gap_tol:g}", rep)
    return rep


@dataclass
class SweepResult:
    rows: list
    threshold: float | None
    L_hat: float
    r0: float

    def to_dict(self) -> dict:
        return {"r0": self.r0, "L_hat": self.L_hat, "threshold": self.threshold,
                "rows": [{"mu": r.mu, "penalized_inf": r.penalized_inf, "gap": r.gap,
                          "argmin": r.argmin.tolist()} for r in self.rows]}


def penalty_threshold_sweep(p: ScalarProblem, mu_grid, gap_tol: float = 1e-12) -> SweepResult:
    """Penalised infimum and gap for each ``mu``; the threshold is the
    smallest ``mu`` whose gap is within ``gap_tol``."""
    mus = [float(m) for m in mu_grid]
    if any(b < a for a, b in zip(mus, mus[1:])):
        raise ValueError("mu_grid must be sorted ascending")
    if any(m < 0 for m in mus):
        raise ValueError("mu values must be nonnegative")
    r0, cargs = constrained_infimum(p)
    l_hat = lipschitz_at(value_map(p), np.zeros(p.z_space.dim)).constant
    rows = [_report(p, r0, cargs, l_hat, m, gap_tol) for m in mus]
    thr = next((r.mu for r in rows if r.exact), None)
    return SweepResult(rows, thr, l_hat, r0)
