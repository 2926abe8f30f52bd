"""End-to-end runs of the bundled worked examples."""

from __future__ import annotations

import math

import numpy as np

from .catalog import grid_points, half_disc_grid
from .equilibrium import run_example_5_4
from .geometry import SpaceSpec, orthant
from .multiplier import (
    NormCoupledHalfspaces,
    SetValuedProblem,
    augmented_nd_check,
    certify,
    evaluate,
    find_multiplier,
)
from .order import OrderedSample, min_set, nd_check_program
from .penalty import ScalarProblem, exact_penalty_verify, penalty_threshold_sweep
from .setvalued import SampledMap

__all__ = ["example_3_8_problem", "example_3_8_process", "run_example_3_8",
           "example_3_9_problem", "example_3_9_process", "run_example_3_9",
           "parabola_problem", "run_parabola", "run_example"]


def example_3_8_problem(step: float = 0.05) -> SetValuedProblem:
    x, y, z = SpaceSpec(2), SpaceSpec(2), SpaceSpec(1, "abs")
    omega = half_disc_grid(step)
    F = SampledMap.from_function(
        lambda v: [(v[0] ** 2 + v[1] ** 2, v[1] ** 2 + v[0] * v[1])], omega, x, y, "F")
    G = SampledMap.from_function(lambda v: [(v[0],)], omega, x, z, "G")
    return SetValuedProblem(F, G, omega, orthant(2), name="example_3_8")


def example_3_8_process() -> NormCoupledHalfspaces:
    """``Delta(z) = {y : y1 >= |z|, y2 >= |z|}``."""
    return NormCoupledHalfspaces(np.eye(2), [1.0, 1.0], SpaceSpec(1, "abs"), SpaceSpec(2))


def run_example_3_8(step: float = 0.05, delta: float = 0.5, seed: int = 0) -> dict:
    prob = example_3_8_problem(step)
    cone = prob.cone
    y0 = np.zeros(2)
    v0 = prob.values_at_zero()
    nd = nd_check_program(v0, y0, cone)
    mins = min_set(OrderedSample.of(v0, cone))
    minimal = bool(nd and len(mins) == 1 and np.allclose(mins[0], y0, atol=1e-12))
    proc = example_3_8_process()
    cert = certify(proc, cone, prob.V, y0, seed)
    aug = augmented_nd_check(prob, proc, y0)
    # F(x0) + Delta(G(x0)) against sampled R^2_+ and -R^2_+
    x0 = np.zeros(2)
    fx0 = prob.F.base_values(x0)[0]
    gx0 = prob.G.base_values(x0)[0]
    box = grid_points([(0.0, 2.0, 0.1), (0.0, 2.0, 0.1)])
    covers = len(evaluate(proc, gx0, box - fx0)) == len(box)
    neg = -box
    hit = neg[np.asarray(proc.contains(np.broadcast_to(gx0, (len(neg), 1)), neg - fx0), dtype=bool)]
    only_zero = bool(np.all(np.linalg.norm(hit, axis=1) <= 1e-9))
    # 0 stays outside F(x) + Delta(G(x)) for x != x0
    outside = True
    for x in prob.omega:
        if np.allclose(x, x0):
            continue
        fx, gx = prob.F.base_values(x)[0], prob.G.base_values(x)[0]
        outside &= not bool(proc.contains(gx, y0 - fx))
    built, built_cert = find_multiplier(prob, y0, delta, rng=seed)
    built_aug = augmented_nd_check(prob, built, y0)
    ok = minimal and cert.valid and aug.ok and bool(aug.minimal) and covers and only_zero \
        and outside and built_cert.valid and built_aug.ok
    return {
        "example": "3.8", "grid_step": step, "omega_size": len(prob.omega),
        "minimal_P0": minimal, "certificate": cert.to_dict(), "augmented": aug.to_dict(),
        "covers_cone": covers, "meets_negative_cone_only_at_0": only_zero,
        "zero_outside_other_values": bool(outside),
        "constructed": built_cert.to_dict(), "constructed_augmented": built_aug.to_dict(),
        "ok": bool(ok),
    }


def example_3_9_problem(n: int, count: int = 1000, seed: int = 0) -> SetValuedProblem:
    """Finite truncation to R^n; ``omega`` is the origin, the signed unit
    vectors and ``count`` random points of the unit ball."""
    sp = SpaceSpec(n)
    rng = np.random.default_rng(seed)
    d = rng.standard_normal((count, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = rng.uniform(0.0, 1.0, count) ** (1.0 / n)
    eye = np.eye(n)
    omega = np.concatenate([np.zeros((1, n)), eye, -eye, d * r[:, None]])
    cone = orthant(n)
    F = SampledMap.from_function(lambda v: [np.square(v)], omega, sp, sp, "F", shift_cone=cone)
    G = SampledMap.from_function(lambda v: [np.power(v, 3)], omega, sp, sp, "G")
    return SetValuedProblem(F, G, omega, cone, name=f"example_3_9_{n}")


def example_3_9_process(n: int) -> NormCoupledHalfspaces:
    """``Delta(z) = {y : y_i >= |z|}``."""
    sp = SpaceSpec(n)
    return NormCoupledHalfspaces(np.eye(n), np.ones(n), sp, sp)


def run_example_3_9(n: int = 5, count: int = 1000, seed: int = 0) -> dict:
    prob = example_3_9_problem(n, count, seed)
    cone = prob.cone
    y0 = np.zeros(n)
    v0 = prob.values_at_zero()
    minimal = bool(nd_check_program(v0, y0, cone) and np.any(np.all(v0 == 0, axis=1)))
    proc = example_3_9_process(n)
    aug = augmented_nd_check(prob, proc, y0)
    cert = certify(proc, cone, prob.V, y0, seed)
    ok = minimal and aug.ok and aug.nondominated and bool(aug.minimal) and aug.pairs >= 10_000
    return {
        "example": "3.9", "n": n, "omega_size": len(prob.omega), "minimal_P0": minimal,
        "augmented": aug.to_dict(), "certificate": cert.to_dict(),
        "note": "in finite dimensions the orthant has interior points, so the "
                "interior check finds a witness here",
        "ok": bool(ok),
    }


def parabola_problem(step: float = 0.001) -> ScalarProblem:
    n = int(round(1.0 / step))
    omega = (np.arange(-n, n + 1) / n)[:, None]
    return ScalarProblem.from_functions(lambda x: [-x[0] ** 2], lambda x: [x[0]], omega,
                                        name="parabola")


def run_parabola(safety: float = 1.5, step: float = 0.001) -> dict:
    p = parabola_problem(step)
    rep = exact_penalty_verify(p, safety)
    sweep = penalty_threshold_sweep(p, [0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0])
    low = next(r for r in sweep.rows if math.isclose(r.mu, 0.5))
    ok = rep.exact and rep.x0_recovered and low.gap > 0
    return {"example": "parabola", "report": rep.to_dict(), "sweep": sweep.to_dict(),
            "gap_at_mu_0.5": low.gap, "ok": bool(ok)}


def run_example(name: str, **kw) -> dict:
    if name == "3.8":
        return run_example_3_8(**kw)
    if name == "3.9":
        return run_example_3_9(**kw)
    if name == "5.4":
        return run_example_5_4(**kw)
    if name == "parabola":
        return run_parabola(**kw)
    raise KeyError(f"unknown example {name!r}")
