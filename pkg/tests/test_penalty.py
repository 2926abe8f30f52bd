import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from procmult.errors import GapExceedsTolerance, Infeasible
from procmult.geometry import SpaceSpec
from procmult.multiplier import MaxOfLinear, ScaledNorm
from procmult.penalty import (
    ScalarProblem,
    constrained_infimum,
    exact_penalty_verify,
    penalized_infimum,
    penalty_threshold_sweep,
    s_r0_membership,
    value_map,
)


def parabola(n=201):
    x = np.linspace(-1, 1, n)
    return ScalarProblem.from_functions(lambda v: [-v[0] ** 2], lambda v: [v[0]], x)


def abs_shift(n=201):
    x = np.linspace(-1, 1, n)
    return ScalarProblem.from_functions(lambda v: [abs(v[0] - 0.5)], lambda v: [v[0]], x)


def random_problem(seed, size=30):
    rng = np.random.default_rng(seed)
    x = np.arange(size, dtype=float)
    f = rng.normal(size=size)
    g = rng.normal(size=size)
    g[rng.choice(size, 3, replace=False)] = 0.0
    return ScalarProblem(x, list(f), list(g))


def test_constrained_infimum_examples():
    r0, args = constrained_infimum(parabola())
    assert r0 == 0.0 and np.array_equal(args, [[0.0]])
    r0, args = constrained_infimum(abs_shift())
    assert r0 == 0.5
    with pytest.raises(Infeasible):
        constrained_infimum(ScalarProblem([0.0, 1.0], [0.0, 0.0], [1.0, 2.0]))


def test_feasibility_tolerance():
    p = ScalarProblem([0.0, 1.0], [5.0, -1.0], [0.0, 1e-10])
    assert constrained_infimum(p)[0] == -1.0
    q = ScalarProblem([0.0, 1.0], [5.0, -1.0], [0.0, 1e-10], feasibility_tol=0.0)
    assert constrained_infimum(q)[0] == 5.0


@pytest.mark.parametrize("mu", [0.0, 0.3, 0.5, 0.9, 1.0, 1.2, 2.0])
def test_parabola_gap_closed_form(mu):
    # min over [-1, 1] of -x^2 + mu |x| is min(0, mu - 1)
    inf, _ = penalized_infimum(parabola(), ScaledNorm(mu))
    assert inf == pytest.approx(min(0.0, mu - 1.0), abs=1e-12)


@pytest.mark.parametrize("mu", [0.0, 0.4, 0.8, 1.0, 1.5])
def test_abs_shift_gap_closed_form(mu):
    # |x - 0.5| + mu |x| on [-1, 1]: minimum min(0.5, 0.5 mu)
    inf, args = penalized_infimum(abs_shift(), ScaledNorm(mu))
    assert inf == pytest.approx(min(0.5, 0.5 * mu), abs=1e-12)
    if mu > 1:
        assert np.array_equal(args, [[0.0]])


def test_value_map_snaps_feasible_images():
    p = ScalarProblem([0.0, 1.0, 2.0], [1.0, 2.0, 3.0], [1e-12, 0.0, 1.0])
    V = value_map(p)
    assert sorted(V.values([0.0]).ravel()) == [1.0, 2.0]
    assert sorted(V.values([1.0]).ravel()) == [3.0]


def test_verify_parabola():
    rep = exact_penalty_verify(parabola(), safety=1.5)
    assert rep.L_hat == pytest.approx(1.0)
    assert rep.mu == pytest.approx(1.5)
    assert rep.exact and rep.x0_recovered and rep.gap == 0.0
    low = exact_penalty_verify(parabola(), mu=0.5)
    assert not low.exact and low.gap == pytest.approx(0.5)
    with pytest.raises(GapExceedsTolerance) as info:
        exact_penalty_verify(parabola(), mu=0.5, strict=True)
    assert info.value.report.gap == pytest.approx(0.5)
    with pytest.raises(ValueError):
        exact_penalty_verify(parabola(), safety=0.0)


def test_verify_multivalued_data():
    # f(x) = {x, x + 1}: only the lower branch matters
    x = np.linspace(-1, 1, 21)
    p = ScalarProblem(x, [[v, v + 1] for v in x], [[v] for v in x])
    rep = exact_penalty_verify(p, safety=1.0)
    # V(z) = {z, z + 1} lies within |z| of V(0) = {0, 1}
    assert rep.L_hat == pytest.approx(1.0)
    assert rep.r0 == 0.0 and rep.exact


def test_s_r0_membership_matches_gap():
    p = parabola()
    assert s_r0_membership(p, ScaledNorm(1.5), 0.0).ok
    res = s_r0_membership(p, ScaledNorm(0.5), 0.0)
    assert not res.ok and abs(res.violation[0][0]) >= 0.5


def test_sweep_parabola():
    sw = penalty_threshold_sweep(parabola(), [0.0, 0.5, 1.0, 1.5])
    assert [r.gap for r in sw.rows] == pytest.approx([1.0, 0.5, 0.0, 0.0], abs=1e-12)
    assert sw.threshold == 1.0
    with pytest.raises(ValueError):
        penalty_threshold_sweep(parabola(), [1.0, 0.5])
    with pytest.raises(ValueError):
        penalty_threshold_sweep(parabola(), [-1.0, 0.5])


def test_vector_constraint():
    x = np.linspace(-1, 1, 21)
    z = SpaceSpec(2)
    p = ScalarProblem.from_functions(lambda v: [-v[0] ** 2], lambda v: [(v[0], 0.0)], x, z)
    assert exact_penalty_verify(p, mu=1.5).exact
    phi = MaxOfLinear([[1.0, 0.0], [-1.0, 0.0]], z)  # |z1|
    inf, _ = penalized_infimum(p, phi)
    assert inf == pytest.approx(0.0)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_monotone_in_mu(seed):
    p = random_problem(seed)
    mus = np.linspace(0, 5, 11)
    sw = penalty_threshold_sweep(p, mus)
    infs = [r.penalized_inf for r in sw.rows]
    assert all(b >= a - 1e-12 for a, b in zip(infs, infs[1:]))
    assert all(r.penalized_inf <= sw.r0 + 1e-12 for r in sw.rows)
    gaps = [r.gap for r in sw.rows]
    assert all(b <= a + 1e-12 for a, b in zip(gaps, gaps[1:]))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_calm_constant_bounds_threshold(seed):
    p = random_problem(seed)
    rep = exact_penalty_verify(p, safety=1.0)
    assert rep.exact
    assert rep.mu == pytest.approx(max(rep.L_hat, 1e-6))
