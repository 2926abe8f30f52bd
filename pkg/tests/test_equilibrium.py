import math

import numpy as np
import pytest

from procmult.equilibrium import (
    DiscretizedFunction,
    EquilibriumProblem,
    equilibrium_multiplier_check,
    example_5_4_bifunction,
    example_5_4_process,
    is_equilibrium,
    random_sigma,
    reformulate,
    run_example_5_4,
    slanted_cone,
)
from procmult.errors import ConsistencyViolated
from procmult.geometry import Sector, orthant
from procmult.multiplier import check_assumption_a, check_assumption_b


def test_discretized_function_oracle():
    t = np.linspace(0, 1, 11)
    f = DiscretizedFunction(3 * t - 1)
    assert f.integral() == pytest.approx(0.5)
    assert f.at0() == -1.0 and f.sup_norm() == 2.0
    assert f(0.25) == pytest.approx(-0.25)
    with pytest.raises(ValueError):
        DiscretizedFunction([1.0])


def test_slanted_cone_angles():
    s = slanted_cone().sector
    assert s.degrees == pytest.approx((math.degrees(math.atan(math.sqrt(2) / 2)),
                                       math.degrees(math.atan(math.sqrt(3) / 2))))
    assert slanted_cone().contains([1.0, 0.8])
    assert not slanted_cone().contains([1.0, 0.5])


def test_bifunction_consistency():
    sigma = random_sigma(11, 5, 1)
    for u in sigma:
        assert np.allclose(example_5_4_bifunction(u, u), 0.0)
    with pytest.raises(ConsistencyViolated):
        EquilibriumProblem(sigma, lambda u, v: [1.0, 0.0], slanted_cone())


def test_random_sigma_shape():
    s = random_sigma(11, 50, 7)
    assert s.shape == (50, 11)
    assert np.all(s[0] == 0) and np.all(s[:, 0] == 0)
    assert np.max(np.abs(s)) <= 1
    assert np.array_equal(s, random_sigma(11, 50, 7))
    with pytest.raises(ValueError):
        random_sigma(1, 5)


def test_zero_is_equilibrium_for_slanted_cone():
    sigma = random_sigma(11, 50, 7)
    p = EquilibriumProblem(sigma, example_5_4_bifunction, slanted_cone())
    assert is_equilibrium(p, sigma[0]).ok
    with pytest.raises(KeyError):
        p.index_of(np.ones(11))


def test_zero_is_not_equilibrium_for_orthant():
    # Fbar(0, v) = (0, -int v) enters -R^2_+ \ {0} whenever int v > 0
    sigma = random_sigma(11, 50, 7)
    p = EquilibriumProblem(sigma, example_5_4_bifunction, orthant(2))
    res = is_equilibrium(p, sigma[0])
    assert not res.ok
    v, val = res.violation
    assert val[0] == 0.0 and val[1] < 0
    assert DiscretizedFunction(v).integral() > 0


def test_reformulation():
    sigma = random_sigma(6, 8, 3)
    p = EquilibriumProblem(sigma, example_5_4_bifunction, slanted_cone())
    F, G = reformulate(p, sigma[0])
    for v in sigma:
        assert np.allclose(F.base_values(v), example_5_4_bifunction(sigma[0], v))
        assert np.allclose(G.base_values(v), 0.0)


def test_process_assumptions():
    proc = example_5_4_process()
    assert check_assumption_a(proc).ok
    assert check_assumption_b(proc, slanted_cone()).ok


def test_multiplier_check_on_samples():
    sigma = random_sigma(11, 30, 11)
    p = EquilibriumProblem(sigma, example_5_4_bifunction, slanted_cone())
    rep = equilibrium_multiplier_check(p, sigma[0], example_5_4_process())
    assert rep.ok and rep.nondominated and rep.minimal and rep.compatible


def test_run_reports():
    out = run_example_5_4(11, 50, 7)
    assert out["ok"] and out["is_equilibrium"] and out["halfplane"]
    assert len(out["rows"]) == 50
    assert all(r["in_halfplane"] for r in out["rows"])
    wrong = run_example_5_4(11, 50, 7, cone=orthant(2))
    assert not wrong["is_equilibrium"] and not wrong["ok"]


def test_wider_cone_also_works():
    # any cone inside the open right half-plane with the same structure
    cone = Sector.from_degrees(20, 50)
    sigma = random_sigma(11, 20, 2)
    p = EquilibriumProblem(sigma, example_5_4_bifunction, cone)
    assert is_equilibrium(p, sigma[0]).ok
