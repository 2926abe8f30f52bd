import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from procmult.errors import DimensionMismatch, EmptySet
from procmult.geometry import Generators, Sector, orthant
from procmult.order import OrderedSample, is_nondominated, lex_sorted, min_set, nd_check_program

QUAD = orthant(2)


def brute_min(points, cone):
    """O(n^2) oracle: a is minimal iff every b <= a also satisfies a <= b."""
    keep = []
    for a in points:
        ok = True
        for b in points:
            if cone.contains(a - b) and not cone.contains(b - a):
                ok = False
                break
        if ok:
            keep.append(a)
    return lex_sorted(np.array(keep).reshape(-1, points.shape[1]))


def test_min_set_examples():
    pts = np.array([[1.0, 1.0], [0.0, 0.0], [-1.0, 2.0], [2.0, -1.0], [1.0, -1.0]])
    mins = min_set(OrderedSample.of(pts, QUAD))
    assert np.array_equal(mins, [[-1.0, 2.0], [0.0, 0.0], [1.0, -1.0]])
    assert np.array_equal(min_set(OrderedSample.of([[3.0, 3.0]], QUAD)), [[3.0, 3.0]])


def test_min_set_keeps_duplicates_of_minimal_points():
    pts = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 1.0]])
    mins = min_set(OrderedSample.of(pts, QUAD))
    assert len(mins) == 2 and np.all(mins == 0)


def test_min_set_empty():
    with pytest.raises(EmptySet):
        min_set(OrderedSample.of(np.zeros((0, 2)), QUAD))


def test_nondominated_examples():
    pts = np.array([[1.0, 1.0], [0.0, 0.0], [-1.0, 2.0]])
    s = OrderedSample.of(pts, QUAD)
    assert is_nondominated([0.0, 0.0], s)
    assert not is_nondominated([1.0, 1.0], s)
    assert is_nondominated([-5.0, -5.0], s)  # need not belong to A
    assert is_nondominated([0.0, 0.0], OrderedSample.of(np.zeros((0, 2)), QUAD))
    with pytest.raises(DimensionMismatch):
        is_nondominated([[0.0, 0.0], [1.0, 1.0]], s)


def test_nd_program_reports_empty_values():
    with pytest.raises(EmptySet):
        nd_check_program(np.zeros((0, 2)), [0.0, 0.0], QUAD)
    assert nd_check_program([[0.0, 0.0], [1.0, 0.0]], [0.0, 0.0], QUAD)


def test_order_depends_on_cone():
    pts = np.array([[0.0, 0.0], [1.0, -0.5]])
    assert len(min_set(OrderedSample.of(pts, QUAD))) == 2
    wide = Sector.from_degrees(-45, 90)
    assert np.array_equal(min_set(OrderedSample.of(pts, wide)), [[0.0, 0.0]])


def test_one_dimensional_order():
    ray = orthant(1, "abs")
    pts = np.array([[3.0], [-1.0], [2.0], [-1.0]])
    assert np.array_equal(min_set(OrderedSample.of(pts, ray)), [[-1.0], [-1.0]])


@settings(max_examples=80, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 25), st.just(3)),
              elements=st.integers(-3, 3).map(float)))
def test_min_set_properties(pts):
    cone = orthant(3)
    mins = min_set(OrderedSample.of(pts, cone))
    assert len(mins) >= 1  # finite sets always have minimal points
    # every minimal point belongs to A and is nondominated in A
    s = OrderedSample.of(pts, cone)
    for m in mins:
        assert np.any(np.all(pts == m, axis=1))
        assert is_nondominated(m, s)
    # every point of A dominates some minimal point
    for a in pts:
        assert np.any(np.asarray(cone.contains(a - mins), dtype=bool))
    assert np.array_equal(mins, brute_min(pts, cone))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_min_set_general_cone_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    cone = Generators(np.abs(rng.normal(size=(3, 3))) + 0.2 * np.eye(3))
    pts = np.round(rng.normal(size=(20, 3)), 1)
    assert np.array_equal(min_set(OrderedSample.of(pts, cone)), brute_min(pts, cone))
