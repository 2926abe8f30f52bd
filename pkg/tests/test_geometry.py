import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from procmult.errors import (
    DegenerateCone,
    DimensionMismatch,
    EmptySet,
    EpsilonOutOfRange,
    EpsilonTooLarge,
    NoBase,
    NotQuasiInterior,
    SeparationViolated,
)
from procmult.geometry import (
    Generators,
    Halfspaces,
    Sector,
    SpaceSpec,
    base_from_functional,
    cone_contains,
    cone_from_spec,
    cone_to_spec,
    dilate_eps,
    dilation_contains,
    distance_to_set,
    dual_cone,
    henig_bounded_base,
    henig_dilate,
    orthant,
    quasi_interior_functional,
    rescale_base_for_separation,
)

R2, R3 = math.sqrt(2) / 2, math.sqrt(3) / 2
SLANTED = Halfspaces([[-R2, 1.0], [R3, -1.0], [1.0, 0.0]])
QUADRANT = Sector.from_degrees(0, 90)


def direction_deg(v):
    return math.degrees(math.atan2(v[1], v[0]))


def arc_oracle(points):
    """Extreme polar angles (degrees) of points near the positive x-axis side."""
    ang = np.degrees(np.arctan2(points[:, 1], points[:, 0]))
    return ang.min(), ang.max()


# -- spaces -------------------------------------------------------------------

def test_space_norms():
    assert SpaceSpec(2, "supremum").norm_of([3.0, -4.0]) == 4.0
    assert SpaceSpec(2).norm_of([3.0, -4.0]) == 5.0
    assert SpaceSpec(2, "supremum").dual_norm_of([3.0, -4.0]) == 7.0
    assert SpaceSpec(1, "abs").norm_of([-2.0]) == 2.0
    with pytest.raises(ValueError):
        SpaceSpec(2, "abs")
    with pytest.raises(ValueError):
        SpaceSpec(0)


def test_sphere_samples_have_unit_norm():
    for sp in (SpaceSpec(3), SpaceSpec(3, "supremum"), SpaceSpec(2)):
        pts = sp.sphere_samples(50, 0)
        assert np.allclose(sp.norm_of(pts), 1.0)


# -- membership -----------------------------------------------------------------

def test_membership_examples():
    assert cone_contains(QUADRANT, [1.0, 1.0])
    assert cone_contains(SLANTED, [1.0, 0.8])
    assert not cone_contains(QUADRANT, [-1.0, 0.0])


def test_membership_representations_agree(rng):
    gens = Generators([[1.0, 0.0], [0.0, 1.0]])
    half = Halfspaces([[1.0, 0.0], [0.0, 1.0]])
    pts = rng.normal(size=(500, 2))
    a = QUADRANT.contains(pts)
    assert np.array_equal(a, gens.contains(pts))
    assert np.array_equal(a, half.contains(pts))
    assert np.array_equal(a, np.all(pts >= 0, axis=1))


def test_non_simplicial_generators_use_nnls(rng):
    cone = Generators([[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]])
    pts = rng.normal(size=(200, 3))
    assert np.array_equal(cone.contains(pts), np.all(pts >= 0, axis=1))


def test_membership_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        QUADRANT.contains([1.0, 2.0, 3.0])


def test_membership_tolerance_is_relative():
    assert QUADRANT.contains([1e6, -1e-4])  # distance 1e-4 <= 1e-9 * 1e6
    assert not QUADRANT.contains([1.0, -1e-6])
    assert QUADRANT.contains([1.0, -1e-6], tol=1e-5)


def test_degenerate_cones_rejected():
    with pytest.raises(DegenerateCone):
        Generators([[1, 0], [0, 1], [-1, 0], [0, -1]])
    with pytest.raises(DegenerateCone):
        Generators([[1.0, 0.0], [-1.0, 0.0]])  # a line
    with pytest.raises(DegenerateCone):
        Halfspaces([[1, 0], [-1, 0], [0, 1], [0, -1]])  # {0}
    with pytest.raises(DegenerateCone):
        Generators([[0.0, 0.0]])
    with pytest.raises(DegenerateCone):
        Sector(0.0, 2 * math.pi)


def test_sector_angles_normalised():
    s = Sector(-math.pi / 2, 1.0)
    assert 0 <= s.start < 2 * math.pi
    assert s.degrees[0] == pytest.approx(-90.0)


def test_halfspace_extreme_rays():
    rays = Halfspaces(np.eye(3)).extreme_rays()
    assert sorted(map(tuple, np.round(np.abs(rays), 12))) == [(0, 0, 1), (0, 1, 0), (1, 0, 0)]
    with pytest.raises(NoBase):
        Halfspaces([[1.0, 0.0, 0.0]]).extreme_rays()


def test_projection_matches_moreau(rng):
    cone = Halfspaces([[1.0, 0.0, 0.0], [0.0, 1.0, 1.0]])
    y = rng.normal(size=(50, 3))
    p = cone.project(y)
    assert np.all(cone.contains(p, tol=1e-8))
    # residual is orthogonal to the projection
    assert np.allclose(np.sum((y - p) * p, axis=1), 0.0, atol=1e-8)


# -- duality ----------------------------------------------------------------------

def test_dual_examples():
    d = dual_cone(QUADRANT)
    assert d.degrees == pytest.approx((0.0, 90.0))
    ray = Generators([[1.0, 0.0]])
    half = dual_cone(ray)
    assert isinstance(half, Halfspaces)
    assert half.contains([0.0, 1.0]) and half.contains([0.0, -1.0]) and half.contains([2.0, 5.0])
    assert not half.contains([-1.0, 0.1])


def test_dual_sector_against_angular_oracle():
    d = dual_cone(Sector.from_degrees(0, 45))
    phis = np.radians(np.linspace(0, 45, 451))
    thetas = np.radians(np.linspace(-180, 180, 36001))
    ok = np.all(np.cos(thetas[:, None] - phis[None, :]) >= -1e-12, axis=1)
    lo, hi = np.degrees(thetas[ok].min()), np.degrees(thetas[ok].max())
    assert (lo, hi) == pytest.approx((-45.0, 90.0), abs=0.02)
    assert d.degrees == pytest.approx((-45.0, 90.0))


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 359), st.floats(1, 179))
def test_dual_of_dual_sector(start, width):
    c = Sector.from_degrees(start, start + width)
    dd = dual_cone(dual_cone(c))
    assert math.isclose(dd.width, c.width, abs_tol=1e-9)
    gap = (dd.start - c.start) % (2 * math.pi)
    assert min(gap, 2 * math.pi - gap) < 1e-9


# -- functionals and bases ----------------------------------------------------------

def test_quasi_interior_examples():
    f = quasi_interior_functional(QUADRANT)
    assert direction_deg(f) == pytest.approx(45.0)
    f = quasi_interior_functional(Generators([[0.0, 1.0]]))
    assert direction_deg(f) == pytest.approx(90.0)
    f = quasi_interior_functional(Sector.from_degrees(170, 190))
    assert abs(direction_deg(f)) == pytest.approx(180.0)
    with pytest.raises(NoBase):
        quasi_interior_functional(Sector.from_degrees(0, 180))


def test_quasi_interior_positive_on_samples(rng):
    for cone in (orthant(4), Halfspaces(np.eye(3) + 0.1), SLANTED):
        f = quasi_interior_functional(cone)
        rays = cone.sample_rays(300, rng)
        assert np.all(rays @ f > 0)


def test_base_examples():
    b = base_from_functional(QUADRANT, [1.0, 1.0], 1.0)
    assert b.sigma == pytest.approx(1.0)
    assert b.delta == pytest.approx(math.sqrt(2) / 2)
    b = base_from_functional(Generators([[0.0, 2.0]]), [0.0, 1.0], 1.0)
    assert np.allclose(b.vertices, [[0.0, 1.0]])
    assert b.sigma == b.delta == pytest.approx(1.0)
    b = base_from_functional(orthant(1, "abs"), [1.0], 3.0)
    assert np.allclose(b.vertices, [[3.0]])


def test_base_segment_oracle():
    # extremes of the norm along the segment, by dense parametrisation
    b = base_from_functional(Sector.from_degrees(10, 70), [1.0, 0.3], 2.0)
    t = np.linspace(0, 1, 100001)[:, None]
    seg = b.vertices[0] + t * (b.vertices[1] - b.vertices[0])
    n = np.linalg.norm(seg, axis=1)
    assert b.sigma == pytest.approx(n.max(), rel=1e-9)
    assert b.delta == pytest.approx(n.min(), rel=1e-8)


def test_base_nd_least_norm():
    b = base_from_functional(orthant(10), np.ones(10), 1.0)
    assert b.delta == pytest.approx(1 / math.sqrt(10), rel=1e-7)
    assert b.sigma == pytest.approx(1.0)
    sup = base_from_functional(orthant(3, "supremum"), np.ones(3), 1.0)
    assert sup.delta == pytest.approx(1 / 3, rel=1e-7)


def test_base_rejects_bad_functional():
    with pytest.raises(NotQuasiInterior):
        base_from_functional(QUADRANT, [1.0, 0.0], 1.0)


def test_base_decomposition(rng):
    cone = Sector.from_degrees(20, 100)
    b = base_from_functional(cone, quasi_interior_functional(cone), 1.5)
    ys = cone.sample_members(400, rng)[1:]
    for y in ys:
        lam, by = b.decompose(y)
        assert lam > 0
        assert b.contains(by)
        assert b.delta - 1e-9 <= np.linalg.norm(by) <= b.sigma + 1e-9


# -- conic dilation ----------------------------------------------------------------------

def test_dilate_examples():
    ray = orthant(1, "abs")
    assert dilate_eps(ray, 0.3) is ray
    d = dilate_eps(QUADRANT, 0.1)
    asin = math.degrees(math.asin(0.1))
    assert d.degrees == pytest.approx((-asin, 90 + asin))
    assert d.degrees == pytest.approx((-5.739, 95.739), abs=1e-3)
    assert dilation_contains(QUADRANT, [1.0, -0.05], 0.1)
    assert d.contains([1.0, -0.05])


def test_dilate_against_definition_oracle():
    # dense sample of (S cap C) + eps B, read off the extreme angles
    eps = 0.1
    t = np.radians(np.linspace(0, 90, 721))
    arc = np.column_stack([np.cos(t), np.sin(t)])
    u = np.radians(np.linspace(0, 360, 1441))
    disc = eps * np.column_stack([np.cos(u), np.sin(u)])
    pts = (arc[:, None, :] + disc[None, :, :]).reshape(-1, 2)
    lo, hi = arc_oracle(pts)
    assert (lo, hi) == pytest.approx((-5.739, 95.739), abs=2e-3)


def test_dilate_eps_range():
    for bad in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(EpsilonOutOfRange):
            dilate_eps(QUADRANT, bad)


def test_sampled_dilation_is_inner_approximation():
    cone = orthant(3)
    d = dilate_eps(cone, 0.2, samples=500)
    assert d.default_tol == 1e-6
    assert np.all(dilation_contains(cone, d.rays, 0.2, tol=1e-9))
    assert np.all(d.contains(cone.sample_rays(100, 1)))


def test_exact_nd_dilation_matches_plane():
    # a 3-D cone whose members live in the plane z = 0 behaves like the sector
    cone = Generators([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    a = math.radians(-5.0)
    assert dilation_contains(cone, [math.cos(a), math.sin(a), 0.0], 0.1)
    a = math.radians(-6.0)
    assert not dilation_contains(cone, [math.cos(a), math.sin(a), 0.0], 0.1)


def test_sup_norm_dilation_membership():
    cone = orthant(2, "supremum")
    # sup-norm: (1, -0.1) is 0.1 away from (1, 0) on the unit slice
    assert dilation_contains(cone, [1.0, -0.1], 0.1)
    assert not dilation_contains(cone, [1.0, -0.3], 0.1)


def test_cone_inside_its_dilation(rng):
    for _ in range(50):
        s = rng.uniform(0, 360)
        c = Sector.from_degrees(s, s + rng.uniform(0, 170))
        pts = c.sample_members(50, rng, radius=5.0)
        assert np.all(dilation_contains(c, pts, rng.uniform(0.01, 0.99)))


# -- Henig dilation ------------------------------------------------------------------------

def test_henig_examples():
    b = base_from_functional(Generators([[0.0, 1.0]]), [0.0, 1.0], 1.0)
    h = henig_dilate(b, 0.5)
    assert h.degrees == pytest.approx((60.0, 120.0))
    one = base_from_functional(orthant(1, "abs"), [1.0], 1.0)
    assert henig_dilate(one, 0.5).contains([2.0])
    assert not henig_dilate(one, 0.5).contains([-2.0])
    with pytest.raises(EpsilonTooLarge):
        henig_dilate(b, 1.0)
    half = base_from_functional(QUADRANT, [1.0, 1.0], 1.0)
    with pytest.raises(EpsilonTooLarge):
        henig_dilate(half, half.delta)


def test_henig_against_disc_oracle():
    b = base_from_functional(Sector.from_degrees(20, 60), [1.0, 1.0], 1.0)
    eps = 0.3
    t = np.linspace(0, 1, 401)[:, None]
    seg = b.vertices[0] + t * (b.vertices[1] - b.vertices[0])
    u = np.radians(np.linspace(0, 360, 2881))
    disc = eps * np.column_stack([np.cos(u), np.sin(u)])
    lo, hi = arc_oracle((seg[:, None, :] + disc[None, :, :]).reshape(-1, 2))
    h = henig_dilate(b, eps)
    assert h.degrees == pytest.approx((lo, hi), abs=5e-3)


def test_henig_bounded_base_examples():
    one = base_from_functional(orthant(1, "abs"), [1.0], 1.0)
    nb = henig_bounded_base(one, 0.25)
    assert 0 < nb.level <= 0.75
    assert nb.delta > 0
    ray = base_from_functional(Generators([[0.0, 1.0]]), [0.0, 1.0], 1.0)
    nb = henig_bounded_base(ray, 0.25)
    asin = math.degrees(math.asin(0.25))
    assert nb.cone.degrees == pytest.approx((90 - asin, 90 + asin))
    assert nb.delta > 0 and math.isfinite(nb.sigma)
    pts = nb.cone.sample_rays(200, 0)
    assert np.all(pts @ nb.functional > 0)
    with pytest.raises(EpsilonTooLarge):
        henig_bounded_base(one, 1.0)


def test_henig_cone_of_unit_base_inside_conic_dilation(rng):
    # with least base norm >= 1 the Henig cone sits inside C_eps
    for _ in range(100):
        s = rng.uniform(0, 360)
        c = Sector.from_degrees(s, s + rng.uniform(1, 170))
        b = base_from_functional(c, quasi_interior_functional(c), 1.0)
        b = b.scaled(1.0 / b.delta)
        eps = rng.uniform(0.01, 0.9)
        h = henig_dilate(b, eps)
        assert np.all(dilation_contains(c, h.boundary_rays(), eps))


# -- rescaling and distances ------------------------------------------------------------

def test_rescale_examples():
    r = orthant(1, "abs")
    b1 = base_from_functional(r, [1.0], 1.0)
    out = rescale_base_for_separation(b1, 1.0, 0.5, [[0.0], [1.0], [3.0]])
    assert np.allclose(out.vertices, [[4.0]])
    for lam in (0.1, 1.0, 10.0):
        assert distance_to_set([-4.0 * lam], [[0.0], [1.0]]) >= 2 * lam
    b2 = base_from_functional(r, [1.0], 2.0)
    assert np.allclose(rescale_base_for_separation(b2, 1.0, 0.5, [[0.0]]).vertices, [[4.0]])
    with pytest.raises(SeparationViolated):
        rescale_base_for_separation(b1, 1.0, 0.5, [[-1.0]])


def test_rescale_postcondition_in_plane(rng):
    c = Sector.from_degrees(0, 90)
    b = base_from_functional(c, [1.0, 1.0], 1.0)
    samples = c.sample_members(300, rng, radius=3.0)
    L, delta = 0.7, 0.2
    out = rescale_base_for_separation(b, L, delta, samples)
    for lam in np.logspace(-2, 2, 9):
        for v in out.sample(10, rng):
            assert distance_to_set(-lam * v, samples) >= 2 * L * lam - 1e-9


def test_distance_examples():
    assert distance_to_set([0.0], [[3.0], [-4.0]]) == 3.0
    assert distance_to_set([0.0, 0.0], [[1.0, 1.0]]) == pytest.approx(math.sqrt(2))
    t = np.linspace(0, 2 * math.pi, 100, endpoint=False)
    circle = np.column_stack([np.cos(t), np.sin(t)])
    assert distance_to_set([1.0, 0.0], circle) < 1e-12
    with pytest.raises(EmptySet):
        distance_to_set([0.0], np.zeros((0, 1)))


def test_spec_roundtrip():
    for cone in (QUADRANT, SLANTED, orthant(3)):
        again = cone_from_spec(cone_to_spec(cone), cone.space)
        pts = np.random.default_rng(0).normal(size=(100, cone.dim))
        assert np.array_equal(cone.contains(pts), again.contains(pts))
