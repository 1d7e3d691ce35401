"""Geometry primitives: volumes, regions, brackets, and MC estimation."""

import math

import numpy as np
import pytest

from hardspheres.geometry import (
    EPS,
    MU,
    DELTA,
    RADIUS_MAX,
    RADIUS_MIN,
    Annulus,
    Ball,
    Cell,
    Difference,
    Intersection,
    ball_volume,
    cylinder_section_bracket,
    exact_volume,
    log_unit_ball_volume,
    mc_region_volume,
    overlap_fraction,
    region_contains,
    region_contains_ball,
    region_lower_distance,
    regions_disjoint,
    sample_in_ball,
    search_overlap_constant,
    shell_radii,
    step_layer_radii,
    step_volume_bracket,
    step_volume_lower_bound,
    unit_ball_volume,
)
from hardspheres.rngutil import generator


def test_unit_ball_volume_known_values():
    assert unit_ball_volume(0) == 1.0
    assert abs(unit_ball_volume(1) - 2.0) < 1e-15
    assert abs(unit_ball_volume(2) - math.pi) < 1e-15
    assert abs(unit_ball_volume(3) - 4.0 * math.pi / 3.0) < 1e-15
    # Gamma-function route, frozen
    assert abs(unit_ball_volume(11) - 1.8841038793898994) < 1e-15
    assert abs(unit_ball_volume(45) - 2.86155261391081e-11) < 1e-24


def test_unit_ball_volume_recurrence():
    # v_d = v_{d-2} * 2 pi / d
    for d in range(2, 80):
        expect = unit_ball_volume(d - 2) * 2.0 * math.pi / d
        assert abs(unit_ball_volume(d) - expect) <= 1e-14 * expect


def test_log_unit_ball_volume_matches_direct():
    for d in (1, 2, 7, 45, 200, 299):
        assert math.isclose(
            math.exp(log_unit_ball_volume(d)), unit_ball_volume(d), rel_tol=1e-12
        )
    # beyond the gamma overflow cutoff the log route must still work
    v = unit_ball_volume(400)
    assert 0.0 < v < 1e-100


def test_ball_volume_scaling_and_validation():
    assert math.isclose(ball_volume(3, 2.0), unit_ball_volume(3) * 8.0, rel_tol=1e-15)
    with pytest.raises(ValueError):
        ball_volume(3, -0.1)
    with pytest.raises(ValueError):
        unit_ball_volume(-1)


def test_sample_in_ball_inside_and_seeded():
    rng = generator(11, 0)
    pts = sample_in_ball(np.array([1.0, -2.0, 0.5]), 1.7, 4000, rng)
    assert pts.shape == (4000, 3)
    d = np.linalg.norm(pts - np.array([1.0, -2.0, 0.5]), axis=1)
    assert np.all(d <= 1.7 + 1e-12)
    # fills the ball, not just the center
    assert d.max() > 1.6
    pts2 = sample_in_ball(np.array([1.0, -2.0, 0.5]), 1.7, 4000, generator(11, 0))
    assert np.array_equal(pts, pts2)


def test_ball_region_membership():
    b = Ball(np.zeros(2), 1.0)
    assert b.dim == 2
    assert region_contains(b, [1.0, 0.0], closed=True)
    assert not region_contains(b, [1.0, 0.0], closed=False)
    assert not region_contains(b, [1.0 + 1e-9, 0.0])
    assert math.isclose(b.volume(), math.pi, rel_tol=1e-15)


def test_cell_region_product_structure():
    c = Cell(np.array([1.0, 2.0]), 0.01, np.array([0.0, 0.0, 3.0]), 2.0)
    assert c.dim == 5
    assert math.isclose(
        c.volume(),
        math.pi * 0.01**2 * unit_ball_volume(3) * 2.0**3,
        rel_tol=1e-15,
    )
    rng = generator(3, 1)
    pts = c.sample(3000, rng)
    planar = np.linalg.norm(pts[:, :2] - np.array([1.0, 2.0]), axis=1)
    layer = np.linalg.norm(pts[:, 2:] - np.array([0.0, 0.0, 3.0]), axis=1)
    assert np.all(planar <= 0.01 + 1e-15)
    assert np.all(layer <= 2.0 + 1e-12)
    assert np.all(c.contains(pts))
    # membership separates the two factors
    assert not region_contains(c, [1.02, 2.0, 0.0, 0.0, 3.0])
    assert not region_contains(c, [1.0, 2.0, 0.0, 0.0, 5.5])
    bb = c.bounding_ball()
    assert np.all(bb.contains(pts))
    assert math.isclose(bb.radius, math.hypot(0.01, 2.0), rel_tol=1e-15)


def test_cell_degenerates_to_disc():
    c = Cell(np.zeros(2), 0.35, np.empty(0), 7.0)
    assert c.dim == 2
    assert math.isclose(c.volume(), math.pi * 0.35**2, rel_tol=1e-15)
    assert region_contains(c, [0.34, 0.0])
    assert not region_contains(c, [0.36, 0.0])


def test_annulus_membership_and_sampling():
    a = Annulus(np.zeros(4), 0.8, 1.3)
    with pytest.raises(ValueError):
        Annulus(np.zeros(4), 1.3, 0.8)
    rng = generator(5, 0)
    pts = a.sample(3000, rng)
    rho = np.linalg.norm(pts, axis=1)
    assert np.all(rho >= 0.8 - 1e-12)
    assert np.all(rho <= 1.3 + 1e-12)
    assert math.isclose(
        a.volume(), unit_ball_volume(4) * (1.3**4 - 0.8**4), rel_tol=1e-15
    )
    # radial law check: P(rho^4 <= t) uniform on [0.8^4, 1.3^4]
    u = (rho**4 - 0.8**4) / (1.3**4 - 0.8**4)
    assert abs(u.mean() - 0.5) < 4.0 / math.sqrt(12 * 3000)


def test_intersection_and_difference_membership():
    b1 = Ball(np.zeros(2), 1.0)
    b2 = Ball(np.array([1.0, 0.0]), 1.0)
    inter = Intersection((b1, b2))
    diff = Difference(b1, (b2,))
    assert region_contains(inter, [0.5, 0.0])
    assert not region_contains(inter, [-0.5, 0.0])
    assert region_contains(diff, [-0.5, 0.0])
    assert not region_contains(diff, [0.5, 0.0])
    assert exact_volume(inter) is None
    assert exact_volume(diff) is None
    assert math.isclose(exact_volume(b1), math.pi, rel_tol=1e-15)
    # the intersection bounding ball is the smaller part's
    assert inter.bounding_ball().radius == 1.0
    with pytest.raises(ValueError):
        Intersection(())
    with pytest.raises(ValueError):
        Intersection((b1, Ball(np.zeros(3), 1.0)))


def test_region_contains_ball_certificates():
    b = Ball(np.zeros(3), 2.0)
    assert region_contains_ball(b, [1.0, 0.0, 0.0], 1.0)
    assert not region_contains_ball(b, [1.0, 0.0, 0.0], 1.0 + 1e-12)
    c = Cell(np.zeros(2), 0.5, np.array([0.0]), 3.0)
    assert region_contains_ball(c, [0.1, 0.0, 1.0], 0.4)
    assert not region_contains_ball(c, [0.2, 0.0, 1.0], 0.4)
    assert not region_contains_ball(c, [0.0, 0.0, 2.7], 0.4)
    a = Annulus(np.zeros(2), 1.0, 2.0)
    assert region_contains_ball(a, [1.5, 0.0], 0.5)
    assert not region_contains_ball(a, [1.5, 0.0], 0.51)
    inter = Intersection((b, Annulus(np.zeros(3), 0.5, 1.8)))
    assert region_contains_ball(inter, [1.0, 0.0, 0.0], 0.3)
    assert not region_contains_ball(inter, [1.0, 0.0, 0.0], 0.6)


def test_region_lower_distance_product_exactness():
    # two product cells separated in both factors: distance decomposes
    c1 = Cell(np.zeros(2), 0.1, np.zeros(3), 1.0)
    c2 = Cell(np.array([3.0, 0.0]), 0.1, np.array([0.0, 0.0, 4.0]), 1.0)
    expect = math.hypot(3.0 - 0.2, 4.0 - 2.0)
    assert math.isclose(region_lower_distance(c1, c2), expect, rel_tol=1e-15)
    assert math.isclose(region_lower_distance(c2, c1), expect, rel_tol=1e-15)
    # layer overlap leaves only the planar gap
    c3 = Cell(np.array([3.0, 0.0]), 0.1, np.zeros(3), 1.0)
    assert math.isclose(region_lower_distance(c1, c3), 2.8, rel_tol=1e-15)


def test_region_lower_distance_never_overestimates():
    # certified distance <= actual distance between any sampled pair
    rng = generator(17, 0)
    c = Cell(np.zeros(2), 0.3, np.zeros(2), 1.5)
    shapes = [
        Ball(np.array([2.0, 0.0, 0.0, 1.0]), 0.7),
        Cell(np.array([1.5, 1.5]), 0.2, np.array([2.0, 0.0]), 0.5),
        Annulus(np.array([0.0, 3.0, 0.0, 0.0]), 0.5, 1.0),
    ]
    pc = c.sample(400, rng)
    for other in shapes:
        lo = region_lower_distance(c, other)
        po = other.sample(400, rng)
        actual = np.linalg.norm(pc[:, None, :] - po[None, :, :], axis=2).min()
        assert lo <= actual + 1e-12


def test_regions_disjoint_flags():
    c1 = Cell(np.zeros(2), 0.01, np.zeros(3), 2.0)
    c2 = Cell(np.array([1.0, 0.0]), 0.01, np.zeros(3), 2.0)
    assert regions_disjoint(c1, c2)  # planar discs 1 apart, radius 0.01
    assert not regions_disjoint(c1, c1)
    ball_inside_column = Ball(np.array([0.0, 0.0, 0.0, 0.0, 0.5]), 0.75)
    assert not regions_disjoint(c1, ball_inside_column)
    # bounding balls overlap here, but the true regions do not
    assert regions_disjoint(c2, ball_inside_column)


def test_shell_radii_frozen_and_monotone():
    r1, r2 = shell_radii(1.5)
    assert math.isclose(r1, 1.0998181667894016, rel_tol=1e-15)
    assert math.isclose(r2, 1.1356055653262713, rel_tol=1e-15)
    # defining identities: r1^2 = R^2 - (1+2eps)^2, r2^2 = R^2 - (1-2eps)^2
    assert math.isclose(r1 * r1, 1.5**2 - (1 + 2 * EPS) ** 2, rel_tol=1e-14)
    assert math.isclose(r2 * r2, 1.5**2 - (1 - 2 * EPS) ** 2, rel_tol=1e-14)
    with pytest.raises(ValueError):
        shell_radii(1.0)  # slab does not reach the sphere


def test_cylinder_section_bracket_frozen():
    lo, hi = cylinder_section_bracket(11, 1.5)
    assert math.isclose(lo, 0.0008132691160835986, rel_tol=1e-15)
    assert math.isclose(hi, 0.0032547313217906066, rel_tol=1e-15)
    # bracket = disc area times inner/outer section ball volumes (1/3 inner)
    r1, r2 = shell_radii(1.5)
    base = math.pi * EPS**2
    assert math.isclose(lo, base * unit_ball_volume(9) * r1**9 / 3.0, rel_tol=1e-14)
    assert math.isclose(hi, base * unit_ball_volume(9) * r2**9, rel_tol=1e-14)
    assert lo < hi


def test_step_layer_radii_identities():
    shell_lo, core_hi, bound = step_layer_radii(0.85)
    assert math.isclose(shell_lo, 1.3600000000000003, rel_tol=1e-15)
    assert math.isclose(core_hi, 1.1356055653262713, rel_tol=1e-15)
    assert math.isclose(bound, 1.3891004283348274, rel_tol=1e-15)
    # defining identities at r = 0.85
    assert math.isclose(
        shell_lo**2, (0.85 + MU + DELTA) ** 2 - (1 + 2 * EPS) ** 2, rel_tol=1e-14
    )
    assert math.isclose(
        core_hi**2, (0.85 + MU - DELTA) ** 2 - (1 - 2 * EPS) ** 2, rel_tol=1e-14
    )
    assert math.isclose(
        bound**2, (0.85 + MU + DELTA) ** 2 - (1 - 2 * EPS) ** 2, rel_tol=1e-14
    )
    assert core_hi < shell_lo < bound
    with pytest.raises(ValueError):
        step_layer_radii(0.5)


def test_step_volume_bracket_orders():
    for d in (11, 31, 45):
        for r in (RADIUS_MIN, MU, RADIUS_MAX):
            lo, hi = step_volume_bracket(d, r)
            assert lo < hi
            assert hi > 0
    lo45, hi45 = step_volume_bracket(45, 0.75)
    assert math.isclose(lo45, 1.732537494671769e-10, rel_tol=1e-15)
    assert math.isclose(hi45, 1.5668566169644754e-09, rel_tol=1e-15)


def test_step_volume_lower_bound_is_worst_case():
    # the bound must hold for every radius in the window
    for d in (11, 20, 45):
        b = step_volume_lower_bound(d)
        assert b > 0
        for r in np.linspace(RADIUS_MIN, RADIUS_MAX, 9):
            lo, _ = step_volume_bracket(d, float(r))
            assert lo >= b - 1e-18
    assert math.isclose(
        step_volume_lower_bound(45), 1.0601211968676106e-12, rel_tol=1e-15
    )
    with pytest.raises(ValueError):
        step_volume_lower_bound(10)


def test_mc_region_volume_against_closed_forms():
    # planar disc inside a square-free bounding ball
    disc = Ball(np.zeros(2), 0.7)
    est = mc_region_volume(disc, Ball(np.zeros(2), 1.0), 200_000, seed=5)
    assert abs(est.value - math.pi * 0.49) <= 4 * est.std_error
    assert est.std_error < 0.01
    # 5-d product cell inside its bounding ball
    cell = Cell(np.zeros(2), 0.5, np.zeros(3), 1.0)
    est2 = mc_region_volume(cell, cell.bounding_ball(), 200_000, seed=6)
    assert abs(est2.value - cell.volume()) <= 4 * est2.std_error
    # exact-cover case has zero variance
    est3 = mc_region_volume(disc, disc, 10_000, seed=7)
    assert est3.value == pytest.approx(math.pi * 0.49, rel=1e-12)
    assert est3.std_error == 0.0


def test_mc_region_volume_deterministic():
    reg = Annulus(np.zeros(3), 0.5, 0.9)
    a = mc_region_volume(reg, Ball(np.zeros(3), 0.9), 50_000, seed=9)
    b = mc_region_volume(reg, Ball(np.zeros(3), 0.9), 50_000, seed=9)
    assert a.value == b.value
    assert a.std_error == b.std_error


def test_step_volume_profile_monotone_on_window():
    rs = np.linspace(RADIUS_MIN, RADIUS_MAX, 17)
    from hardspheres.geometry import step_volume_profile

    vals = [step_volume_profile(float(r), 11) for r in rs]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    # bracket lower entry is the profile times the cell base area
    base = math.pi * EPS**2 * unit_ball_volume(9)
    lo, _ = step_volume_bracket(11, 0.7)
    assert math.isclose(lo, base * step_volume_profile(0.7, 11), rel_tol=1e-14)
    with pytest.raises(ValueError):
        step_volume_profile(0.7, 9)


def test_overlap_fraction_limits():
    # ball fully inside the origin ball
    p0, se0 = overlap_fraction(3, C=4.0, R=1.0, x_dist=0.0, n=20_000, seed=21)
    assert p0 == 1.0 and se0 == 0.0
    # disjoint balls
    p2, se2 = overlap_fraction(3, C=1.0, R=1.0, x_dist=5.0, n=20_000, seed=21)
    assert p2 == 0.0
    # genuine partial overlap
    p1, se1 = overlap_fraction(3, C=2.0, R=2.0, x_dist=2.0, n=40_000, seed=21)
    assert 0.0 < p1 < 1.0
    assert se1 > 0.0


def test_search_overlap_constant_certifies_target():
    C = search_overlap_constant(3, R_max=1.4, seed=2)
    assert isinstance(C, int) and C >= 1
    assert C & (C - 1) == 0  # power of two
    # the boundary case the search certifies, re-checked with a fresh seed
    c_eff = C - 1.4
    p, se = overlap_fraction(3, c_eff, 1.4, c_eff, n=200_000, seed=977)
    assert p - 4 * se >= 1.0 / 3.0
    # determinism
    assert C == search_overlap_constant(3, R_max=1.4, seed=2)
