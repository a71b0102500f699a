"""Test planar geometry predicates."""

from itertools import permutations

import numpy as np
import pytest

from tests.conftest import straight_positions
from utils.exceptions import DegenerateFit, ZeroLengthVector
from utils.geometry import (
    TurnThresholds,
    convex_quadrilateral,
    cross2,
    crossed_by_distance_dip,
    crossed_by_sign_flip,
    distance_dip_index,
    first_sign_flip_index,
    fit_and_extend,
    passes_point,
    point_to_polyline_distance,
    polar_order,
    turn_direction,
    turn_measure,
)
from utils.validators import TurnDirection

LIGHT_TURNS = TurnThresholds(left=0.3, right=-0.3, through_upper=0.1, through_lower=-0.1)
SIGN_TURNS = TurnThresholds(left=0.3, right=-0.3)


def right_corner_path() -> np.ndarray:
    """North along x = 0 up to (0, 10), then east along y = 10."""
    north = [(0.0, float(y)) for y in range(11)]
    east = [(float(x), 10.0) for x in range(1, 11)]
    return np.array(north + east)


def test_cross2():
    """Test the z-component of the planar cross product."""
    assert cross2((1.0, 0.0), (0.0, 1.0)) == 1.0
    assert cross2((0.0, 1.0), (1.0, 0.0)) == -1.0
    assert cross2((2.0, 2.0), (1.0, 1.0)) == 0.0


def test_fit_straight_line_and_extend():
    """Test that a straight drive fits exactly and extends along its heading."""
    path = fit_and_extend(straight_positions(5.0), d_poly=6, p_extend=0.2)
    assert path.arc_length == pytest.approx(45.0, rel=1e-6)
    assert path.direction == pytest.approx((0.0, 1.0), abs=1e-6)
    assert path.evaluate(np.array([0.0, 1.0])) == pytest.approx(np.array([[0.0, 0.0], [0.0, 45.0]]), abs=1e-6)
    assert path.evaluate(np.array([1.2]))[0] == pytest.approx((0.0, 54.0), abs=1e-6)


def test_fit_stationary_segment_is_degenerate():
    """Test that a parked vehicle cannot be fitted."""
    with pytest.raises(DegenerateFit):
        fit_and_extend(np.zeros((91, 2)), d_poly=6, p_extend=0.2)


def test_fit_needs_enough_distinct_points():
    """Test the distinct point count check."""
    points = np.array([(0.0, float(k % 3)) for k in range(91)])
    with pytest.raises(DegenerateFit):
        fit_and_extend(points, d_poly=6, p_extend=0.2)


def test_passes_point_in_extension():
    """Test passage through a point beyond the observed end."""
    path = fit_and_extend(straight_positions(5.0), d_poly=6, p_extend=0.2)
    assert passes_point(path, (0.0, 50.0), d_pass=0.1)
    assert passes_point(path, (0.05, 20.0), d_pass=0.1)
    assert not passes_point(path, (0.5, 50.0), d_pass=0.1)
    assert not passes_point(path, (0.0, 60.0), d_pass=0.1)


def test_point_to_polyline_distance():
    """Test projection onto segments and the single-point case."""
    polyline = np.array([[0.0, 0.0], [10.0, 0.0], [10.0, 10.0]])
    assert point_to_polyline_distance(polyline, (5.0, 3.0)) == pytest.approx(3.0)
    assert point_to_polyline_distance(polyline, (12.0, 5.0)) == pytest.approx(2.0)
    assert point_to_polyline_distance(polyline[:1], (3.0, 4.0)) == pytest.approx(5.0)


def test_sign_flip_at_corner():
    """Test that the reference switching sides of the heading is detected."""
    points = right_corner_path()
    assert first_sign_flip_index(points, (2.0, 12.0)) == 11
    assert crossed_by_sign_flip(points, (2.0, 12.0))


def test_no_sign_flip_on_straight_drive():
    """Test that a reference beside a straight path never flips."""
    assert first_sign_flip_index(straight_positions(5.0), (1.0, 20.0)) is None
    assert first_sign_flip_index(straight_positions(5.0)[:2], (1.0, 20.0)) is None


def test_distance_dip():
    """Test the interior distance minimum."""
    points = straight_positions(5.0)
    assert distance_dip_index(points, (1.0, 20.0)) == 41
    assert crossed_by_distance_dip(points, (1.0, 20.0))
    assert distance_dip_index(points, (0.0, -5.0)) is None
    assert not crossed_by_distance_dip(points, (0.0, 100.0))


def test_turn_measure_directions():
    """Test left, right and straight readings of eta."""
    assert turn_measure((0.0, 0.0), (0.0, 10.0), (-10.0, 10.0)) == pytest.approx(1.0)
    assert turn_measure((0.0, 0.0), (0.0, 10.0), (10.0, 10.0)) == pytest.approx(-1.0)
    assert turn_direction((0.0, 0.0), (0.0, 10.0), (-10.0, 10.0), LIGHT_TURNS) == TurnDirection.LEFT
    assert turn_direction((0.0, 0.0), (0.0, 10.0), (10.0, 10.0), LIGHT_TURNS) == TurnDirection.RIGHT
    assert turn_direction((0.0, 0.0), (0.0, 10.0), (0.0, 20.0), LIGHT_TURNS) == TurnDirection.STRAIGHT


def test_turn_band_between_thresholds_is_indeterminate():
    """Test the gap between the through and turn bands."""
    eta_02 = (0.0, 0.0), (0.0, 10.0), (-0.2, 10.0 + np.sqrt(1 - 0.04))
    assert turn_measure(*eta_02) == pytest.approx(0.2)
    assert turn_direction(*eta_02, LIGHT_TURNS) == TurnDirection.INDETERMINATE


def test_sign_thresholds_have_no_straight_band():
    """Test that straight driving is Indeterminate without through bounds."""
    assert turn_direction((0.0, 0.0), (0.0, 10.0), (0.0, 20.0), SIGN_TURNS) == TurnDirection.INDETERMINATE


def test_turn_measure_zero_length():
    """Test coincident points."""
    with pytest.raises(ZeroLengthVector):
        turn_measure((0.0, 0.0), (0.0, 0.0), (1.0, 1.0))
    with pytest.raises(ZeroLengthVector):
        turn_measure((0.0, 0.0), (1.0, 1.0), (1.0, 1.0))


def test_polar_order_reference_and_ties():
    """Test the lowest-left reference and distance tie breaking."""
    order = polar_order([(2.0, 2.0), (0.0, 0.0), (1.0, 1.0), (0.0, 3.0)])
    assert order.reference == (0.0, 0.0)
    assert [p for p, _ in order.ordered] == [(1.0, 1.0), (2.0, 2.0), (0.0, 3.0)]


def test_convex_quadrilateral():
    """Test squares, concave shapes and degenerate inputs."""
    assert convex_quadrilateral([(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0)])
    assert convex_quadrilateral([(10.0, 10.0), (0.0, 0.0), (0.0, 10.0), (10.0, 0.0)])
    assert not convex_quadrilateral([(0.0, 0.0), (10.0, 0.0), (5.0, 10.0), (5.0, 3.0)])
    assert not convex_quadrilateral([(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (1.0, 1.0)])
    assert not convex_quadrilateral([(0.0, 0.0), (0.0, 0.0), (1.0, 0.0), (0.0, 1.0)])
    assert not convex_quadrilateral([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)])

MIRRORED = {
    TurnDirection.LEFT: TurnDirection.RIGHT,
    TurnDirection.RIGHT: TurnDirection.LEFT,
    TurnDirection.STRAIGHT: TurnDirection.STRAIGHT,
    TurnDirection.INDETERMINATE: TurnDirection.INDETERMINATE,
}


def orientation(p, q, r) -> float:
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])


def inside_triangle(point, a, b, c) -> bool:
    signs = [orientation(a, b, point), orientation(b, c, point), orientation(c, a, point)]
    return all(s > 0 for s in signs) or all(s < 0 for s in signs)


def reference_convex(points) -> bool:
    """Four distinct points, no three collinear, none inside the other three's triangle."""
    if len(set(points)) != 4:
        return False
    for skipped in range(4):
        p, q, r = [points[k] for k in range(4) if k != skipped]
        if orientation(p, q, r) == 0:
            return False
    for k in range(4):
        others = [points[j] for j in range(4) if j != k]
        if inside_triangle(points[k], *others):
            return False
    return True


def test_cross2_is_antisymmetric(rng):
    """Test swapping the operands of the cross product."""
    for v1, v2 in rng.uniform(-100.0, 100.0, size=(1000, 2, 2)):
        assert cross2(v1, v2) == -cross2(v2, v1)
        assert cross2(v1, v1) == 0.0


def test_turn_measure_mirror_and_scale(rng):
    """Test that mirroring negates η and that scaling or shifting leaves it unchanged."""
    mirror = np.array([-1.0, 1.0])
    for start, ref, end in rng.uniform(-50.0, 50.0, size=(1000, 3, 2)):
        eta = turn_measure(start, ref, end)
        assert -1.0 <= eta <= 1.0
        assert turn_measure(start * mirror, ref * mirror, end * mirror) == pytest.approx(-eta, abs=1e-12)
        assert turn_direction(start * mirror, ref * mirror, end * mirror, LIGHT_TURNS) == MIRRORED[
            turn_direction(start, ref, end, LIGHT_TURNS)
        ]

        scale = rng.uniform(0.01, 100.0)
        shift = rng.uniform(-1000.0, 1000.0, size=2)
        moved = [p * scale + shift for p in (start, ref, end)]
        assert turn_measure(*moved) == pytest.approx(eta, abs=1e-8)


@pytest.mark.parametrize("grid", [True, False])
def test_convex_quadrilateral_matches_reference(rng, grid):
    """Test 1000 random quadrilaterals against a triangle containment check."""
    agreed_convex = 0
    for _ in range(1000):
        if grid:
            raw = rng.integers(0, 8, size=(4, 2)).astype(float)
        else:
            raw = rng.uniform(-50.0, 50.0, size=(4, 2))
        points = [tuple(p) for p in raw.tolist()]
        expected = reference_convex(points)
        assert convex_quadrilateral(points) == expected, points
        agreed_convex += expected
    assert 100 < agreed_convex < 900


def test_convex_quadrilateral_ignores_input_order(rng):
    """Test every ordering of the same four points."""
    for _ in range(100):
        points = [tuple(p) for p in rng.uniform(-20.0, 20.0, size=(4, 2)).tolist()]
        results = {convex_quadrilateral([points[k] for k in order]) for order in permutations(range(4))}
        assert len(results) == 1



if __name__ == "__main__":
    pytest.main([__file__, "-v"])
