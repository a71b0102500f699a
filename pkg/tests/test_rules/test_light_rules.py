"""Test the traffic light rule chain."""

import numpy as np
import pytest

from rules.light_rules import (
    classify_light_interaction,
    classify_pass_branch,
    classify_stop_branch,
    crossing_index,
    has_light,
    is_moving,
    path_reaches_stop_line,
)
from tests.conftest import make_segment, positions_from_speeds, straight_positions
from utils.validators import InteractionCategory, LightState, TrafficLightTrack, TurnDirection


def bezier_positions(p0, control, p2) -> np.ndarray:
    """Quadratic Bezier sampled at 91 uniform parameters (a degree-6 fit is exact)."""
    u = np.linspace(0.0, 1.0, 91)[:, None]
    return (1 - u) ** 2 * np.asarray(p0) + 2 * (1 - u) * u * np.asarray(control) + u ** 2 * np.asarray(p2)


def stopping_speeds() -> np.ndarray:
    return np.concatenate([np.full(40, 8.0), np.linspace(8.0, 0.0, 31)[1:], np.zeros(21)])


def turning_segment(end_x: float, state: int = LightState.GO):
    positions = bezier_positions((0.0, -36.0), (0.0, 0.0), (end_x, 0.0))
    return make_segment(positions, [8.0] * 91, lights=[(tuple(positions[30]), state)])


def test_has_light():
    """Test light presence."""
    assert not has_light(make_segment(straight_positions(8.0), [8.0] * 91))
    assert has_light(make_segment(straight_positions(8.0), [8.0] * 91, lights=[((0.0, 10.0), 6)]))


def test_is_moving_counts_moving_time(light_params):
    """Test the cumulative moving time boundary."""
    speeds = np.zeros(91)
    speeds[:10] = 2.0
    assert is_moving(speeds, light_params.v_stop_light, light_params.l_move)
    speeds[0] = 1.0
    assert not is_moving(speeds, light_params.v_stop_light, light_params.l_move)


def test_path_reaches_stop_line_straight(light_params):
    """Test passage through a stop line ahead on the extended path."""
    segment = make_segment(straight_positions(8.0), [8.0] * 91)
    on_path = TrafficLightTrack(stop_line=(0.0, 75.0), states=(6,) * 91)
    beside = TrafficLightTrack(stop_line=(1.0, 40.0), states=(6,) * 91)
    assert path_reaches_stop_line(segment, on_path, light_params)
    assert not path_reaches_stop_line(segment, beside, light_params)


def test_path_reaches_stop_line_stationary(light_params):
    """Test that a parked vehicle crosses nothing."""
    segment = make_segment(np.zeros((91, 2)), [0.0] * 91)
    light = TrafficLightTrack(stop_line=(0.0, 0.0), states=(4,) * 91)
    assert not path_reaches_stop_line(segment, light, light_params)


def test_stop_at_red(light_params):
    """Test a vehicle that decelerates and waits at the front of the queue."""
    speeds = stopping_speeds()
    positions = positions_from_speeds(speeds)
    stop_line = (0.0, float(positions[-1, 1]) + 2.0)
    segment = make_segment(positions, speeds, lights=[(stop_line, 4)])

    assert classify_stop_branch(segment, segment.lights[0], light_params)
    result = classify_light_interaction(segment, light_params)
    assert result.category == InteractionCategory.LIGHT_STOP
    assert result.influencing_light.stop_line == stop_line
    assert result.eta is None


def test_stop_too_far_back(light_params):
    """Test that a stop more than d_stop behind the line is not first in queue."""
    speeds = stopping_speeds()
    positions = positions_from_speeds(speeds)
    segment = make_segment(positions, speeds, lights=[((0.0, float(positions[-1, 1]) + 6.0), 4)])
    assert not classify_stop_branch(segment, segment.lights[0], light_params)
    assert classify_light_interaction(segment, light_params).category == InteractionCategory.NONE


def test_straight_through(light_params):
    """Test passing the stop line without turning."""
    segment = make_segment(straight_positions(8.0), [8.0] * 91, lights=[((0.0, 20.0), 6)])
    assert crossing_index(segment, segment.lights[0]) == 26
    direction, eta = classify_pass_branch(segment, segment.lights[0], light_params)
    assert direction == TurnDirection.STRAIGHT
    assert eta == pytest.approx(0.0)
    assert classify_light_interaction(segment, light_params).category == InteractionCategory.LIGHT_STRAIGHT


def test_left_and_right_turns(light_params):
    """Test turns through the stop line."""
    left = turning_segment(-28.8, LightState.ARROW_GO)
    right = turning_segment(28.8)

    left_result = classify_light_interaction(left, light_params)
    right_result = classify_light_interaction(right, light_params)
    assert left_result.category == InteractionCategory.LIGHT_LEFT_TURN
    assert right_result.category == InteractionCategory.LIGHT_RIGHT_TURN
    assert left_result.eta > 0.3
    assert right_result.eta == pytest.approx(-left_result.eta)
    assert crossing_index(left, left.lights[0]) == 31


def test_shallow_turn_is_indeterminate(light_params):
    """Test an eta between the through and turn bands."""
    positions = bezier_positions((0.0, -36.0), (0.0, 0.0), (-8.0, 20.0))
    segment = make_segment(positions, [8.0] * 91, lights=[(tuple(positions[30]), 6)])
    direction, eta = classify_pass_branch(segment, segment.lights[0], light_params)
    assert direction is None
    assert 0.1 < eta < 0.3
    assert classify_light_interaction(segment, light_params).category == InteractionCategory.NONE


def test_crossing_too_late(light_params):
    """Test that too little clip after the crossing gives no category."""
    positions = straight_positions(8.0)
    segment = make_segment(positions, [8.0] * 91, lights=[(tuple(positions[80]), 6)])
    assert classify_pass_branch(segment, segment.lights[0], light_params) == (None, None)
    assert classify_light_interaction(segment, light_params).category == InteractionCategory.NONE


def test_slow_vehicle_is_not_classified(light_params):
    """Test the moving-time gate."""
    segment = make_segment(straight_positions(0.5), [0.5] * 91, lights=[((0.0, 20.0), 6)])
    assert classify_light_interaction(segment, light_params).category == InteractionCategory.NONE


def test_nearest_light_is_tried_first(light_params):
    """Test candidate ordering by distance to the first position."""
    segment = make_segment(straight_positions(8.0), [8.0] * 91, lights=[((0.0, 40.0), 6), ((0.0, 20.0), 6)])
    result = classify_light_interaction(segment, light_params)
    assert result.category == InteractionCategory.LIGHT_STRAIGHT
    assert result.influencing_light.stop_line == (0.0, 20.0)


def test_no_light(light_params):
    """Test the empty chain."""
    result = classify_light_interaction(make_segment(straight_positions(8.0), [8.0] * 91), light_params)
    assert result.category == InteractionCategory.NONE
    assert result.influencing_light is None


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
