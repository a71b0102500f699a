"""Traffic light interaction rules.

Every predicate is pure. Geometric failures inside a rule count as the rule
not holding, so classification never raises on a valid segment.
"""

import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from utils.exceptions import DegenerateFit, ZeroLengthVector
from utils.geometry import (
    TurnThresholds,
    classify_turn_measure,
    distance_dip_index,
    first_sign_flip_index,
    fit_and_extend,
    passes_point,
    turn_measure,
)
from utils.validators import (
    SEGMENT_LENGTH,
    InteractionCategory,
    LightClassification,
    LightRuleParams,
    Segment,
    TrafficLightTrack,
    TurnDirection,
    samples_for,
)

logger = logging.getLogger(__name__)

_PASS_CATEGORIES = {
    TurnDirection.LEFT: InteractionCategory.LIGHT_LEFT_TURN,
    TurnDirection.RIGHT: InteractionCategory.LIGHT_RIGHT_TURN,
    TurnDirection.STRAIGHT: InteractionCategory.LIGHT_STRAIGHT,
}


def light_turn_thresholds(params: LightRuleParams) -> TurnThresholds:
    return TurnThresholds(
        left=params.eta_left,
        right=params.eta_right,
        through_upper=params.eta_through_1,
        through_lower=params.eta_through_2,
    )


def has_light(segment: Segment) -> bool:
    """The segment records at least one traffic light."""
    return len(segment.lights) > 0


def is_moving(speeds: Sequence[float], v_stop_light: float, l_move: float) -> bool:
    """Cumulative time above ``v_stop_light`` reaches ``l_move`` seconds."""
    v = np.asarray(speeds, dtype=float)
    return int(np.count_nonzero(v > v_stop_light)) >= samples_for(l_move)


def path_reaches_stop_line(segment: Segment, light: TrafficLightTrack, params: LightRuleParams) -> bool:
    """The fitted and extended path passes within ``d_pass`` of the stop line."""
    try:
        path = fit_and_extend(segment.positions(), params.d_poly, params.p_extend)
    except DegenerateFit as e:
        logger.debug(f"{segment.id}: no usable path fit ({e})")
        return False
    return passes_point(path, light.stop_line, params.d_pass)


def classify_stop_branch(segment: Segment, light: TrafficLightTrack, params: LightRuleParams) -> bool:
    """Stop branch: moving at the start, stopped at the end, first in queue.

    The stopped window is the final ``l_end`` seconds of the clip.
    """
    v = segment.speeds()
    begin = samples_for(params.l_begin)
    end = samples_for(params.l_end)

    if not np.all(v[:begin] > params.v_stop_light):
        return False
    if not np.all(v[len(v) - end:] < params.v_stop_light):
        return False

    final_gap = float(np.linalg.norm(segment.positions()[-1] - np.asarray(light.stop_line)))
    return final_gap < params.d_stop


def crossing_index(segment: Segment, light: TrafficLightTrack) -> Optional[int]:
    """Earliest 1-based timestep at which either passage test fires."""
    points = segment.positions()
    candidates = [
        index for index in (
            first_sign_flip_index(points, light.stop_line),
            distance_dip_index(points, light.stop_line),
        )
        if index is not None
    ]
    return min(candidates) if candidates else None


def classify_pass_branch(
    segment: Segment,
    light: TrafficLightTrack,
    params: LightRuleParams,
) -> Tuple[Optional[TurnDirection], Optional[float]]:
    """Pass branch: passage, enough clip left afterwards, then turn direction.

    Returns:
        (Left / Right / Straight or None, η or None)
    """
    t_star = crossing_index(segment, light)
    if t_star is None:
        return None, None
    if SEGMENT_LENGTH - t_star <= samples_for(params.l_extend):
        return None, None

    points = segment.positions()
    try:
        eta = turn_measure(points[0], light.stop_line, points[-1])
    except ZeroLengthVector:
        return None, None

    direction = classify_turn_measure(eta, light_turn_thresholds(params))
    if direction == TurnDirection.INDETERMINATE:
        return None, eta
    return direction, eta


def _candidate_order(segment: Segment) -> list:
    start = segment.positions()[0]
    distances = [float(np.linalg.norm(np.asarray(light.stop_line) - start)) for light in segment.lights]
    # sorted() is stable, so equal distances keep input order
    return [segment.lights[k] for k in sorted(range(len(distances)), key=distances.__getitem__)]


def classify_light_interaction(segment: Segment, params: LightRuleParams) -> LightClassification:
    """Run the light rule chain over candidate lights, nearest to P1 first.

    Args:
        segment: A valid segment
        params: Light rule thresholds

    Returns:
        LightClassification; the first light yielding a category wins
    """
    if not has_light(segment):
        return LightClassification()
    if not is_moving(segment.speeds(), params.v_stop_light, params.l_move):
        return LightClassification()

    for light in _candidate_order(segment):
        if not path_reaches_stop_line(segment, light, params):
            continue
        if classify_stop_branch(segment, light, params):
            return LightClassification(category=InteractionCategory.LIGHT_STOP, influencing_light=light)
        direction, eta = classify_pass_branch(segment, light, params)
        if direction is not None:
            return LightClassification(
                category=_PASS_CATEGORIES[direction], influencing_light=light, eta=eta
            )

    return LightClassification()
