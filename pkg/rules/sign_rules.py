"""Stop sign interaction rules."""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from utils.clustering import NOISE, dbscan
from utils.exceptions import NoSigns, ZeroLengthVector
from utils.geometry import TurnThresholds, classify_turn_measure, convex_quadrilateral, turn_measure
from utils.validators import (
    InteractionCategory,
    LeftTurnSteps,
    Point,
    Segment,
    SignClassification,
    SignRuleParams,
    StopSign,
    TurnDirection,
    samples_for,
)

logger = logging.getLogger(__name__)

FOUR_WAY_SIGNS = 4


def _initial_nearest_index(segment: Segment) -> int:
    if not segment.signs:
        raise NoSigns(f"{segment.id} has no stop signs")
    start = segment.positions()[0]
    positions = np.array([sign.position for sign in segment.signs], dtype=float)
    distances = np.linalg.norm(positions - start, axis=1)
    return int(np.lexsort((positions[:, 1], positions[:, 0], distances))[0])


def initial_nearest_sign(segment: Segment) -> StopSign:
    """Sign closest to the first position.

    Equal distances go to the smaller x, then the smaller y, so the choice
    does not depend on the order the signs are listed in.

    Raises:
        NoSigns: the segment records no stop sign
    """
    return segment.signs[_initial_nearest_index(segment)]


def decelerates_toward(segment: Segment, sign: StopSign) -> bool:
    """Some earlier sample is both farther from the sign and faster than a later one."""
    d = np.linalg.norm(segment.positions() - np.asarray(sign.position), axis=1)
    v = segment.speeds()
    later = np.triu(np.ones((d.size, d.size), dtype=bool), k=1)
    farther = d[:, None] > d[None, :]
    faster = v[:, None] > v[None, :]
    return bool(np.any(later & farther & faster))


def stop_area_center(segment: Segment, sign: StopSign, params: SignRuleParams) -> Point:
    """Center of the stop area under the configured reading."""
    if params.stop_area_center == "sign":
        return sign.position
    points = segment.positions()
    nearest = points[int(np.argmin(np.linalg.norm(points - np.asarray(sign.position), axis=1)))]
    return float(nearest[0]), float(nearest[1])


def stops_near(segment: Segment, sign: StopSign, params: SignRuleParams) -> Tuple[bool, Point]:
    """Enough slow samples inside the stop area.

    Returns:
        (rule holds, stop area center)
    """
    center = stop_area_center(segment, sign, params)
    inside = np.linalg.norm(segment.positions() - np.asarray(center), axis=1) < params.r_stop
    slow = segment.speeds() < params.v_stop_sign
    return int(np.count_nonzero(inside & slow)) >= samples_for(params.l_stop), center


def _cluster_containing(points: np.ndarray, anchor: int, params: SignRuleParams) -> List[int]:
    """Indices (into ``points``) of the DBSCAN cluster holding ``anchor``; empty for noise."""
    assignment = dbscan(points, params.dbscan_eps, params.dbscan_min_pts)
    label = assignment.labels[anchor]
    return [] if label == NOISE else assignment.members(label)


def detect_four_way(segment: Segment, params: SignRuleParams, anchor: Optional[int] = None) -> bool:
    """Four signs around the initial nearest sign form a convex quadrilateral.

    With more than four signs the layout is clustered, and a cluster still
    larger than four is clustered once more with the same parameters. Only
    the cluster holding the initial nearest sign decides.

    Args:
        segment: Segment with its signs
        params: Clustering settings
        anchor: Index of the initial nearest sign (computed when omitted)
    """
    positions = np.array([sign.position for sign in segment.signs], dtype=float).reshape(-1, 2)
    if len(positions) < FOUR_WAY_SIGNS:
        return False
    if len(positions) == FOUR_WAY_SIGNS:
        return convex_quadrilateral(positions)

    anchor = _initial_nearest_index(segment) if anchor is None else anchor
    members = _cluster_containing(positions, anchor, params)
    if len(members) > FOUR_WAY_SIGNS:
        sub = positions[members]
        inner = _cluster_containing(sub, members.index(anchor), params)
        members = [members[k] for k in inner]

    if len(members) != FOUR_WAY_SIGNS:
        logger.debug(f"{segment.id}: cluster around the initial sign has {len(members)} signs")
        return False
    return convex_quadrilateral(positions[members])


def sign_turn_measure(segment: Segment, sign: StopSign) -> Optional[float]:
    """η through the sign, or None when P1 or P91 sits on the sign."""
    points = segment.positions()
    try:
        return turn_measure(points[0], sign.position, points[-1])
    except ZeroLengthVector:
        return None


def classify_turn(segment: Segment, sign: StopSign, params: SignRuleParams) -> TurnDirection:
    """Turn test through the initial nearest sign; no through band."""
    eta = sign_turn_measure(segment, sign)
    if eta is None:
        return TurnDirection.INDETERMINATE
    thresholds = TurnThresholds(left=params.eta_left_sign, right=params.eta_right_sign)
    return classify_turn_measure(eta, thresholds)


def slow_runs(speeds: Sequence[float], v_stop_sign: float) -> List[Tuple[int, int]]:
    """Maximal runs of samples below ``v_stop_sign`` as (first, last) 0-based indices."""
    below = np.asarray(speeds, dtype=float) < v_stop_sign
    edges = np.diff(np.concatenate([[0], below.astype(int), [0]]))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1) - 1
    return list(zip(starts.tolist(), ends.tolist()))


def classify_left_steps(speeds: Sequence[float], params: SignRuleParams) -> LeftTurnSteps:
    """Two stops separated by more than ``delta_t_stop`` make a two-step left.

    The gap runs from the end of the first stop to the start of the last
    one, which is the widest gap any pair of runs can have.
    """
    runs = slow_runs(speeds, params.v_stop_sign)
    if len(runs) >= 2 and runs[-1][0] - runs[0][1] > samples_for(params.delta_t_stop):
        return LeftTurnSteps.TWO_STEP
    return LeftTurnSteps.ONE_STEP


def classify_sign_interaction(segment: Segment, params: SignRuleParams) -> SignClassification:
    """Run the stop sign rule chain.

    Args:
        segment: A valid segment
        params: Sign rule thresholds

    Returns:
        SignClassification carrying the initial nearest sign when a category is assigned
    """
    if not segment.signs:
        return SignClassification()

    anchor = _initial_nearest_index(segment)
    sign = segment.signs[anchor]
    if not decelerates_toward(segment, sign):
        return SignClassification()
    stopped, center = stops_near(segment, sign, params)
    if not stopped:
        return SignClassification()

    def outcome(category: InteractionCategory, eta: Optional[float] = None) -> SignClassification:
        return SignClassification(
            category=category, initial_nearest_sign=sign, eta_sign=eta, stop_area_center=center
        )

    if detect_four_way(segment, params, anchor=anchor):
        return outcome(InteractionCategory.SIGN_FOUR_WAY)

    direction = classify_turn(segment, sign, params)
    if direction == TurnDirection.RIGHT:
        return outcome(InteractionCategory.SIGN_RIGHT_TURN, sign_turn_measure(segment, sign))
    if direction == TurnDirection.LEFT:
        steps = classify_left_steps(segment.speeds(), params)
        category = (
            InteractionCategory.SIGN_LEFT_TWO_STEP if steps == LeftTurnSteps.TWO_STEP
            else InteractionCategory.SIGN_LEFT_ONE_STEP
        )
        return outcome(category, sign_turn_measure(segment, sign))
    return SignClassification()
