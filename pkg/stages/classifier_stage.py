"""Classifier Stage - assigns interaction categories and organizes trajectories."""

from collections import Counter
from functools import partial
from typing import List, Optional, Tuple

import numpy as np

from rules.light_rules import classify_light_interaction
from rules.sign_rules import classify_sign_interaction, initial_nearest_sign
from stages.base_stage import BaseStage
from utils.parallel import ordered_map
from utils.signal_processing import differentiate
from utils.validators import (
    InteractionCategory,
    LightClassification,
    LightRuleParams,
    Segment,
    SignClassification,
    SignRuleParams,
    TrajectoryRecord,
    TrajectoryRow,
)


def classify_segment(
    segment: Segment,
    light_params: LightRuleParams,
    sign_params: SignRuleParams,
) -> Tuple[LightClassification, Optional[SignClassification]]:
    """Light rules first; the sign rules only run when no light category applies."""
    light = classify_light_interaction(segment, light_params)
    if light.category != InteractionCategory.NONE:
        return light, None
    return light, classify_sign_interaction(segment, sign_params)


def build_trajectory_record(
    segment: Segment,
    light: LightClassification,
    sign: Optional[SignClassification],
) -> TrajectoryRecord:
    """Organize a classified segment into per-timestep rows.

    Light state and stop line distance come from the influencing light. The
    sign distance is measured to the initial nearest sign whenever the
    segment has signs.
    """
    positions = segment.positions()
    speeds = segment.speeds()
    accelerations = differentiate(speeds)

    if sign is not None and sign.category != InteractionCategory.NONE:
        category = sign.category
    else:
        category = light.category

    stop_line = light.influencing_light.stop_line if light.influencing_light else None
    states = light.influencing_light.states if light.influencing_light else None
    to_line = np.linalg.norm(positions - np.asarray(stop_line), axis=1) if stop_line else None

    initial_sign = None
    to_sign = None
    if segment.signs:
        initial_sign = initial_nearest_sign(segment).position
        to_sign = np.linalg.norm(positions - np.asarray(initial_sign), axis=1)

    rows = tuple(
        TrajectoryRow(
            index=step.index,
            x=float(positions[k, 0]),
            y=float(positions[k, 1]),
            v=float(speeds[k]),
            a=float(accelerations[k]),
            light_state=int(states[k]) if states else None,
            dist_to_stop_line=float(to_line[k]) if to_line is not None else None,
            dist_to_sign=float(to_sign[k]) if to_sign is not None else None,
        )
        for k, step in enumerate(segment.steps)
    )
    return TrajectoryRecord(
        segment_id=segment.id,
        category=category,
        stop_line=stop_line,
        initial_sign=initial_sign,
        rows=rows,
    )


def organize_segment(segment: Segment, light_params: LightRuleParams, sign_params: SignRuleParams) -> TrajectoryRecord:
    """Classify then organize one segment (picklable worker entry point)."""
    light, sign = classify_segment(segment, light_params, sign_params)
    return build_trajectory_record(segment, light, sign)


class ClassifierStage(BaseStage):
    """Stage that runs both rule chains over a batch of segments."""

    def __init__(self, light_params: LightRuleParams, sign_params: SignRuleParams, **kwargs):
        super().__init__(stage_name="ClassifierStage", **kwargs)
        self.light_params = light_params
        self.sign_params = sign_params

    def execute(self, segments: List[Segment], jobs: Optional[int] = 1) -> List[TrajectoryRecord]:
        """Classify and organize every segment.

        Args:
            segments: Valid segments
            jobs: Worker processes

        Returns:
            One record per segment, in input order (category None included)
        """
        self._log_event("classification_start", {"segments": len(segments), "jobs": jobs})

        worker = partial(organize_segment, light_params=self.light_params, sign_params=self.sign_params)
        records = ordered_map(worker, segments, jobs)

        counts = Counter(record.category.value for record in records)
        self._log_event("classification_complete", {"category_counts": dict(counts)})
        return records
