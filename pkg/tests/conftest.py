"""Shared fixtures and segment builders."""

from typing import Optional, Sequence, Tuple

import numpy as np
import pytest

from config.settings import ParameterBundle
from utils.validators import (
    SEGMENT_LENGTH,
    InteractionCategory,
    LightRuleParams,
    QualityThresholds,
    Segment,
    SignRuleParams,
    StopSign,
    TimeStep,
    TrafficLightTrack,
    TrajectoryRecord,
    TrajectoryRow,
)


def make_segment(
    positions: np.ndarray,
    speeds: Sequence[float],
    lights: Sequence[Tuple[Tuple[float, float], int]] = (),
    signs: Sequence[Tuple[float, float]] = (),
    segment_id: str = "seg",
) -> Segment:
    """Segment from arrays; each light is (stop line, constant state code)."""
    positions = np.asarray(positions, dtype=float)
    return Segment(
        id=segment_id,
        steps=tuple(
            TimeStep(index=k + 1, position=(float(p[0]), float(p[1])), speed=float(v))
            for k, (p, v) in enumerate(zip(positions, speeds))
        ),
        lights=tuple(
            TrafficLightTrack(stop_line=stop_line, states=(state,) * len(positions))
            for stop_line, state in lights
        ),
        signs=tuple(StopSign(position=p) for p in signs),
    )


def straight_positions(speed: float, start: Tuple[float, float] = (0.0, 0.0)) -> np.ndarray:
    """Constant-speed travel along +y."""
    y = start[1] + speed * 0.1 * np.arange(SEGMENT_LENGTH)
    return np.column_stack([np.full(SEGMENT_LENGTH, start[0]), y])


def make_record(
    speeds: Sequence[float],
    accelerations: Optional[Sequence[float]] = None,
    category: InteractionCategory = InteractionCategory.LIGHT_STOP,
    stop_line: Optional[Tuple[float, float]] = None,
    gaps: Optional[Sequence[float]] = None,
    segment_id: str = "rec",
) -> TrajectoryRecord:
    """Record along +y; ``gaps`` become stop line distances (stop line required)."""
    speeds = np.asarray(speeds, dtype=float)
    accelerations = np.zeros_like(speeds) if accelerations is None else np.asarray(accelerations, dtype=float)
    y = np.concatenate([[0.0], np.cumsum(speeds[:-1] * 0.1)])
    rows = tuple(
        TrajectoryRow(
            index=k + 1,
            x=0.0,
            y=float(y[k]),
            v=float(speeds[k]),
            a=float(accelerations[k]),
            light_state=4 if stop_line is not None else None,
            dist_to_stop_line=float(gaps[k]) if gaps is not None else None,
            dist_to_sign=None,
        )
        for k in range(len(speeds))
    )
    return TrajectoryRecord(segment_id=segment_id, category=category, stop_line=stop_line, rows=rows)


def positions_from_speeds(speeds: Sequence[float]) -> np.ndarray:
    """Travel along +y at the given speeds."""
    speeds = np.asarray(speeds, dtype=float)
    y = np.concatenate([[0.0], np.cumsum(speeds[:-1] * 0.1)])
    return np.column_stack([np.zeros_like(y), y])


@pytest.fixture
def light_params() -> LightRuleParams:
    return LightRuleParams()


@pytest.fixture
def sign_params() -> SignRuleParams:
    return SignRuleParams()


@pytest.fixture
def thresholds() -> QualityThresholds:
    return QualityThresholds()


@pytest.fixture
def bundle() -> ParameterBundle:
    return ParameterBundle()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
