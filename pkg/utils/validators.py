"""Pydantic schemas for segments, organized trajectories, parameters and reports."""

import math
from enum import Enum, IntEnum
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
import pywt
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


SEGMENT_LENGTH = 91
DT = 0.1
SAMPLES_PER_SECOND = 10

Point = Tuple[float, float]


def samples_for(seconds: float) -> int:
    """Convert a duration in seconds to a whole number of 0.1 s samples."""
    return int(round(seconds * SAMPLES_PER_SECOND))


# ============================================================
# ENUMS
# ============================================================

class LightState(IntEnum):
    """Traffic light state codes as recorded per timestep."""
    UNKNOWN = 0
    ARROW_STOP = 1
    ARROW_CAUTION = 2
    ARROW_GO = 3
    STOP = 4
    CAUTION = 5
    GO = 6
    FLASHING_STOP = 7
    FLASHING_CAUTION = 8


class InteractionCategory(str, Enum):
    """AV interaction categories. Exactly one per segment."""
    LIGHT_STOP = "LightStop"
    LIGHT_LEFT_TURN = "LightLeftTurn"
    LIGHT_RIGHT_TURN = "LightRightTurn"
    LIGHT_STRAIGHT = "LightStraight"
    SIGN_FOUR_WAY = "SignFourWay"
    SIGN_RIGHT_TURN = "SignRightTurn"
    SIGN_LEFT_ONE_STEP = "SignLeftOneStep"
    SIGN_LEFT_TWO_STEP = "SignLeftTwoStep"
    NONE = "None"


LIGHT_CATEGORIES = (
    InteractionCategory.LIGHT_STOP,
    InteractionCategory.LIGHT_LEFT_TURN,
    InteractionCategory.LIGHT_RIGHT_TURN,
    InteractionCategory.LIGHT_STRAIGHT,
)
SIGN_CATEGORIES = (
    InteractionCategory.SIGN_FOUR_WAY,
    InteractionCategory.SIGN_RIGHT_TURN,
    InteractionCategory.SIGN_LEFT_ONE_STEP,
    InteractionCategory.SIGN_LEFT_TWO_STEP,
)


class TurnDirection(str, Enum):
    """Outcome of the unit-vector cross-product turn test."""
    LEFT = "Left"
    RIGHT = "Right"
    STRAIGHT = "Straight"
    INDETERMINATE = "Indeterminate"


class LeftTurnSteps(str, Enum):
    """Number of full stops made during a stop-sign left turn."""
    ONE_STEP = "OneStep"
    TWO_STEP = "TwoStep"


# ============================================================
# SEGMENT MODELS
# ============================================================

class TimeStep(BaseModel):
    """One AV state sample."""
    model_config = ConfigDict(frozen=True)

    index: int = Field(..., description="Timestep 1..91")
    position: Point = Field(..., description="(x, y) in meters, locally planar frame")
    speed: float = Field(..., description="Speed in m/s")


class TrafficLightTrack(BaseModel):
    """A traffic light identified with its stop line point."""
    model_config = ConfigDict(frozen=True)

    stop_line: Point
    states: Tuple[int, ...] = Field(..., description="One state code per timestep")

    def state_names(self) -> List[str]:
        """Decode state codes, marking codes outside the table as INVALID."""
        valid = {state.value for state in LightState}
        return [LightState(code).name if code in valid else "INVALID" for code in self.states]


class StopSign(BaseModel):
    """A stop sign position."""
    model_config = ConfigDict(frozen=True)

    position: Point


class Segment(BaseModel):
    """A 9.1 s clip: 91 AV states plus traffic-device context.

    The model itself is permissive so malformed segments can be constructed
    and reported on; use ``validate_segment`` to check the invariants.
    """
    model_config = ConfigDict(frozen=True)

    id: str
    steps: Tuple[TimeStep, ...]
    lights: Tuple[TrafficLightTrack, ...] = ()
    signs: Tuple[StopSign, ...] = ()

    def positions(self) -> np.ndarray:
        """Positions as an (n, 2) array."""
        return np.array([step.position for step in self.steps], dtype=float).reshape(-1, 2)

    def speeds(self) -> np.ndarray:
        """Speeds as an (n,) array."""
        return np.array([step.speed for step in self.steps], dtype=float)


class Violation(BaseModel):
    """A single segment invariant violation."""
    model_config = ConfigDict(frozen=True)

    field: str
    index: Optional[int] = None
    message: str


def _finite(*values: float) -> bool:
    return all(math.isfinite(v) for v in values)


def validate_segment(segment: Segment) -> List[Violation]:
    """Check every segment invariant.

    Args:
        segment: Segment to check

    Returns:
        Violations naming field and index; empty when the segment is valid
    """
    violations: List[Violation] = []

    if len(segment.steps) != SEGMENT_LENGTH:
        violations.append(Violation(
            field="steps",
            message=f"expected {SEGMENT_LENGTH} steps, found {len(segment.steps)}"
        ))

    for k, step in enumerate(segment.steps):
        if step.index != k + 1:
            violations.append(Violation(
                field="steps.index", index=k,
                message=f"timestep index {step.index} breaks contiguous numbering (expected {k + 1})"
            ))
        if not _finite(*step.position):
            violations.append(Violation(field="steps.position", index=k, message="non-finite coordinate"))
        if not _finite(step.speed) or step.speed < 0:
            violations.append(Violation(field="steps.speed", index=k, message=f"speed {step.speed} must be finite and >= 0"))

    for j, light in enumerate(segment.lights):
        if not _finite(*light.stop_line):
            violations.append(Violation(field=f"lights[{j}].stop_line", message="non-finite coordinate"))
        if len(light.states) != SEGMENT_LENGTH:
            violations.append(Violation(
                field=f"lights[{j}].states",
                message=f"expected {SEGMENT_LENGTH} state codes, found {len(light.states)}"
            ))
        for k, code in enumerate(light.states):
            if not 0 <= code <= 8:
                violations.append(Violation(
                    field=f"lights[{j}].states", index=k,
                    message=f"state code {code} outside 0..8"
                ))

    for j, sign in enumerate(segment.signs):
        if not _finite(*sign.position):
            violations.append(Violation(field=f"signs[{j}].position", message="non-finite coordinate"))

    return violations


# ============================================================
# ORGANIZED TRAJECTORY
# ============================================================

class TrajectoryRow(BaseModel):
    """One timestep of an organized trajectory."""
    model_config = ConfigDict(frozen=True)

    index: int
    x: float
    y: float
    v: float
    a: float
    light_state: Optional[int] = None
    dist_to_stop_line: Optional[float] = None
    dist_to_sign: Optional[float] = None


class TrajectoryRecord(BaseModel):
    """Organized per-timestep trajectory with its header fields."""
    model_config = ConfigDict(frozen=True)

    segment_id: str
    category: InteractionCategory
    stop_line: Optional[Point] = None
    initial_sign: Optional[Point] = None
    rows: Tuple[TrajectoryRow, ...]

    @model_validator(mode="after")
    def check_rows(self) -> "TrajectoryRecord":
        if len(self.rows) != SEGMENT_LENGTH:
            raise ValueError(f"expected {SEGMENT_LENGTH} rows, found {len(self.rows)}")
        for row in self.rows:
            for name, anchor in (("dist_to_stop_line", self.stop_line), ("dist_to_sign", self.initial_sign)):
                value = getattr(row, name)
                if (value is None) != (anchor is None):
                    raise ValueError(f"row {row.index}: {name} must be null exactly when its anchor is absent")
                if value is not None and value < 0:
                    raise ValueError(f"row {row.index}: {name} is negative")
        return self

    def positions(self) -> np.ndarray:
        return np.array([(row.x, row.y) for row in self.rows], dtype=float)

    def speeds(self) -> np.ndarray:
        return np.array([row.v for row in self.rows], dtype=float)

    def accelerations(self) -> np.ndarray:
        return np.array([row.a for row in self.rows], dtype=float)

    def stop_line_distances(self) -> Optional[np.ndarray]:
        if self.stop_line is None:
            return None
        return np.array([row.dist_to_stop_line for row in self.rows], dtype=float)

    def with_kinematics(self, speeds: np.ndarray, accelerations: np.ndarray) -> "TrajectoryRecord":
        """Return a copy with replaced speed and acceleration columns."""
        rows = tuple(
            TrajectoryRow(**{**row.model_dump(), "v": float(v), "a": float(a)})
            for row, v, a in zip(self.rows, speeds, accelerations)
        )
        return TrajectoryRecord(
            segment_id=self.segment_id,
            category=self.category,
            stop_line=self.stop_line,
            initial_sign=self.initial_sign,
            rows=rows,
        )


# ============================================================
# RULE PARAMETERS
# ============================================================

class LightRuleParams(BaseModel):
    """Thresholds of the traffic-light rules."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    l_move: float = Field(1.0, gt=0, description="Minimum cumulative moving time (s)")
    d_pass: float = Field(0.1, gt=0, description="Stop line passage radius (m)")
    d_poly: int = Field(6, ge=1, description="Trajectory polynomial degree")
    p_extend: float = Field(0.2, gt=0, lt=1, description="Extension as a fraction of path length")
    v_stop_light: float = Field(1.0, gt=0, description="Stopping speed (m/s)")
    l_begin: float = Field(1.0, gt=0, description="Initial moving window (s)")
    l_end: float = Field(1.0, gt=0, description="Final stopped window (s)")
    d_stop: float = Field(5.0, gt=0, description="Max final distance to the stop line (m)")
    l_extend: float = Field(2.0, gt=0, description="Min time left after crossing (s)")
    eta_left: float = 0.3
    eta_right: float = -0.3
    eta_through_1: float = 0.1
    eta_through_2: float = -0.1

    @model_validator(mode="after")
    def check_thresholds(self) -> "LightRuleParams":
        if not self.eta_right < self.eta_through_2 < self.eta_through_1 < self.eta_left:
            raise ValueError(
                "turn thresholds must satisfy eta_right < eta_through_2 < eta_through_1 < eta_left"
            )
        for name in ("l_begin", "l_end"):
            if samples_for(getattr(self, name)) > SEGMENT_LENGTH:
                raise ValueError(f"{name} window is longer than a segment")
        return self


class SignRuleParams(BaseModel):
    """Thresholds of the stop-sign rules and the sign clustering."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    r_stop: float = Field(5.0, gt=0, description="Stop area radius (m)")
    l_stop: float = Field(0.5, gt=0, description="Minimum stopped time (s)")
    v_stop_sign: float = Field(0.5, gt=0, description="Stopping speed (m/s)")
    delta_t_stop: float = Field(1.0, gt=0, description="Min gap between two stops (s)")
    eta_left_sign: float = Field(0.3, gt=0)
    eta_right_sign: float = Field(-0.3, lt=0)
    dbscan_eps: float = Field(28.0, gt=0, description="Clustering radius (m)")
    dbscan_min_pts: int = Field(2, ge=1, description="Points per core neighbourhood, self included")
    stop_area_center: Literal["nearest_point", "sign"] = Field(
        "nearest_point",
        description="Center the stop area on the AV's closest point to the sign, or on the sign itself"
    )


class QualityThresholds(BaseModel):
    """Normal kinematic bands and the jerk inversion limit."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    accel_min: float = -8.0
    accel_max: float = 5.0
    jerk_min: float = -15.0
    jerk_max: float = 15.0
    window: float = Field(1.0, gt=0, description="Inversion window length (s)")
    max_inversions_per_window: int = Field(1, ge=0)

    @model_validator(mode="after")
    def check_bands(self) -> "QualityThresholds":
        if not self.accel_min < self.accel_max:
            raise ValueError("accel_min must be below accel_max")
        if not self.jerk_min < self.jerk_max:
            raise ValueError("jerk_min must be below jerk_max")
        if samples_for(self.window) < 2:
            raise ValueError("window must span at least two samples")
        return self

    @property
    def window_samples(self) -> int:
        return samples_for(self.window)


class DenoiseConfig(BaseModel):
    """Wavelet zero-detail denoising settings."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    wavelet: str = "db6"
    levels: int = Field(2, ge=1)
    boundary: str = "symmetric"
    acceleration: Literal["rederive", "independent"] = Field(
        "rederive",
        description="Re-derive acceleration from denoised speed, or denoise it on its own"
    )

    @field_validator("wavelet")
    @classmethod
    def validate_wavelet(cls, v: str) -> str:
        if v not in pywt.wavelist(kind="discrete"):
            raise ValueError(f"unknown discrete wavelet '{v}'")
        return v

    @field_validator("boundary")
    @classmethod
    def validate_boundary(cls, v: str) -> str:
        if v not in pywt.Modes.modes:
            raise ValueError(f"unknown extension mode '{v}'")
        return v

    @model_validator(mode="after")
    def check_depth(self) -> "DenoiseConfig":
        max_level = pywt.dwt_max_level(SEGMENT_LENGTH, pywt.Wavelet(self.wavelet).dec_len)
        if self.levels > max_level:
            raise ValueError(
                f"levels={self.levels} exceeds the maximum depth {max_level} for {SEGMENT_LENGTH} samples"
            )
        return self


# ============================================================
# IDM MODELS
# ============================================================

IDM_PARAMETER_NAMES = ("v0", "T", "a_max", "b", "s0", "delta")


class IdmParams(BaseModel):
    """Intelligent Driver Model parameters."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    v0: float = Field(..., gt=0, description="Desired speed (m/s)")
    T: float = Field(..., gt=0, description="Desired time headway (s)")
    a_max: float = Field(..., gt=0, description="Maximum acceleration (m/s^2)")
    b: float = Field(..., gt=0, description="Comfortable deceleration (m/s^2)")
    s0: float = Field(..., gt=0, description="Minimum spacing (m)")
    delta: float = Field(..., gt=0, description="Acceleration exponent")

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in IDM_PARAMETER_NAMES], dtype=float)

    @classmethod
    def from_array(cls, values: np.ndarray) -> "IdmParams":
        return cls(**{name: float(v) for name, v in zip(IDM_PARAMETER_NAMES, values)})


class IdmRanges(BaseModel):
    """Uniform sampling range per IDM parameter."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    v0: Tuple[float, float] = (1.0, 30.0)
    T: Tuple[float, float] = (0.1, 5.0)
    a_max: Tuple[float, float] = (0.05, 5.0)
    b: Tuple[float, float] = (0.1, 8.0)
    s0: Tuple[float, float] = (0.1, 10.0)
    delta: Tuple[float, float] = (1.0, 10.0)

    @model_validator(mode="after")
    def check_ranges(self) -> "IdmRanges":
        for name in IDM_PARAMETER_NAMES:
            low, high = getattr(self, name)
            if not 0 < low < high:
                raise ValueError(f"range for {name} must satisfy 0 < low < high, got ({low}, {high})")
        return self

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        lows = np.array([getattr(self, name)[0] for name in IDM_PARAMETER_NAMES], dtype=float)
        highs = np.array([getattr(self, name)[1] for name in IDM_PARAMETER_NAMES], dtype=float)
        return lows, highs


class CalibrationSpec(BaseModel):
    """Monte-Carlo calibration settings."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    ranges: IdmRanges = Field(default_factory=IdmRanges)
    n_samples: int = Field(100_000, ge=1)
    seed: int = 0
    objective: Literal["pooled", "per_trajectory"] = "pooled"
    exclude_dwell: bool = False
    dwell_speed: float = Field(0.1, gt=0, description="Samples below this speed count as dwell (m/s)")
    calibration_fraction: float = Field(15 / 19, gt=0, lt=1)
    chunk_size: int = Field(2048, ge=1, description="Parameter draws evaluated per batch")


class CalibrationResult(BaseModel):
    """Best parameters and their fit errors."""
    model_config = ConfigDict(frozen=True)

    best: IdmParams
    rmse_calibration: float = Field(..., ge=0)
    rmse_validation: Optional[float] = Field(None, ge=0)
    best_sample_index: int = Field(..., ge=0)
    n_calibration_trajectories: int = Field(..., ge=0)
    n_validation_trajectories: int = Field(0, ge=0)
    n_calibration_samples: int = Field(..., ge=0)


# ============================================================
# QUALITY & REPORTING
# ============================================================

class QualityReport(BaseModel):
    """Anomaly percentages for one trajectory (or a mean over many)."""
    model_config = ConfigDict(frozen=True)

    anomaly_accel_pct: float = Field(..., ge=0, le=100)
    anomaly_jerk_pct: float = Field(..., ge=0, le=100)
    anomaly_inversion_pct: float = Field(..., ge=0, le=100)


class CategorySummary(BaseModel):
    """One row of the per-category summary table."""
    category: str
    segments: int = Field(..., ge=0)
    distance_km: float = Field(..., ge=0)
    duration_h: float = Field(..., ge=0)
    anomaly_accel_pct: float = Field(..., ge=0, le=100)
    anomaly_jerk_pct: float = Field(..., ge=0, le=100)
    anomaly_inversion_pct: float = Field(..., ge=0, le=100)


class EnhancementComparison(BaseModel):
    """Before/after anomaly means for one category.

    ``after_*_alt`` columns hold the metrics under the other acceleration
    reading (independent denoising when the run re-derives, and vice versa).
    """
    category: str
    segments: int = Field(..., ge=0)
    before_accel_pct: float
    before_jerk_pct: float
    before_inversion_pct: float
    after_accel_pct: float
    after_jerk_pct: float
    after_inversion_pct: float
    after_jerk_pct_alt: float
    after_inversion_pct_alt: float


class RunManifest(BaseModel):
    """What a CLI run read, produced and measured."""
    command: str
    inputs: List[str] = Field(default_factory=list)
    config_path: Optional[str] = None
    output_dir: str
    total_segments: int = Field(..., ge=0)
    category_counts: Dict[str, int] = Field(default_factory=dict)
    quality_before: Dict[str, QualityReport] = Field(default_factory=dict)
    quality_after: Dict[str, QualityReport] = Field(default_factory=dict)
    issues: List[str] = Field(default_factory=list)
    wall_time_s: float = Field(0.0, ge=0)

    @model_validator(mode="after")
    def check_counts(self) -> "RunManifest":
        if self.category_counts and sum(self.category_counts.values()) != self.total_segments:
            raise ValueError("category counts must sum to the processed segment total")
        return self


# ============================================================
# CLASSIFICATION OUTCOMES
# ============================================================

class LightClassification(BaseModel):
    """Outcome of the traffic-light rule chain."""
    model_config = ConfigDict(frozen=True)

    category: InteractionCategory = InteractionCategory.NONE
    influencing_light: Optional[TrafficLightTrack] = None
    eta: Optional[float] = None

    @model_validator(mode="after")
    def check_consistency(self) -> "LightClassification":
        if self.category not in LIGHT_CATEGORIES + (InteractionCategory.NONE,):
            raise ValueError(f"{self.category.value} is not a traffic light category")
        if (self.influencing_light is None) != (self.category == InteractionCategory.NONE):
            raise ValueError("influencing_light must be set exactly when a category is assigned")
        return self


class SignClassification(BaseModel):
    """Outcome of the stop-sign rule chain."""
    model_config = ConfigDict(frozen=True)

    category: InteractionCategory = InteractionCategory.NONE
    initial_nearest_sign: Optional[StopSign] = None
    eta_sign: Optional[float] = None
    stop_area_center: Optional[Point] = None

    @model_validator(mode="after")
    def check_consistency(self) -> "SignClassification":
        if self.category not in SIGN_CATEGORIES + (InteractionCategory.NONE,):
            raise ValueError(f"{self.category.value} is not a stop sign category")
        if (self.initial_nearest_sign is None) != (self.category == InteractionCategory.NONE):
            raise ValueError("initial_nearest_sign must be set exactly when a category is assigned")
        return self


# ============================================================
# SYNTHETIC SCENARIOS
# ============================================================

class ScenarioSpec(BaseModel):
    """Recipe for one labeled synthetic segment."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    category: InteractionCategory
    approach_speed: float = Field(8.0, gt=0, description="Initial speed (m/s)")
    intersection_scale: float = Field(12.0, gt=0, description="Intersection width (m)")
    noise_sigma_speed: float = Field(0.0, ge=0)
    noise_sigma_pos: float = Field(0.0, ge=0)
    seed: int = Field(0, ge=0)
    distant_intersections: int = Field(0, ge=0, description="Extra four-way sign groups far away")
