"""Labeled synthetic segments for every interaction category.

Scenes are laid out in a lane frame where the vehicle approaches along +y
and (for stop scenes) comes to rest at the origin, then rotated and shifted
by a seeded random pose. Speed profiles are piecewise constant-jerk and
positions integrate them, so noiseless scenes are kinematically consistent.
"""

import logging
import math
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
import yaml
from pydantic import ValidationError
from scipy.integrate import cumulative_trapezoid

from utils.exceptions import ConfigError, InfeasibleSpec
from utils.validators import (
    DT,
    SEGMENT_LENGTH,
    InteractionCategory,
    LightState,
    ScenarioSpec,
    Segment,
    StopSign,
    TimeStep,
    TrafficLightTrack,
)

logger = logging.getLogger(__name__)

CLIP_SECONDS = DT * (SEGMENT_LENGTH - 1)
FINE_DT = 0.001
_FINE_PER_SAMPLE = int(round(DT / FINE_DT))

JERK = 6.0
DECEL = 3.5
EXIT_ACCEL = 3.0
EXIT_SPEED = 6.0
HOP_ACCEL = 2.5
HOP_SPEED = 2.5
TWO_STEP_EXIT_SPEED = 5.0

LIGHT_CRUISE = 1.5
SIGN_DWELL = 0.7
TWO_STEP_DWELL = 0.3
MIN_APPROACH = 12.0
MAX_STOP_GAP = 3.0

# Initial nearest sign, lane frame: right of the lane, just past the stop point.
SIGN_OFFSET = (2.5, 1.0)
TURN_START = 1.0
RIGHT_RADIUS = 7.0
LEFT_RADIUS = 9.0
TWO_STEP_RADIUS = 6.0
DISTANT_SPACING = 200.0


# ============================================================
# SPEED PROFILES
# ============================================================

def ramp_duration(v_from: float, v_to: float, accel: float, jerk: float = JERK) -> float:
    """Duration of a constant-jerk speed change capped at ``accel``."""
    dv = abs(v_to - v_from)
    if dv >= accel * accel / jerk:
        return dv / accel + accel / jerk
    return 2.0 * math.sqrt(dv / jerk)


def ramp_distance(v_from: float, v_to: float, accel: float, jerk: float = JERK) -> float:
    """Distance covered during the ramp (symmetric profile, so the mean speed is exact)."""
    return 0.5 * (v_from + v_to) * ramp_duration(v_from, v_to, accel, jerk)


def _ramp_speed(tau: np.ndarray, v_from: float, v_to: float, accel: float, jerk: float) -> np.ndarray:
    sign = 1.0 if v_to >= v_from else -1.0
    total = ramp_duration(v_from, v_to, accel, jerk)
    t_jerk = min(accel / jerk, total / 2.0)
    peak = jerk * t_jerk

    rising = v_from + sign * 0.5 * jerk * tau ** 2
    middle = v_from + sign * (0.5 * jerk * t_jerk ** 2 + peak * (tau - t_jerk))
    remaining = total - tau
    falling = v_to - sign * 0.5 * jerk * remaining ** 2

    out = np.where(tau <= t_jerk, rising, np.where(tau <= total - t_jerk, middle, falling))
    return np.maximum(out, 0.0)


class SpeedProfile:
    """Sequence of constant-speed holds and constant-jerk ramps."""

    def __init__(self, initial_speed: float):
        self.phases: List[Tuple[float, float, float, float]] = []
        self.final_speed = initial_speed

    @property
    def duration(self) -> float:
        return sum(phase[0] for phase in self.phases)

    def hold(self, seconds: float) -> "SpeedProfile":
        if seconds > 0:
            self.phases.append((seconds, self.final_speed, self.final_speed, 0.0))
        return self

    def ramp(self, v_to: float, accel: float) -> "SpeedProfile":
        seconds = ramp_duration(self.final_speed, v_to, accel)
        if seconds > 0:
            self.phases.append((seconds, self.final_speed, v_to, accel))
        self.final_speed = v_to
        return self

    def speeds(self, t: np.ndarray) -> np.ndarray:
        """Speed at times ``t``; the last speed holds after the final phase."""
        out = np.full_like(t, self.final_speed, dtype=float)
        start = 0.0
        for seconds, v_from, v_to, accel in self.phases:
            inside = (t >= start) & (t < start + seconds)
            if accel == 0.0:
                out[inside] = v_from
            else:
                out[inside] = _ramp_speed(t[inside] - start, v_from, v_to, accel, JERK)
            start += seconds
        return out


def _integrate(profile: SpeedProfile) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Fine-grid (t, v, travelled distance)."""
    t = np.linspace(0.0, CLIP_SECONDS, int(round(CLIP_SECONDS / FINE_DT)) + 1)
    v = profile.speeds(t)
    return t, v, cumulative_trapezoid(v, t, initial=0.0)


def _sampled(fine: np.ndarray) -> np.ndarray:
    return fine[::_FINE_PER_SAMPLE][:SEGMENT_LENGTH]


def _distance_at(travelled: np.ndarray, when: float) -> float:
    return float(travelled[int(round(when / FINE_DT))])


# ============================================================
# LANE FRAME PATHS
# ============================================================

def lane_path(s: np.ndarray, turn_start: float = 0.0, radius: float = 0.0, side: int = 0) -> np.ndarray:
    """Position along a lane at arc coordinate ``s`` (s = y on the approach).

    ``side`` is +1 for a left turn, -1 for a right turn and 0 for straight.
    A turn is a 90 degree arc of ``radius`` starting at y = ``turn_start``,
    followed by a straight exit.
    """
    s = np.asarray(s, dtype=float)
    out = np.column_stack([np.zeros_like(s), s])
    if side == 0:
        return out

    arc_end = turn_start + 0.5 * math.pi * radius
    on_arc = (s > turn_start) & (s <= arc_end)
    phi = (s[on_arc] - turn_start) / radius
    out[on_arc, 0] = -side * radius * (1.0 - np.cos(phi))
    out[on_arc, 1] = turn_start + radius * np.sin(phi)

    past = s > arc_end
    out[past, 0] = -side * (radius + (s[past] - arc_end))
    out[past, 1] = turn_start + radius
    return out


def _rotate_about(point: np.ndarray, center: np.ndarray, quarter_turns: int) -> np.ndarray:
    angle = 0.5 * math.pi * quarter_turns
    c, s = math.cos(angle), math.sin(angle)
    rel = point - center
    return center + np.array([c * rel[0] - s * rel[1], s * rel[0] + c * rel[1]])


def intersection_signs(spec: ScenarioSpec, four_way: bool) -> List[np.ndarray]:
    """Lane-frame sign positions: the initial sign first, then the rest of the intersection."""
    first = np.asarray(SIGN_OFFSET)
    center = np.array([-1.75, SIGN_OFFSET[1] + spec.intersection_scale / 2.0])
    turns = (0, 1, 2, 3) if four_way else (0, 2)
    signs = [_rotate_about(first, center, k) for k in turns]
    for k in range(1, spec.distant_intersections + 1):
        shift = np.array([DISTANT_SPACING * k, 0.0])
        signs.extend(_rotate_about(first, center, q) + shift for q in (0, 1, 2, 3))
    return signs


# ============================================================
# SCENES
# ============================================================

class Scene:
    """Lane-frame scene before pose and noise."""

    def __init__(
        self,
        positions: np.ndarray,
        speeds: np.ndarray,
        stop_line: Optional[np.ndarray] = None,
        light_state: Optional[LightState] = None,
        signs: Sequence[np.ndarray] = (),
    ):
        self.positions = positions
        self.speeds = speeds
        self.stop_line = stop_line
        self.light_state = light_state
        self.signs = list(signs)


def _require(condition: bool, spec: ScenarioSpec, reason: str):
    if not condition:
        raise InfeasibleSpec(
            f"{spec.category.value} at {spec.approach_speed} m/s: {reason}"
        )


def _light_stop(spec: ScenarioSpec) -> Scene:
    v = spec.approach_speed
    _require(v > 1.0, spec, "approach speed must exceed the light stopping speed")
    stop_time = LIGHT_CRUISE + ramp_duration(v, 0.0, DECEL)
    _require(stop_time <= 8.0, spec, "the stop does not complete before the final second")

    profile = SpeedProfile(v).hold(LIGHT_CRUISE).ramp(0.0, DECEL)
    _, speeds, travelled = _integrate(profile)
    s = _sampled(travelled)
    gap = min(MAX_STOP_GAP, 0.1 * s[-1])
    return Scene(
        positions=lane_path(s),
        speeds=_sampled(speeds),
        stop_line=np.array([0.0, s[-1] + gap]),
        light_state=LightState.STOP,
    )


def _light_straight(spec: ScenarioSpec) -> Scene:
    v = spec.approach_speed
    _require(v > 1.0, spec, "approach speed must exceed the light stopping speed")
    s = v * DT * np.arange(SEGMENT_LENGTH)
    positions = lane_path(s)
    return Scene(
        positions=positions,
        speeds=np.full(SEGMENT_LENGTH, v),
        stop_line=positions[40].copy(),
        light_state=LightState.GO,
    )


def _light_turn(spec: ScenarioSpec, side: int) -> Scene:
    """Quadratic Bezier turn; the stop line sits on the path at t = 3.0 s."""
    v = spec.approach_speed
    _require(v >= 2.0, spec, "turning scenes need at least 2 m/s to stay above the stopping speed")
    p0 = np.array([0.0, -4.5 * v])
    control = np.zeros(2)
    p2 = np.array([-side * 3.6 * v, 0.0])

    tau = np.linspace(0.0, 1.0, SEGMENT_LENGTH)[:, None]
    positions = (1 - tau) ** 2 * p0 + 2 * (1 - tau) * tau * control + tau ** 2 * p2
    velocity = 2 * (1 - tau) * (control - p0) + 2 * tau * (p2 - control)
    speeds = np.linalg.norm(velocity, axis=1) / CLIP_SECONDS
    return Scene(
        positions=positions,
        speeds=speeds,
        stop_line=positions[30].copy(),
        light_state=LightState.ARROW_GO if side > 0 else LightState.GO,
    )


def _sign_approach(spec: ScenarioSpec) -> Tuple[SpeedProfile, float]:
    """Cruise then stop at the origin after at least MIN_APPROACH metres."""
    v = spec.approach_speed
    cruise = max(0.0, (MIN_APPROACH - ramp_distance(v, 0.0, DECEL)) / v)
    profile = SpeedProfile(v).hold(cruise).ramp(0.0, DECEL)
    return profile, profile.duration


def _sign_stop(spec: ScenarioSpec, side: int, radius: float) -> Scene:
    profile, stop_time = _sign_approach(spec)
    profile.hold(SIGN_DWELL).ramp(EXIT_SPEED, EXIT_ACCEL)
    _require(profile.duration <= 8.0, spec, "the stop and exit do not fit in the clip")

    _, speeds, travelled = _integrate(profile)
    s = _sampled(travelled) - _distance_at(travelled, stop_time)
    four_way = spec.category == InteractionCategory.SIGN_FOUR_WAY
    return Scene(
        positions=lane_path(s, TURN_START, radius, side),
        speeds=_sampled(speeds),
        signs=intersection_signs(spec, four_way=four_way),
    )


def _sign_two_step(spec: ScenarioSpec) -> Scene:
    """Stop at the sign, creep into the center lane, stop again, then turn left."""
    profile, stop_time = _sign_approach(spec)
    profile.hold(TWO_STEP_DWELL).ramp(HOP_SPEED, HOP_ACCEL).ramp(0.0, HOP_ACCEL).hold(TWO_STEP_DWELL)
    second_stop = profile.duration
    profile.ramp(TWO_STEP_EXIT_SPEED, EXIT_ACCEL)
    _require(profile.duration <= 8.8, spec, "both stops and the exit do not fit in the clip")

    _, speeds, travelled = _integrate(profile)
    origin = _distance_at(travelled, stop_time)
    hop = _distance_at(travelled, second_stop) - origin
    s = _sampled(travelled) - origin
    return Scene(
        positions=lane_path(s, hop, TWO_STEP_RADIUS, side=1),
        speeds=_sampled(speeds),
        signs=intersection_signs(spec, four_way=False),
    )


def _no_interaction(spec: ScenarioSpec) -> Scene:
    s = spec.approach_speed * DT * np.arange(SEGMENT_LENGTH)
    return Scene(positions=lane_path(s), speeds=np.full(SEGMENT_LENGTH, spec.approach_speed))


def _build_scene(spec: ScenarioSpec) -> Scene:
    category = spec.category
    if category == InteractionCategory.LIGHT_STOP:
        return _light_stop(spec)
    if category == InteractionCategory.LIGHT_STRAIGHT:
        return _light_straight(spec)
    if category == InteractionCategory.LIGHT_LEFT_TURN:
        return _light_turn(spec, side=1)
    if category == InteractionCategory.LIGHT_RIGHT_TURN:
        return _light_turn(spec, side=-1)
    if category == InteractionCategory.SIGN_FOUR_WAY:
        return _sign_stop(spec, side=0, radius=0.0)
    if category == InteractionCategory.SIGN_RIGHT_TURN:
        return _sign_stop(spec, side=-1, radius=RIGHT_RADIUS)
    if category == InteractionCategory.SIGN_LEFT_ONE_STEP:
        return _sign_stop(spec, side=1, radius=LEFT_RADIUS)
    if category == InteractionCategory.SIGN_LEFT_TWO_STEP:
        return _sign_two_step(spec)
    return _no_interaction(spec)


def segment_id(spec: ScenarioSpec) -> str:
    return f"{spec.category.value.lower()}_{spec.seed:06d}"


def generate(spec: ScenarioSpec) -> Tuple[Segment, InteractionCategory]:
    """Build one labeled segment.

    The pose (rotation and offset) is drawn from the seeded generator first,
    then position and speed noise; speeds stay non-negative.

    Args:
        spec: Scenario recipe

    Returns:
        (segment, intended category)

    Raises:
        InfeasibleSpec: the approach speed cannot produce the category in 9.1 s
    """
    scene = _build_scene(spec)
    rng = np.random.default_rng(spec.seed)

    theta = rng.uniform(0.0, 2.0 * math.pi)
    offset = rng.uniform(-1000.0, 1000.0, size=2)
    rotation = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])

    def place(points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=float) @ rotation.T + offset

    positions = place(scene.positions)
    speeds = np.asarray(scene.speeds, dtype=float)
    if spec.noise_sigma_pos > 0:
        positions = positions + rng.normal(0.0, spec.noise_sigma_pos, size=positions.shape)
    if spec.noise_sigma_speed > 0:
        speeds = np.clip(speeds + rng.normal(0.0, spec.noise_sigma_speed, size=speeds.shape), 0.0, None)

    lights: Tuple[TrafficLightTrack, ...] = ()
    if scene.stop_line is not None:
        stop_line = place(scene.stop_line)
        lights = (TrafficLightTrack(
            stop_line=(float(stop_line[0]), float(stop_line[1])),
            states=(int(scene.light_state),) * SEGMENT_LENGTH,
        ),)
    signs = tuple(
        StopSign(position=(float(p[0]), float(p[1]))) for p in (place(sign) for sign in scene.signs)
    )

    segment = Segment(
        id=segment_id(spec),
        steps=tuple(
            TimeStep(index=k + 1, position=(float(p[0]), float(p[1])), speed=float(v))
            for k, (p, v) in enumerate(zip(positions, speeds))
        ),
        lights=lights,
        signs=signs,
    )
    logger.debug(f"Generated {segment.id} ({spec.category.value})")
    return segment, spec.category


def default_specs(per_category: int = 25, seed: int = 0) -> List[ScenarioSpec]:
    """Noiseless specs for every category at approach speeds cycling over 6 to 9 m/s."""
    return [
        ScenarioSpec(category=category, approach_speed=6.0 + (k % 4), seed=seed + c * per_category + k)
        for c, category in enumerate(InteractionCategory)
        for k in range(per_category)
    ]


def _expand(entry: dict) -> Iterator[ScenarioSpec]:
    entry = dict(entry)
    count = entry.pop("count", 1)
    base = ScenarioSpec.model_validate(entry)
    for k in range(count):
        yield base.model_copy(update={"seed": base.seed + k})


def load_scenario_specs(path: Union[str, Path]) -> List[ScenarioSpec]:
    """Read ``scenarios:`` entries from YAML; an entry may carry ``count`` (seeds increment).

    Raises:
        ConfigError: unreadable file or invalid entry
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"scenario file not found: {path}")
    try:
        with open(path) as f:
            document = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"invalid YAML in {path}: {e}") from e

    entries = document.get("scenarios") if isinstance(document, dict) else None
    if not isinstance(entries, list):
        raise ConfigError("expected a list", key_path="scenarios")

    specs: List[ScenarioSpec] = []
    for k, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise ConfigError("expected a mapping", key_path=f"scenarios.{k}")
        try:
            specs.extend(_expand(entry))
        except ValidationError as e:
            first = e.errors()[0]
            loc = ".".join(str(part) for part in ("scenarios", k, *first["loc"]))
            raise ConfigError(first["msg"], key_path=loc) from e
    return specs
