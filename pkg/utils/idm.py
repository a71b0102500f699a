"""Intelligent Driver Model approaching a stop line, and its calibration.

The gap ``s`` is the distance to a static stop line, so the closing speed
equals the vehicle speed.
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict

from utils.exceptions import AllSamplesInvalid, EmptyInput, LengthMismatch, NonPositiveGap
from utils.validators import (
    DT,
    SEGMENT_LENGTH,
    CalibrationResult,
    CalibrationSpec,
    IdmParams,
    TrajectoryRecord,
)

logger = logging.getLogger(__name__)

# Reference calibration on real stop-at-red trajectories.
REFERENCE_PARAMS = IdmParams(v0=10.11, T=2.17, a_max=0.25, b=2.31, s0=4.83, delta=4.96)


def desired_gap(v: float, p: IdmParams) -> float:
    """s*(v) = s0 + v T + v^2 / (2 sqrt(a_max b))."""
    return p.s0 + v * p.T + v * v / (2.0 * np.sqrt(p.a_max * p.b))


def idm_accel(v: float, s: float, p: IdmParams) -> float:
    """IDM acceleration toward a stop line at gap ``s``.

    Raises:
        NonPositiveGap: s <= 0
    """
    if s <= 0:
        raise NonPositiveGap(f"gap must be positive, got {s}")
    s_star = desired_gap(v, p)
    return float(p.a_max * (1.0 - (v / p.v0) ** p.delta - (s_star / s) ** 2))


def idm_accel_gap_derivative(v: float, s: float, p: IdmParams) -> float:
    """Analytic d(idm_accel)/ds = 2 a_max s*^2 / s^3."""
    if s <= 0:
        raise NonPositiveGap(f"gap must be positive, got {s}")
    s_star = desired_gap(v, p)
    return float(2.0 * p.a_max * s_star ** 2 / s ** 3)


class ApproachSeries(BaseModel):
    """Speed, gap and acceleration samples of one approach."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    v: np.ndarray
    s: np.ndarray
    a: np.ndarray

    @property
    def length(self) -> int:
        return int(self.v.size)


def simulate_approach(
    initial: Tuple[float, float],
    p: IdmParams,
    dt: float = DT,
    steps: int = SEGMENT_LENGTH - 1,
) -> ApproachSeries:
    """Explicit Euler integration of v' = idm_accel(v, s), s' = -v.

    Speed is clamped at zero. Integration stops before any state with
    s <= s0 / 2, so every returned gap is positive.

    Args:
        initial: (v, s) at t = 0
        p: Model parameters
        dt: Step (s)
        steps: Maximum number of steps

    Returns:
        ApproachSeries including the initial state; ``a`` holds the model
        acceleration at each returned state
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    v, s = float(initial[0]), float(initial[1])
    if s <= 0:
        raise NonPositiveGap(f"initial gap must be positive, got {s}")

    vs, ss, accs = [v], [s], [idm_accel(v, s, p)]
    for _ in range(steps):
        if s <= p.s0 / 2:
            break
        v_next = max(v + accs[-1] * dt, 0.0)
        s_next = s - v * dt
        if s_next <= p.s0 / 2:
            break
        v, s = v_next, s_next
        vs.append(v)
        ss.append(s)
        accs.append(idm_accel(v, s, p))

    return ApproachSeries(v=np.array(vs), s=np.array(ss), a=np.array(accs))


def rmse_accel(observed: Sequence[float], modeled: Sequence[float]) -> float:
    """Root mean square error between two acceleration series.

    Raises:
        LengthMismatch: different lengths
        EmptyInput: both empty
    """
    obs = np.asarray(observed, dtype=float)
    mod = np.asarray(modeled, dtype=float)
    if obs.shape != mod.shape:
        raise LengthMismatch(f"observed has {obs.size} samples, modeled has {mod.size}")
    if obs.size == 0:
        raise EmptyInput("no samples to compare")
    return float(np.sqrt(np.mean((obs - mod) ** 2)))


# ============================================================
# CALIBRATION
# ============================================================

def approach_series(record: TrajectoryRecord) -> ApproachSeries:
    """(v, s, a) of an organized trajectory; s is the stop line distance."""
    s = record.stop_line_distances()
    if s is None:
        raise AllSamplesInvalid(f"{record.segment_id} has no stop line context")
    return ApproachSeries(v=record.speeds(), s=s, a=record.accelerations())


def _usable(series: ApproachSeries, spec: CalibrationSpec) -> np.ndarray:
    mask = series.s > 0
    if spec.exclude_dwell:
        mask &= series.v >= spec.dwell_speed
    return mask


def _batch_accel(v: np.ndarray, s: np.ndarray, draws: np.ndarray) -> np.ndarray:
    """Model acceleration for every (draw, sample) pair; shape (m, n)."""
    v0, T, a_max, b, s0, delta = (draws[:, k:k + 1] for k in range(6))
    s_star = s0 + v * T + v ** 2 / (2.0 * np.sqrt(a_max * b))
    return a_max * (1.0 - (v / v0) ** delta - (s_star / s) ** 2)


def _losses(
    draws: np.ndarray,
    pooled: Tuple[np.ndarray, np.ndarray, np.ndarray],
    groups: np.ndarray,
    n_groups: int,
    objective: str,
) -> np.ndarray:
    v, s, a = pooled
    squared = (_batch_accel(v, s, draws) - a) ** 2
    if objective == "pooled":
        return np.sqrt(squared.mean(axis=1))
    per_group = np.stack(
        [np.sqrt(squared[:, groups == g].mean(axis=1)) for g in range(n_groups)],
        axis=1,
    )
    return per_group.mean(axis=1)


def _pool(series: Sequence[ApproachSeries], spec: CalibrationSpec) -> Tuple[Tuple[np.ndarray, ...], np.ndarray, int]:
    # Series without a usable sample are dropped so per-trajectory means stay defined.
    kept = []
    for item in series:
        mask = _usable(item, spec)
        if mask.any():
            kept.append((item.v[mask], item.s[mask], item.a[mask]))
    if not kept:
        raise AllSamplesInvalid("no sample with a positive stop line gap")
    pooled = tuple(np.concatenate([part[k] for part in kept]) for k in range(3))
    group_ids = np.concatenate([np.full(part[0].size, g) for g, part in enumerate(kept)])
    return pooled, group_ids, len(kept)


def score_params(series: Sequence[ApproachSeries], p: IdmParams, spec: CalibrationSpec) -> float:
    """Objective value of one parameter set over ``series``."""
    pooled, groups, n_groups = _pool(series, spec)
    return float(_losses(p.as_array()[None, :], pooled, groups, n_groups, spec.objective)[0])


def calibrate_series(
    series: Sequence[ApproachSeries],
    spec: CalibrationSpec,
    validation: Optional[Sequence[ApproachSeries]] = None,
) -> CalibrationResult:
    """Monte-Carlo search over uniform parameter draws.

    All draws come from one seeded generator before evaluation, and the
    argmin takes the lowest sample index on ties, so the result does not
    depend on chunking.

    Raises:
        EmptyInput: no series
        AllSamplesInvalid: no usable (v, s) pair
    """
    if not series:
        raise EmptyInput("calibration needs at least one trajectory")
    pooled, groups, n_groups = _pool(series, spec)

    rng = np.random.default_rng(spec.seed)
    lows, highs = spec.ranges.bounds()
    draws = rng.uniform(lows, highs, size=(spec.n_samples, lows.size))

    losses = np.empty(spec.n_samples)
    for start in range(0, spec.n_samples, spec.chunk_size):
        stop = min(start + spec.chunk_size, spec.n_samples)
        losses[start:stop] = _losses(draws[start:stop], pooled, groups, n_groups, spec.objective)

    # Non-finite losses (overflow at extreme draws) never win.
    losses = np.where(np.isfinite(losses), losses, np.inf)
    best_index = int(np.argmin(losses))
    best = IdmParams.from_array(draws[best_index])
    logger.info(f"Calibration best sample {best_index}: RMSE {losses[best_index]:.4f} m/s^2")

    rmse_validation = score_params(validation, best, spec) if validation else None
    return CalibrationResult(
        best=best,
        rmse_calibration=float(losses[best_index]),
        rmse_validation=rmse_validation,
        best_sample_index=best_index,
        n_calibration_trajectories=len(series),
        n_validation_trajectories=len(validation) if validation else 0,
        n_calibration_samples=int(pooled[0].size),
    )


def calibrate(
    trajectories: Sequence[TrajectoryRecord],
    spec: CalibrationSpec,
    validation: Optional[Sequence[TrajectoryRecord]] = None,
) -> CalibrationResult:
    """Calibrate IDM parameters on organized stop-at-light trajectories.

    Args:
        trajectories: Calibration set
        spec: Ranges, sample count, seed and objective
        validation: Optional held-out set for the validation RMSE

    Returns:
        CalibrationResult
    """
    if not trajectories:
        raise EmptyInput("calibration needs at least one trajectory")
    return calibrate_series(
        [approach_series(r) for r in trajectories],
        spec,
        [approach_series(r) for r in validation] if validation else None,
    )


def split_trajectories(
    records: Sequence[TrajectoryRecord],
    fraction: float,
    seed: int,
) -> Tuple[List[TrajectoryRecord], List[TrajectoryRecord]]:
    """Seeded calibration/validation split; both sides get at least one record."""
    n = len(records)
    if n < 2:
        raise EmptyInput("a split needs at least two trajectories")
    order = np.random.default_rng(seed).permutation(n)
    n_cal = min(n - 1, max(1, int(round(n * fraction))))
    return [records[k] for k in sorted(order[:n_cal])], [records[k] for k in sorted(order[n_cal:])]


def speed_comparison(record: TrajectoryRecord, p: IdmParams) -> pd.DataFrame:
    """Observed versus simulated speed from the record's initial state.

    The simulated columns are empty once the simulation stops early.
    """
    observed = approach_series(record)
    simulated = simulate_approach((observed.v[0], observed.s[0]), p, steps=observed.length - 1)
    n = observed.length
    pad = n - simulated.length
    return pd.DataFrame({
        "index": np.arange(1, n + 1),
        "t": np.arange(n) * DT,
        "v_observed": observed.v,
        "v_modeled": np.concatenate([simulated.v, np.full(pad, np.nan)]),
        "s_observed": observed.s,
        "s_modeled": np.concatenate([simulated.s, np.full(pad, np.nan)]),
        "a_observed": observed.a,
        "a_modeled": np.concatenate([simulated.a, np.full(pad, np.nan)]),
    })
