"""Trajectory quality metrics and per-category summaries."""

from collections import defaultdict
from typing import Dict, Iterable, List, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from utils.exceptions import TooShort
from utils.signal_processing import differentiate
from utils.validators import (
    DT,
    CategorySummary,
    InteractionCategory,
    QualityReport,
    QualityThresholds,
    TrajectoryRecord,
)

# |jerk| at or below this carries no sign.
ZERO_JERK = 1e-9


def _out_of_band_pct(values: Sequence[float], low: float, high: float) -> float:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise TooShort("anomaly percentages need at least one sample")
    outside = (arr < low) | (arr > high)
    return 100.0 * np.count_nonzero(outside) / arr.size


def anomaly_acceleration_pct(a: Sequence[float], t: QualityThresholds) -> float:
    """Share of acceleration samples outside [accel_min, accel_max], in percent."""
    return _out_of_band_pct(a, t.accel_min, t.accel_max)


def anomaly_jerk_pct(j: Sequence[float], t: QualityThresholds) -> float:
    """Share of jerk samples outside [jerk_min, jerk_max], in percent."""
    return _out_of_band_pct(j, t.jerk_min, t.jerk_max)


def anomaly_inversion_pct(j: Sequence[float], t: QualityThresholds) -> float:
    """Share of sliding windows with too many jerk sign inversions.

    Windows are ``t.window`` long with stride one sample. Zero jerk is
    skipped, so an inversion is a sign change between consecutive nonzero
    samples inside the window.
    """
    arr = np.asarray(j, dtype=float)
    width = t.window_samples
    if arr.size < width:
        raise TooShort(f"inversion windows need {width} samples, got {arr.size}")

    signs = np.sign(arr)
    signs[np.abs(arr) <= ZERO_JERK] = 0.0

    flagged = 0
    windows = sliding_window_view(signs, width)
    for window in windows:
        nonzero = window[window != 0]
        changes = np.count_nonzero(nonzero[1:] != nonzero[:-1])
        if changes > t.max_inversions_per_window:
            flagged += 1
    return 100.0 * flagged / len(windows)


def quality_report(record: TrajectoryRecord, t: QualityThresholds) -> QualityReport:
    """All three metrics; jerk is the derivative of the record's acceleration."""
    a = record.accelerations()
    j = differentiate(a)
    return QualityReport(
        anomaly_accel_pct=anomaly_acceleration_pct(a, t),
        anomaly_jerk_pct=anomaly_jerk_pct(j, t),
        anomaly_inversion_pct=anomaly_inversion_pct(j, t),
    )


def mean_report(reports: Iterable[QualityReport]) -> QualityReport:
    """Mean of per-trajectory percentages."""
    reports = list(reports)
    if not reports:
        return QualityReport(anomaly_accel_pct=0.0, anomaly_jerk_pct=0.0, anomaly_inversion_pct=0.0)
    return QualityReport(
        anomaly_accel_pct=float(np.mean([r.anomaly_accel_pct for r in reports])),
        anomaly_jerk_pct=float(np.mean([r.anomaly_jerk_pct for r in reports])),
        anomaly_inversion_pct=float(np.mean([r.anomaly_inversion_pct for r in reports])),
    )


def trajectory_distance(record: TrajectoryRecord) -> float:
    """Path length in meters from consecutive positions."""
    return float(np.sum(np.linalg.norm(np.diff(record.positions(), axis=0), axis=1)))


def trajectory_duration(record: TrajectoryRecord) -> float:
    """Clip duration in seconds (samples times the sampling interval)."""
    return len(record.rows) * DT


def summarize_by_category(
    records: Sequence[TrajectoryRecord],
    reports: Sequence[QualityReport],
) -> List[CategorySummary]:
    """Per-category counts, distance, duration and mean anomaly percentages.

    Rows follow the category enum order; categories without records are
    omitted. A final ``All`` row covers every record.
    """
    grouped: Dict[InteractionCategory, List[int]] = defaultdict(list)
    for k, record in enumerate(records):
        grouped[record.category].append(k)

    def row(label: str, indices: List[int]) -> CategorySummary:
        mean = mean_report(reports[k] for k in indices)
        return CategorySummary(
            category=label,
            segments=len(indices),
            distance_km=sum(trajectory_distance(records[k]) for k in indices) / 1000.0,
            duration_h=sum(trajectory_duration(records[k]) for k in indices) / 3600.0,
            anomaly_accel_pct=mean.anomaly_accel_pct,
            anomaly_jerk_pct=mean.anomaly_jerk_pct,
            anomaly_inversion_pct=mean.anomaly_inversion_pct,
        )

    rows = [row(category.value, grouped[category]) for category in InteractionCategory if grouped.get(category)]
    if records:
        rows.append(row("All", list(range(len(records)))))
    return rows
