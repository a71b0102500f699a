"""Enhancement Stage - wavelet denoising with before/after comparison."""

from functools import partial
from typing import List, Optional, Tuple

from stages.base_stage import BaseStage
from utils.parallel import ordered_map
from utils.quality_metrics import mean_report, quality_report
from utils.signal_processing import denoise_trajectory
from utils.validators import (
    DenoiseConfig,
    EnhancementComparison,
    InteractionCategory,
    QualityReport,
    QualityThresholds,
    TrajectoryRecord,
)

_OTHER_READING = {"rederive": "independent", "independent": "rederive"}


def enhance_record(
    record: TrajectoryRecord,
    config: DenoiseConfig,
    thresholds: QualityThresholds,
) -> Tuple[TrajectoryRecord, QualityReport, QualityReport, QualityReport]:
    """Denoise one record and score it before, after and under the other acceleration reading."""
    alternate = config.model_copy(update={"acceleration": _OTHER_READING[config.acceleration]})
    enhanced = denoise_trajectory(record, config)
    return (
        enhanced,
        quality_report(record, thresholds),
        quality_report(enhanced, thresholds),
        quality_report(denoise_trajectory(record, alternate), thresholds),
    )


def _comparison_row(label: str, before, after, alt) -> EnhancementComparison:
    b, a, x = mean_report(before), mean_report(after), mean_report(alt)
    return EnhancementComparison(
        category=label,
        segments=len(before),
        before_accel_pct=b.anomaly_accel_pct,
        before_jerk_pct=b.anomaly_jerk_pct,
        before_inversion_pct=b.anomaly_inversion_pct,
        after_accel_pct=a.anomaly_accel_pct,
        after_jerk_pct=a.anomaly_jerk_pct,
        after_inversion_pct=a.anomaly_inversion_pct,
        after_jerk_pct_alt=x.anomaly_jerk_pct,
        after_inversion_pct_alt=x.anomaly_inversion_pct,
    )


class EnhancementStage(BaseStage):
    """Stage that denoises trajectories and reports the anomaly change."""

    def __init__(self, config: DenoiseConfig, thresholds: QualityThresholds, **kwargs):
        super().__init__(stage_name="EnhancementStage", **kwargs)
        self.config = config
        self.thresholds = thresholds

    def execute(
        self,
        records: List[TrajectoryRecord],
        jobs: Optional[int] = 1,
    ) -> Tuple[List[TrajectoryRecord], List[Tuple[QualityReport, QualityReport]], List[EnhancementComparison]]:
        """Denoise every record.

        Returns:
            (enhanced records, (before, after) report pairs, comparison rows
            per category plus ``All``)
        """
        self._log_event("enhancement_start", {
            "trajectories": len(records),
            "wavelet": self.config.wavelet,
            "levels": self.config.levels,
            "acceleration": self.config.acceleration,
        })

        worker = partial(enhance_record, config=self.config, thresholds=self.thresholds)
        results = ordered_map(worker, records, jobs)

        comparisons: List[EnhancementComparison] = []
        for category in InteractionCategory:
            picked = [r for rec, r in zip(records, results) if rec.category == category]
            if picked:
                comparisons.append(_comparison_row(
                    category.value, [p[1] for p in picked], [p[2] for p in picked], [p[3] for p in picked]
                ))
        if results:
            comparisons.append(_comparison_row(
                "All", [p[1] for p in results], [p[2] for p in results], [p[3] for p in results]
            ))

        if comparisons:
            total = comparisons[-1]
            self._log_event("enhancement_complete", {
                "jerk_pct": [round(total.before_jerk_pct, 4), round(total.after_jerk_pct, 4)],
                "inversion_pct": [round(total.before_inversion_pct, 4), round(total.after_inversion_pct, 4)],
            })
        return [p[0] for p in results], [(p[1], p[2]) for p in results], comparisons
