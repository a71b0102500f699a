"""Quality Stage - anomaly metrics per trajectory and per category."""

from typing import Dict, List, Tuple

from stages.base_stage import BaseStage
from utils.quality_metrics import mean_report, quality_report, summarize_by_category
from utils.validators import CategorySummary, QualityReport, QualityThresholds, TrajectoryRecord


def category_means(records: List[TrajectoryRecord], reports: List[QualityReport]) -> Dict[str, QualityReport]:
    """Mean report per category value, in first-seen order."""
    grouped: Dict[str, List[QualityReport]] = {}
    for record, report in zip(records, reports):
        grouped.setdefault(record.category.value, []).append(report)
    return {category: mean_report(items) for category, items in grouped.items()}


class QualityStage(BaseStage):
    """Stage that scores trajectories against the kinematic bands."""

    def __init__(self, thresholds: QualityThresholds, **kwargs):
        super().__init__(stage_name="QualityStage", **kwargs)
        self.thresholds = thresholds

    def execute(
        self,
        records: List[TrajectoryRecord],
    ) -> Tuple[List[QualityReport], List[CategorySummary]]:
        """Score every record and build the summary table.

        Args:
            records: Organized trajectories

        Returns:
            (per-record reports, summary rows ending with ``All``)
        """
        reports = [quality_report(record, self.thresholds) for record in records]
        summary = summarize_by_category(records, reports)

        overall = mean_report(reports)
        self._log_event("quality_assessed", {
            "trajectories": len(records),
            "mean_accel_pct": round(overall.anomaly_accel_pct, 4),
            "mean_jerk_pct": round(overall.anomaly_jerk_pct, 4),
            "mean_inversion_pct": round(overall.anomaly_inversion_pct, 4),
        })
        return reports, summary
