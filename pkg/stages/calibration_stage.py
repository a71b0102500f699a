"""Calibration Stage - IDM fit on stop-at-light trajectories."""

from typing import Dict, List, Optional

import pandas as pd
from pydantic import BaseModel

from stages.base_stage import BaseStage
from utils.exceptions import InsufficientData
from utils.idm import calibrate, speed_comparison, split_trajectories
from utils.validators import CalibrationResult, CalibrationSpec, InteractionCategory, TrajectoryRecord


class CalibrationReport(BaseModel):
    """Calibration outcome plus the split that produced it."""
    result: CalibrationResult
    calibration_ids: List[str]
    validation_ids: List[str]
    seed: int
    n_samples: int
    objective: str
    exclude_dwell: bool


class CalibrationStage(BaseStage):
    """Stage that splits LightStop trajectories and fits IDM parameters."""

    def __init__(self, spec: CalibrationSpec, **kwargs):
        super().__init__(stage_name="CalibrationStage", **kwargs)
        self.spec = spec

    def execute(self, records: List[TrajectoryRecord]) -> CalibrationReport:
        """Calibrate on a seeded split and validate on the rest.

        Args:
            records: Organized trajectories; only LightStop ones are used

        Returns:
            CalibrationReport

        Raises:
            InsufficientData: fewer than two LightStop trajectories
        """
        stops = [r for r in records if r.category == InteractionCategory.LIGHT_STOP]
        if len(stops) < 2:
            self._log_event("calibration_rejected", {"light_stop_trajectories": len(stops)}, status="error")
            raise InsufficientData(f"calibration needs at least 2 LightStop trajectories, found {len(stops)}")

        train, held_out = split_trajectories(stops, self.spec.calibration_fraction, self.spec.seed)
        self._log_event("calibration_start", {
            "calibration": len(train),
            "validation": len(held_out),
            "n_samples": self.spec.n_samples,
            "objective": self.spec.objective,
        })

        result = calibrate(train, self.spec, validation=held_out)
        self._log_event("calibration_complete", {
            "best": result.best.model_dump(),
            "rmse_calibration": result.rmse_calibration,
            "rmse_validation": result.rmse_validation,
        })
        return CalibrationReport(
            result=result,
            calibration_ids=[r.segment_id for r in train],
            validation_ids=[r.segment_id for r in held_out],
            seed=self.spec.seed,
            n_samples=self.spec.n_samples,
            objective=self.spec.objective,
            exclude_dwell=self.spec.exclude_dwell,
        )

    def speed_comparisons(
        self,
        records: List[TrajectoryRecord],
        report: CalibrationReport,
        only: Optional[List[str]] = None,
    ) -> Dict[str, pd.DataFrame]:
        """Observed versus modeled speed tables keyed by segment id."""
        wanted = set(only) if only is not None else None
        return {
            r.segment_id: speed_comparison(r, report.result.best)
            for r in records
            if r.category == InteractionCategory.LIGHT_STOP and (wanted is None or r.segment_id in wanted)
        }
