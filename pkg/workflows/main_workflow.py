"""Main orchestrator that runs the pipeline flows behind each CLI command."""

from collections import Counter
from pathlib import Path
from typing import List, Optional, Sequence, Union
import logging
import time

import pandas as pd

from config.settings import ParameterBundle
from stages.calibration_stage import CalibrationReport, CalibrationStage
from stages.classifier_stage import ClassifierStage
from stages.enhancement_stage import EnhancementStage
from stages.quality_stage import QualityStage, category_means
from utils.data_processors import (
    FLOAT_FORMAT,
    discover_segment_files,
    discover_trajectory_files,
    read_segments_with_report,
    read_trajectory_csv,
    safe_file_stem,
    trajectory_csv_path,
    write_json,
    write_segments,
    write_table,
    write_trajectory_csv,
)
from utils.exceptions import NoValidSegments
from utils.logger import StructuredLogger
from utils.parallel import ordered_map
from utils.scenario_generator import default_specs, generate, load_scenario_specs
from utils.validators import InteractionCategory, RunManifest, Segment, TrajectoryRecord

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class PipelineOrchestrator:
    """Orchestrator that wires the stages into the extract/enhance/assess/calibrate/synth flows."""

    def __init__(
        self,
        bundle: Optional[ParameterBundle] = None,
        structured_logger: Optional[StructuredLogger] = None,
        jobs: Optional[int] = 1,
        strict: bool = False,
        config_path: Optional[PathLike] = None,
    ):
        """Initialize orchestrator.

        Args:
            bundle: Validated parameters (defaults when None)
            structured_logger: Shared event log
            jobs: Worker processes for per-segment work
            strict: Treat any invalid input segment as fatal
            config_path: Config file the bundle came from, for manifests
        """
        self.bundle = bundle or ParameterBundle()
        self.structured_logger = structured_logger or StructuredLogger()
        self.jobs = jobs
        self.strict = strict
        self.config_path = str(config_path) if config_path else None

        self.classifier = ClassifierStage(
            self.bundle.light, self.bundle.sign, structured_logger=self.structured_logger
        )
        self.quality = QualityStage(self.bundle.quality, structured_logger=self.structured_logger)
        self.enhancer = EnhancementStage(
            self.bundle.denoise, self.bundle.quality, structured_logger=self.structured_logger
        )
        self.calibrator = CalibrationStage(self.bundle.calibration, structured_logger=self.structured_logger)

        logger.info("Orchestrator initialized with all stages")

    def _log(self, event_type: str, data: dict, status: str = "success"):
        self.structured_logger.log_stage_execution("PipelineOrchestrator", event_type, data, status)

    # ============================================================
    # EXTRACT
    # ============================================================

    def extract(self, inputs: Sequence[PathLike], outdir: PathLike) -> RunManifest:
        """Classify every input segment and write per-category trajectory CSVs.

        Args:
            inputs: Interchange files or directories
            outdir: Output root

        Returns:
            RunManifest (also written to ``manifest.json``)

        Raises:
            FileNotFoundError: an input path is missing
            NoValidSegments: nothing valid to classify
        """
        started = time.perf_counter()
        outdir = Path(outdir)
        files = discover_segment_files(inputs)
        logger.info(f"Reading {len(files)} interchange files")

        segments: List[Segment] = []
        issues: List[str] = []
        for path in files:
            found, problems = read_segments_with_report(path, strict=self.strict)
            segments.extend(found)
            issues.extend(problems)
        if not segments:
            self._log("extract_no_segments", {"files": len(files), "issues": len(issues)}, status="error")
            raise NoValidSegments(f"no valid segments in {len(files)} input files")

        records = self.classifier.execute(segments, jobs=self.jobs)
        classified = [r for r in records if r.category != InteractionCategory.NONE]
        self._write_trajectories(classified, outdir, enhanced=False)

        reports, summary = self.quality.execute(classified)
        write_table(summary, outdir / "summary.csv", title="Interaction trajectories")

        counts = Counter(r.category.value for r in records)
        manifest = RunManifest(
            command="extract",
            inputs=[str(p) for p in inputs],
            config_path=self.config_path,
            output_dir=str(outdir),
            total_segments=len(records),
            category_counts={c.value: counts[c.value] for c in InteractionCategory if counts[c.value]},
            quality_before=category_means(classified, reports),
            issues=issues,
            wall_time_s=round(time.perf_counter() - started, 3),
        )
        write_json(manifest, outdir / "manifest.json")
        self._log("extract_complete", {"segments": len(records), "classified": len(classified)})
        return manifest

    def _write_trajectories(self, records: List[TrajectoryRecord], outdir: Path, enhanced: bool):
        written = set()
        for record in records:
            path = trajectory_csv_path(outdir, record, enhanced=enhanced)
            if path in written:
                logger.warning(f"Duplicate segment id {record.segment_id}; {path} overwritten")
            write_trajectory_csv(record, path)
            written.add(path)
        logger.info(f"Wrote {len(written)} trajectory files under {outdir}")

    def _read_trajectories(self, directory: PathLike, enhanced: bool) -> List[TrajectoryRecord]:
        files = discover_trajectory_files(directory, enhanced=enhanced)
        records = [read_trajectory_csv(path) for path in files]
        if not records:
            raise NoValidSegments(f"no trajectory files in {directory}")
        return records

    # ============================================================
    # ENHANCE & ASSESS
    # ============================================================

    def enhance(self, trajectory_dir: PathLike, outdir: Optional[PathLike] = None) -> RunManifest:
        """Denoise every trajectory and write ``_enhanced`` siblings plus a before/after table."""
        started = time.perf_counter()
        outdir = Path(outdir or trajectory_dir)
        records = self._read_trajectories(trajectory_dir, enhanced=False)

        enhanced, pairs, comparisons = self.enhancer.execute(records, jobs=self.jobs)
        self._write_trajectories(enhanced, outdir, enhanced=True)
        write_table(comparisons, outdir / "enhancement_summary.csv", title="Before and after denoising")

        counts = Counter(r.category.value for r in records)
        manifest = RunManifest(
            command="enhance",
            inputs=[str(trajectory_dir)],
            config_path=self.config_path,
            output_dir=str(outdir),
            total_segments=len(records),
            category_counts=dict(counts),
            quality_before=category_means(records, [p[0] for p in pairs]),
            quality_after=category_means(enhanced, [p[1] for p in pairs]),
            wall_time_s=round(time.perf_counter() - started, 3),
        )
        write_json(manifest, outdir / "enhance_manifest.json")
        return manifest

    def assess(self, trajectory_dir: PathLike, enhanced: bool = False, outdir: Optional[PathLike] = None) -> RunManifest:
        """Recompute the quality summary for a trajectory directory."""
        started = time.perf_counter()
        outdir = Path(outdir or trajectory_dir)
        records = self._read_trajectories(trajectory_dir, enhanced=enhanced)

        reports, summary = self.quality.execute(records)
        name = "quality_summary_enhanced.csv" if enhanced else "quality_summary.csv"
        write_table(summary, outdir / name, title="Trajectory quality")

        manifest = RunManifest(
            command="assess",
            inputs=[str(trajectory_dir)],
            config_path=self.config_path,
            output_dir=str(outdir),
            total_segments=len(records),
            category_counts=dict(Counter(r.category.value for r in records)),
            quality_before={} if enhanced else category_means(records, reports),
            quality_after=category_means(records, reports) if enhanced else {},
            wall_time_s=round(time.perf_counter() - started, 3),
        )
        write_json(manifest, outdir / "assess_manifest.json")
        return manifest

    # ============================================================
    # CALIBRATE
    # ============================================================

    def calibrate(
        self,
        trajectory_dir: PathLike,
        outdir: Optional[PathLike] = None,
        enhanced: bool = False,
    ) -> CalibrationReport:
        """Fit IDM on LightStop trajectories; write the report and speed comparisons."""
        outdir = Path(outdir or trajectory_dir)
        records = self._read_trajectories(trajectory_dir, enhanced=enhanced)

        report = self.calibrator.execute(records)
        write_json(report, outdir / "calibration.json")

        comparison_dir = outdir / "speed_comparison"
        comparison_dir.mkdir(parents=True, exist_ok=True)
        for segment_id, frame in self.calibrator.speed_comparisons(records, report).items():
            frame.to_csv(
                comparison_dir / f"{safe_file_stem(segment_id)}.csv",
                index=False, float_format=FLOAT_FORMAT, na_rep="", lineterminator="\n",
            )
        logger.info(
            f"Calibrated on {report.result.n_calibration_trajectories} trajectories: "
            f"RMSE {report.result.rmse_calibration:.4f} (validation {report.result.rmse_validation})"
        )
        return report

    # ============================================================
    # SYNTH
    # ============================================================

    def synth(
        self,
        outdir: PathLike,
        spec_file: Optional[PathLike] = None,
        per_category: int = 25,
        seed: int = 0,
    ) -> int:
        """Write labeled synthetic segments, one interchange file each, plus ``labels.csv``.

        Raises:
            InfeasibleSpec: a recipe cannot produce its category
        """
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        specs = load_scenario_specs(spec_file) if spec_file else default_specs(per_category, seed)
        generated = ordered_map(generate, specs, self.jobs)

        for segment, _ in generated:
            write_segments([segment], outdir / f"{safe_file_stem(segment.id)}.json")

        labels = pd.DataFrame([
            {
                "segment_id": segment.id,
                "category": category.value,
                "approach_speed": spec.approach_speed,
                "seed": spec.seed,
            }
            for spec, (segment, category) in zip(specs, generated)
        ], columns=["segment_id", "category", "approach_speed", "seed"])
        labels.to_csv(outdir / "labels.csv", index=False, float_format=FLOAT_FORMAT, lineterminator="\n")

        self._log("synth_complete", {"segments": len(generated), "output_dir": str(outdir)})
        return len(generated)
