"""Main entry point for the trajectory interaction miner."""

import argparse
import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import List, Optional

from config.settings import load_params, resolve_config_path
from utils.exceptions import (
    AllSamplesInvalid,
    ConfigError,
    ConfigInfeasible,
    EmptyInput,
    InfeasibleSpec,
    InsufficientData,
    NoValidSegments,
    ParseError,
    SchemaError,
)
from utils.logger import StructuredLogger
from workflows.main_workflow import PipelineOrchestrator

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_NO_DATA = 3


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="YAML parameter file (default: $TIM_CONFIG)")
    common.add_argument("--jobs", type=int, default=None, help="Worker processes (default: all cores)")
    common.add_argument("--strict", action="store_true", help="Abort on the first invalid segment")
    common.add_argument("--log-dir", type=str, default="logs", help="Directory for run logs")

    parser = argparse.ArgumentParser(
        description="Trajectory interaction miner - select, organize, assess and enhance "
                    "vehicle interactions with traffic lights and stop signs"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    extract = commands.add_parser("extract", parents=[common], help="Classify segments and write trajectories")
    extract.add_argument("inputs", nargs="+", help="Interchange files or directories")
    extract.add_argument("--out", type=str, default="output", help="Output directory")

    enhance = commands.add_parser("enhance", parents=[common], help="Denoise trajectories")
    enhance.add_argument("trajectory_dir", help="Directory written by extract")
    enhance.add_argument("--out", type=str, default=None, help="Output directory (default: trajectory_dir)")

    assess = commands.add_parser("assess", parents=[common], help="Recompute the quality summary")
    assess.add_argument("trajectory_dir", help="Directory written by extract")
    assess.add_argument("--enhanced", action="store_true", help="Assess the _enhanced trajectories")
    assess.add_argument("--out", type=str, default=None, help="Output directory (default: trajectory_dir)")

    calibrate = commands.add_parser("calibrate", parents=[common], help="Calibrate IDM on LightStop trajectories")
    calibrate.add_argument("trajectory_dir", help="Directory written by extract")
    calibrate.add_argument("--enhanced", action="store_true", help="Use the _enhanced trajectories")
    calibrate.add_argument("--seed", type=int, default=None, help="Override the calibration seed")
    calibrate.add_argument("--out", type=str, default=None, help="Output directory (default: trajectory_dir)")

    synth = commands.add_parser("synth", parents=[common], help="Generate labeled synthetic segments")
    synth.add_argument("spec_file", nargs="?", default=None, help="YAML scenario list (default: every category)")
    synth.add_argument("--per-category", type=int, default=25, help="Scenes per category without a spec file")
    synth.add_argument("--seed", type=int, default=0, help="First seed without a spec file")
    synth.add_argument("--out", type=str, default="synthetic", help="Output directory")

    return parser


def run(args: argparse.Namespace, structured_logger: StructuredLogger) -> None:
    config_path = resolve_config_path(args.config)
    bundle = load_params(config_path)
    if args.command == "calibrate" and args.seed is not None:
        bundle = bundle.model_copy(update={
            "calibration": bundle.calibration.model_copy(update={"seed": args.seed})
        })

    orchestrator = PipelineOrchestrator(
        bundle=bundle,
        structured_logger=structured_logger,
        jobs=args.jobs,
        strict=args.strict,
        config_path=config_path,
    )

    if args.command == "extract":
        manifest = orchestrator.extract(args.inputs, args.out)
        logger.info(f"Classified {manifest.total_segments} segments: {manifest.category_counts}")
    elif args.command == "enhance":
        manifest = orchestrator.enhance(args.trajectory_dir, args.out)
        logger.info(f"Enhanced {manifest.total_segments} trajectories")
    elif args.command == "assess":
        manifest = orchestrator.assess(args.trajectory_dir, enhanced=args.enhanced, outdir=args.out)
        logger.info(f"Assessed {manifest.total_segments} trajectories")
    elif args.command == "calibrate":
        report = orchestrator.calibrate(args.trajectory_dir, args.out, enhanced=args.enhanced)
        logger.info(f"Best parameters: {report.result.best.model_dump()}")
    elif args.command == "synth":
        count = orchestrator.synth(args.out, args.spec_file, args.per_category, args.seed)
        logger.info(f"Generated {count} segments in {args.out}")


def main(argv: Optional[List[str]] = None) -> int:
    """Main execution function; returns the process exit code."""
    args = build_parser().parse_args(argv)

    if args.jobs is not None and args.jobs < 1:
        logger.error("--jobs must be at least 1")
        return EXIT_CONFIG

    log_dir = Path(args.log_dir)
    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    log_file = log_dir / f"run_{timestamp}.json"
    structured_logger = StructuredLogger(log_file=str(log_file))

    logger.info("=" * 60)
    logger.info(f"TRAJECTORY INTERACTION MINER - {args.command}")
    logger.info("=" * 60)

    code = EXIT_OK
    try:
        run(args, structured_logger)
    except (ConfigError, ConfigInfeasible, InfeasibleSpec) as e:
        logger.error(f"Configuration error: {e}")
        code = EXIT_CONFIG
    except (ParseError, SchemaError, OSError) as e:
        logger.error(f"Input/output error: {e}")
        code = EXIT_IO
    except (NoValidSegments, InsufficientData, EmptyInput, AllSamplesInvalid) as e:
        logger.error(f"Not enough data: {e}")
        code = EXIT_NO_DATA
    finally:
        structured_logger.log_stage_execution("main", "run_finished", {"command": args.command, "exit_code": code})
        structured_logger.save_logs(str(log_file))
        structured_logger.close()

    return code


if __name__ == "__main__":
    sys.exit(main())
