"""Segment ingestion, trajectory CSV emission and report tables."""

import io
import json
import logging
import re
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, TextIO, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, ValidationError
from rich.console import Console
from rich.table import Table

from utils.exceptions import ParseError, SchemaError
from utils.validators import (
    InteractionCategory,
    Segment,
    StopSign,
    TimeStep,
    TrafficLightTrack,
    TrajectoryRecord,
    TrajectoryRow,
    validate_segment,
)

logger = logging.getLogger(__name__)

Source = Union[str, Path, TextIO]

TRAJECTORY_COLUMNS = [
    "index", "x", "y", "v", "a", "light_state", "dist_to_stop_line", "dist_to_sign",
]
FLOAT_FORMAT = "%.6f"
ENHANCED_SUFFIX = "_enhanced"


# ============================================================
# INTERCHANGE DOCUMENTS
# ============================================================

class StepDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    t_index: int
    x: float
    y: float
    v: float


class LightDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    stop_line: Tuple[float, float]
    states: List[int]


class SegmentDocument(BaseModel):
    """One segment as stored in an interchange file."""
    model_config = ConfigDict(extra="forbid")

    id: str
    steps: List[StepDocument]
    lights: List[LightDocument] = []
    signs: List[Tuple[float, float]] = []

    def to_segment(self) -> Segment:
        return Segment(
            id=self.id,
            steps=tuple(TimeStep(index=s.t_index, position=(s.x, s.y), speed=s.v) for s in self.steps),
            lights=tuple(TrafficLightTrack(stop_line=l.stop_line, states=tuple(l.states)) for l in self.lights),
            signs=tuple(StopSign(position=p) for p in self.signs),
        )


def segment_to_document(segment: Segment) -> Dict[str, Any]:
    """Plain dict in interchange layout."""
    return {
        "id": segment.id,
        "steps": [
            {"t_index": s.index, "x": s.position[0], "y": s.position[1], "v": s.speed}
            for s in segment.steps
        ],
        "lights": [
            {"stop_line": list(light.stop_line), "states": list(light.states)}
            for light in segment.lights
        ],
        "signs": [list(sign.position) for sign in segment.signs],
    }


def _read_text(source: Source) -> Tuple[str, str]:
    if hasattr(source, "read"):
        return source.read(), getattr(source, "name", "<stream>")
    path = Path(source)
    return path.read_text(), str(path)


def _describe(error: ValidationError) -> str:
    first = error.errors()[0]
    location = ".".join(str(part) for part in first["loc"])
    more = f" (+{error.error_count() - 1} more)" if error.error_count() > 1 else ""
    return f"{location}: {first['msg']}{more}"


def read_segments_with_report(source: Source, strict: bool = False) -> Tuple[List[Segment], List[str]]:
    """Parse one interchange file or stream.

    Args:
        source: Path or text stream holding one document or an array of them
        strict: Raise on the first invalid document instead of skipping it

    Returns:
        (valid segments in input order, messages for skipped documents)

    Raises:
        ParseError: the text is not valid JSON
        SchemaError: invalid document while ``strict``
    """
    text, name = _read_text(source)
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, source=name, line=e.lineno) from e

    documents = payload if isinstance(payload, list) else [payload]
    segments: List[Segment] = []
    issues: List[str] = []

    for k, document in enumerate(documents):
        segment_id = document.get("id") if isinstance(document, dict) else None
        try:
            segment = SegmentDocument.model_validate(document).to_segment()
            violations = validate_segment(segment)
            if violations:
                detail = "; ".join(
                    f"{v.field}" + (f"[{v.index}]" if v.index is not None else "") + f": {v.message}"
                    for v in violations[:5]
                )
                raise SchemaError(detail, source=name, segment_id=segment.id, document_index=k)
        except ValidationError as e:
            error = SchemaError(_describe(e), source=name, segment_id=segment_id, document_index=k)
        except SchemaError as e:
            error = e
        else:
            segments.append(segment)
            continue

        if strict:
            raise error
        logger.warning(f"Skipping invalid segment: {error}")
        issues.append(str(error))

    return segments, issues


def read_segments(source: Source, strict: bool = False) -> List[Segment]:
    """Valid segments from an interchange file or stream."""
    segments, _ = read_segments_with_report(source, strict=strict)
    return segments


def write_segments(segments: Sequence[Segment], sink: Union[str, Path, TextIO]):
    """Write one document (single segment) or a document array."""
    documents = [segment_to_document(s) for s in segments]
    payload = documents[0] if len(documents) == 1 else documents
    text = json.dumps(payload, indent=2) + "\n"
    if hasattr(sink, "write"):
        sink.write(text)
        return
    Path(sink).parent.mkdir(parents=True, exist_ok=True)
    with open(sink, "w", newline="\n") as f:
        f.write(text)


def discover_segment_files(inputs: Iterable[Union[str, Path]]) -> List[Path]:
    """Interchange files named by ``inputs`` (directories searched recursively).

    Raises:
        FileNotFoundError: an input path does not exist
    """
    files: List[Path] = []
    for item in inputs:
        path = Path(item)
        if path.is_dir():
            files.extend(sorted(path.rglob("*.json")))
        elif path.is_file():
            files.append(path)
        else:
            raise FileNotFoundError(f"input not found: {path}")
    return files


# ============================================================
# TRAJECTORY CSV
# ============================================================

def _round6(point: Optional[Tuple[float, float]]) -> Optional[List[float]]:
    return None if point is None else [round(float(point[0]), 6), round(float(point[1]), 6)]


def record_to_frame(record: TrajectoryRecord) -> pd.DataFrame:
    """Table-shaped view of a record; absent context becomes NA."""
    frame = pd.DataFrame([row.model_dump() for row in record.rows], columns=TRAJECTORY_COLUMNS)
    frame["index"] = frame["index"].astype("int64")
    frame["light_state"] = frame["light_state"].astype("Int64")
    for column in ("x", "y", "v", "a", "dist_to_stop_line", "dist_to_sign"):
        frame[column] = frame[column].astype(float)
    return frame


def write_trajectory_csv(record: TrajectoryRecord, sink: Union[str, Path, TextIO]):
    """Write a metadata comment line, the header and one row per timestep.

    Floats use six decimals, nulls are empty cells, lines end with ``\\n``.
    """
    meta = {
        "segment_id": record.segment_id,
        "category": record.category.value,
        "stop_line": _round6(record.stop_line),
        "initial_sign": _round6(record.initial_sign),
    }
    body = record_to_frame(record).to_csv(
        index=False, float_format=FLOAT_FORMAT, na_rep="", lineterminator="\n"
    )
    text = "# " + json.dumps(meta, sort_keys=True) + "\n" + body
    if hasattr(sink, "write"):
        sink.write(text)
        return
    Path(sink).parent.mkdir(parents=True, exist_ok=True)
    with open(sink, "w", newline="\n") as f:
        f.write(text)


def _optional(value: Any, cast):
    return None if value is None or pd.isna(value) else cast(value)


def read_trajectory_csv(source: Source) -> TrajectoryRecord:
    """Parse a trajectory CSV written by ``write_trajectory_csv``."""
    text, name = _read_text(source)
    first, _, body = text.partition("\n")
    if not first.startswith("# "):
        raise ParseError("missing metadata comment line", source=name, line=1)
    try:
        meta = json.loads(first[2:])
    except json.JSONDecodeError as e:
        raise ParseError(f"bad metadata: {e.msg}", source=name, line=1) from e

    if not isinstance(meta, dict):
        raise ParseError("metadata must be a JSON object", source=name, line=1)

    try:
        frame = pd.read_csv(io.StringIO(body), dtype={"light_state": "Int64"})
    except (TypeError, ValueError) as e:
        raise ParseError(str(e), source=name, line=2) from e
    if list(frame.columns) != TRAJECTORY_COLUMNS:
        raise ParseError(f"unexpected columns {list(frame.columns)}", source=name, line=2)

    try:
        rows = tuple(
            TrajectoryRow(
                index=int(r["index"]),
                x=float(r["x"]),
                y=float(r["y"]),
                v=float(r["v"]),
                a=float(r["a"]),
                light_state=_optional(r["light_state"], int),
                dist_to_stop_line=_optional(r["dist_to_stop_line"], float),
                dist_to_sign=_optional(r["dist_to_sign"], float),
            )
            for r in frame.to_dict("records")
        )
        return TrajectoryRecord(
            segment_id=meta["segment_id"],
            category=InteractionCategory(meta["category"]),
            stop_line=tuple(meta["stop_line"]) if meta.get("stop_line") else None,
            initial_sign=tuple(meta["initial_sign"]) if meta.get("initial_sign") else None,
            rows=rows,
        )
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(str(e), source=name, segment_id=meta.get("segment_id")) from e


def safe_file_stem(segment_id: str) -> str:
    """Segment id made safe for use as a file name."""
    return re.sub(r"[^A-Za-z0-9._-]", "_", segment_id)


def trajectory_csv_path(outdir: Union[str, Path], record: TrajectoryRecord, enhanced: bool = False) -> Path:
    """``<outdir>/<Category>/<segment id>[_enhanced].csv``."""
    suffix = ENHANCED_SUFFIX if enhanced else ""
    return Path(outdir) / record.category.value / f"{safe_file_stem(record.segment_id)}{suffix}.csv"


def discover_trajectory_files(directory: Union[str, Path], enhanced: bool = False) -> List[Path]:
    """Trajectory CSVs in the per-category subdirectories, sorted by path.

    Raises:
        FileNotFoundError: ``directory`` does not exist
    """
    root = Path(directory)
    if not root.is_dir():
        raise FileNotFoundError(f"trajectory directory not found: {root}")
    categories = {c.value for c in InteractionCategory}
    files = [
        path for path in root.glob("*/*.csv")
        if path.parent.name in categories and path.stem.endswith(ENHANCED_SUFFIX) == enhanced
    ]
    return sorted(files, key=str)


# ============================================================
# REPORT TABLES
# ============================================================

def models_to_frame(rows: Sequence[BaseModel]) -> pd.DataFrame:
    return pd.DataFrame([row.model_dump() for row in rows])


def render_table(frame: pd.DataFrame, title: str) -> str:
    """Aligned plain-text rendering of a table."""
    table = Table(title=title)
    for column in frame.columns:
        numeric = pd.api.types.is_numeric_dtype(frame[column])
        table.add_column(str(column), justify="right" if numeric else "left")
    for values in frame.itertuples(index=False):
        table.add_row(*[
            "" if pd.isna(v) else f"{v:.4f}" if isinstance(v, (float, np.floating)) else str(v)
            for v in values
        ])
    console = Console(record=True, width=240, file=io.StringIO(), color_system=None)
    console.print(table)
    return console.export_text()


def write_table(rows: Sequence[BaseModel], csv_path: Union[str, Path], title: str) -> pd.DataFrame:
    """Write ``rows`` as CSV and as an aligned ``.txt`` twin."""
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    frame = models_to_frame(rows)
    frame.to_csv(csv_path, index=False, float_format="%.4f", lineterminator="\n")
    with open(csv_path.with_suffix(".txt"), "w", newline="\n") as f:
        f.write(render_table(frame, title))
    logger.info(f"Table saved to {csv_path}")
    return frame


def write_json(model: BaseModel, path: Union[str, Path]):
    """Serialize a pydantic model to indented JSON."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as f:
        f.write(model.model_dump_json(indent=2) + "\n")
