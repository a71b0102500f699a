"""Exception hierarchy for the trajectory interaction miner.

Every domain error derives from ``TrajectoryMinerError`` (itself a
``ValueError``) so callers can catch the family in one place. The CLI maps
the families onto exit codes in ``main.py``.
"""

from typing import Optional


class TrajectoryMinerError(ValueError):
    """Base class for all domain errors."""


# ============================================================
# CONFIGURATION & INPUT
# ============================================================

class ConfigError(TrajectoryMinerError):
    """Parameter file unreadable, unknown key, or invariant violated."""

    def __init__(self, message: str, key_path: str = ""):
        self.key_path = key_path
        super().__init__(f"{key_path}: {message}" if key_path else message)


class ParseError(TrajectoryMinerError):
    """Interchange document is not well-formed structured text."""

    def __init__(self, message: str, source: str = "<stream>", line: Optional[int] = None):
        self.source = source
        self.line = line
        location = f"{source}:{line}" if line is not None else source
        super().__init__(f"{location}: {message}")


class SchemaError(TrajectoryMinerError):
    """Interchange document parsed but violates the segment schema."""

    def __init__(
        self,
        message: str,
        source: str = "<stream>",
        segment_id: Optional[str] = None,
        document_index: Optional[int] = None,
    ):
        self.source = source
        self.segment_id = segment_id
        self.document_index = document_index
        context = source
        if document_index is not None:
            context += f"[{document_index}]"
        if segment_id is not None:
            context += f" (segment {segment_id})"
        super().__init__(f"{context}: {message}")


class InfeasibleSpec(TrajectoryMinerError):
    """Scenario spec cannot produce a segment satisfying its category."""


class NoValidSegments(TrajectoryMinerError):
    """Input set contained no usable segment."""


class InsufficientData(TrajectoryMinerError):
    """Too few trajectories for the requested operation."""


# ============================================================
# NUMERICS
# ============================================================

class DegenerateFit(TrajectoryMinerError):
    """Least-squares trajectory fit is rank-deficient (stationary segment)."""


class ZeroLengthVector(TrajectoryMinerError):
    """Direction vector with zero norm."""


class TooShort(TrajectoryMinerError):
    """Series shorter than the operation requires."""


class ConfigInfeasible(TrajectoryMinerError):
    """Wavelet depth exceeds what the signal length supports."""


class NonPositiveGap(TrajectoryMinerError):
    """IDM gap to the stop line is zero or negative."""


class LengthMismatch(TrajectoryMinerError):
    """Paired series differ in length."""


class EmptyInput(TrajectoryMinerError):
    """Operation received no data."""


class AllSamplesInvalid(TrajectoryMinerError):
    """No sample survived filtering."""


class NoSigns(TrajectoryMinerError):
    """Segment has no stop signs."""
