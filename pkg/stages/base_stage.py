"""Base Stage class with common functionality."""

from abc import ABC, abstractmethod
from typing import Any, Dict, Optional
import logging

from utils.logger import StructuredLogger

logger = logging.getLogger(__name__)


class BaseStage(ABC):
    """Abstract base class for all pipeline stages."""

    def __init__(
        self,
        stage_name: str,
        structured_logger: Optional[StructuredLogger] = None
    ):
        """Initialize base stage.

        Args:
            stage_name: Name of the stage
            structured_logger: Logger instance
        """
        self.stage_name = stage_name
        self.structured_logger = structured_logger

        logger.debug(f"Initialized {self.stage_name}")

    @abstractmethod
    def execute(self, **kwargs) -> Any:
        """Run the stage.

        Must be implemented by subclasses.
        """
        pass

    def _log_event(
        self,
        event_type: str,
        data: Dict[str, Any],
        status: str = "success"
    ):
        """Log an event to the structured log and the standard logger.

        Args:
            event_type: Type of event
            data: Event data
            status: Event status
        """
        if self.structured_logger:
            self.structured_logger.log_stage_execution(
                stage_name=self.stage_name,
                event_type=event_type,
                data=data,
                status=status
            )

        level = logging.WARNING if status == "error" else logging.INFO
        logger.log(level, f"[{self.stage_name}] {event_type}: {status}")

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(name={self.stage_name})"
