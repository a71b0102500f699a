"""Structured logging utility."""

import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional


class StructuredLogger:
    """JSON event log for pipeline runs.

    Events are kept in memory and written once with ``save_logs``. Human
    readable lines go through the standard ``logging`` tree.
    """

    def __init__(self, log_file: Optional[str] = None, level: str = "INFO"):
        self.logger = logging.getLogger("trajectory_miner")
        self.logger.setLevel(getattr(logging, level.upper()))

        self._file_handler: Optional[logging.FileHandler] = None
        # Text log sits next to the JSON event file.
        text_log = Path(log_file).with_suffix(".log").resolve() if log_file else None
        if text_log and not any(
            isinstance(h, logging.FileHandler) and h.baseFilename == str(text_log)
            for h in self.logger.handlers
        ):
            text_log.parent.mkdir(parents=True, exist_ok=True)
            file_handler = logging.FileHandler(text_log)
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(logging.Formatter(
                '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
            ))
            self.logger.addHandler(file_handler)
            self._file_handler = file_handler

        self.run_id = datetime.now().strftime("%Y%m%d_%H%M%S")
        self.logs: List[Dict[str, Any]] = []

    def log_stage_execution(
        self,
        stage_name: str,
        event_type: str,
        data: Dict[str, Any],
        status: str = "success"
    ):
        """Record a stage event."""
        log_entry = {
            "timestamp": datetime.now().isoformat(),
            "run_id": self.run_id,
            "stage": stage_name,
            "event_type": event_type,
            "status": status,
            "data": data
        }

        self.logs.append(log_entry)

        self.logger.debug(f"[{stage_name}] {event_type}: {status}")

    def save_logs(self, output_path: str):
        """Save all events to a JSON file."""
        Path(output_path).parent.mkdir(parents=True, exist_ok=True)
        with open(output_path, 'w') as f:
            json.dump(self.logs, f, indent=2, default=str)

        self.logger.info(f"Logs saved to {output_path}")

    def get_logs(self) -> list:
        """Return all logged events."""
        return self.logs

    def close(self):
        """Detach and close the text log handler, if any."""
        if self._file_handler is not None:
            self.logger.removeHandler(self._file_handler)
            self._file_handler.close()
            self._file_handler = None
