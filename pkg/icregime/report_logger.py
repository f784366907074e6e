import hashlib
import json
import logging
import os
from datetime import datetime
from typing import Any, Dict, List, Optional

import jsonlines
import numpy as np

from .config import OUTPUT, log_dir as default_log_dir
from .model import channel_to_spec

logger = logging.getLogger("icregime.report_logger")

TIMESTAMP_KEYS = ("elapsed_ms", "timestamp")


def channel_digest(model) -> str:
    """SHA-256 of the canonical JSON channel spec."""
    canonical = json.dumps(channel_to_spec(model), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _round(value: Any, precision: int) -> Any:
    if isinstance(value, dict):
        return {k: _round(v, precision) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round(v, precision) for v in value]
    if isinstance(value, np.ndarray):
        return _round(value.tolist(), precision)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (float, np.floating)):
        rounded = round(float(value), precision)
        return 0.0 if rounded == 0 else rounded
    return value


def strip_timestamps(report: Dict[str, Any]) -> Dict[str, Any]:
    return {k: v for k, v in report.items() if k not in TIMESTAMP_KEYS}


def _encode(value: Any, precision: int, level: int) -> str:
    pad, inner = "  " * level, "  " * (level + 1)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_encode(v, precision, level + 1)}" for k, v in value.items()]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(value, list):
        if not value:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in value):
            return "[" + ", ".join(_encode(v, precision, level + 1) for v in value) + "]"
        return "[\n" + ",\n".join(inner + _encode(v, precision, level + 1) for v in value) + f"\n{pad}]"
    if isinstance(value, float) and np.isfinite(value):
        return f"{value:.{precision}f}"
    return json.dumps(value, ensure_ascii=False)


def render_report(report: Dict[str, Any], precision: int = OUTPUT["precision"], timestamp: bool = True) -> str:
    """
    Report as JSON with every real printed at a fixed number of decimals.
    Key order is the report's own, so equal reports render to equal bytes.
    """
    body = report if timestamp else strip_timestamps(report)
    return _encode(_round(body, precision), precision, 0) + "\n"


class ReportLogger:
    """
    Session log of every report produced by a run.

    With a log directory configured, each report is appended as one JSON line to
    icregime_reports_<session>.jsonl; without one the session is kept in memory.
    """

    def __init__(self, log_dir: Optional[str] = None, timestamp: bool = True,
                 precision: int = OUTPUT["precision"]):
        self.log_dir = log_dir if log_dir is not None else default_log_dir()
        self.timestamp = timestamp
        self.precision = precision
        self.reports: List[Dict[str, Any]] = []
        self.session_id = datetime.now().strftime("%Y%m%d_%H%M%S")
        self.file_path = None
        if self.log_dir:
            os.makedirs(self.log_dir, exist_ok=True)
            self.file_path = os.path.join(self.log_dir, f"icregime_reports_{self.session_id}.jsonl")

    def log_report(self, report: Dict[str, Any]) -> Dict[str, Any]:
        entry = _round(report if self.timestamp else strip_timestamps(report), self.precision)
        if self.timestamp:
            entry = {"timestamp": datetime.now().isoformat(), **entry}
        self.reports.append(entry)
        self._append_to_file(entry)
        return entry

    def render(self, report: Dict[str, Any]) -> str:
        return render_report(report, self.precision, self.timestamp)

    def _append_to_file(self, entry: Dict[str, Any]) -> None:
        if not self.file_path:
            return
        try:
            with jsonlines.open(self.file_path, mode="a") as writer:
                writer.write(entry)
        except OSError as e:
            logger.error(f"Error saving report log: {str(e)}")

    @staticmethod
    def read_log(path: str) -> List[Dict[str, Any]]:
        with jsonlines.open(path) as reader:
            return list(reader)
