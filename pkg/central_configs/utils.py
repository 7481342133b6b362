"""
Utility functions for progress reporting, angle parsing and data output.
"""

import csv
import json
import logging
import math
import re
import sys
from datetime import datetime
from typing import Any, Dict, Iterable, List, Optional, Sequence, TextIO

import numpy as np

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

_ANGLE_RE = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(deg|rad)?\s*$")


def show_progress(msg: str):
    """Display progress message with timestamp (stderr, stdout carries data)"""
    timestamp = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
    print(f"[{timestamp}] {msg}", file=sys.stderr)
    sys.stderr.flush()


def configure_logging(level: str = "WARNING"):
    """Configure root logging once for command-line use"""
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.WARNING),
        format=LOG_FORMAT,
        handlers=[logging.StreamHandler(sys.stderr)],
        force=True,
    )


def parse_angle(text: str, degrees: bool = False) -> float:
    """
    Parse an angle given as 'NNdeg', 'NNrad' or a bare number.

    Bare numbers are radians unless degrees is set.

    Raises:
        ValueError: If the text is not an angle
    """
    match = _ANGLE_RE.match(str(text))
    if not match:
        raise ValueError(f"Not an angle: {text!r} (use e.g. 75deg or 1.309)")
    value = float(match.group(1))
    unit = match.group(2) or ("deg" if degrees else "rad")
    return math.radians(value) if unit == "deg" else value


def to_jsonable(value: Any) -> Any:
    """Convert numpy containers and scalars into plain JSON types"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def write_json(data: Dict[str, Any], stream: Optional[TextIO] = None, path: Optional[str] = None):
    """Write a JSON document to a path or a stream"""
    text = json.dumps(to_jsonable(data), indent=2)
    if path:
        with open(path, "w") as f:
            f.write(text + "\n")
    else:
        (stream or sys.stdout).write(text + "\n")


def write_csv(header: Sequence[str], rows: Iterable[Sequence[Any]],
              stream: Optional[TextIO] = None, path: Optional[str] = None):
    """Write rows under a header; None cells become empty fields"""
    def _emit(f):
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if cell is None else repr(float(cell)) if isinstance(cell, float) else cell
                             for cell in row])

    if path:
        with open(path, "w", newline="") as f:
            _emit(f)
    else:
        _emit(stream or sys.stdout)


def read_csv_rows(path: str) -> List[Dict[str, str]]:
    """Read a CSV file into dictionaries keyed by header"""
    with open(path, newline="") as f:
        return list(csv.DictReader(f))
