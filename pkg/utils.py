"""
Utility functions for TiltStress
"""

import hashlib
import json
import logging
import math
import sys
from enum import Enum

import numpy as np

from errors import InvalidParameter

logger = logging.getLogger("TiltStress.Utils")


def to_jsonable(obj):
    """Convert numpy scalars/arrays and enums into plain JSON values"""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        # JSON has no infinities; -inf thresholds and infinite lambdas become null
        return value if math.isfinite(value) else None
    return obj


def dump_json(data):
    """Render data as deterministic JSON text (key order preserved)"""
    return json.dumps(to_jsonable(data), indent=2, allow_nan=False) + "\n"


def dump_csv(df):
    """Render a DataFrame as CSV text with round-trip float formatting"""
    return df.to_csv(index=False, lineterminator="\n", float_format=repr)


def save_text(text, filename=None):
    """Write text to a file, or to stdout when no filename is given"""
    if filename is None or filename == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(filename, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    logger.info(f"Wrote {len(text)} bytes to {filename}")


def load_json(filename):
    """Load data from JSON"""
    with open(filename, "r", encoding="utf-8") as f:
        return json.load(f)


def file_digest(filename):
    """SHA-256 of a file's bytes, for the report's inputs echo"""
    h = hashlib.sha256()
    with open(filename, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def check_probability(p, name="p", low_open=True):
    """Validate a probability in (0, 1] (or [0, 1] when low_open is False)"""
    if p is None or not math.isfinite(p):
        raise InvalidParameter(f"{name} must be finite, got {p!r}")
    if (p <= 0 if low_open else p < 0) or p > 1:
        bracket = "(0, 1]" if low_open else "[0, 1]"
        raise InvalidParameter(f"{name} must lie in {bracket}, got {p!r}")
    return float(p)
