"""
Baseline data loading for TiltStress
"""

import json
import logging
import os

import pandas as pd

from dist import DiscreteDistribution
from errors import InvalidInput
from utils import load_json

logger = logging.getLogger("TiltStress.Ingest")

FORMATS = ("csv", "json")


def detect_format(path):
    ext = os.path.splitext(path)[1].lower().lstrip(".")
    if ext not in FORMATS:
        raise InvalidInput(f"cannot infer input format from '{path}' (use .csv or .json)")
    return ext


def _read_csv(path):
    """value[,weight] columns, header optional"""
    try:
        raw = pd.read_csv(path, header=None, dtype=str, skipinitialspace=True, encoding="utf-8")
    except pd.errors.EmptyDataError as e:
        raise InvalidInput(f"{path} is empty") from e
    except pd.errors.ParserError as e:
        raise InvalidInput(f"{path} is not valid CSV: {e}") from e

    first = pd.to_numeric(raw.iloc[0], errors="coerce")
    if first.isna().any():
        header = [str(c).strip().lower() for c in raw.iloc[0]]
        raw = raw.iloc[1:].reset_index(drop=True)
        raw.columns = header
        if "value" not in raw.columns:
            raise InvalidInput(f"{path}: header must name a 'value' column")
        unknown = set(raw.columns) - {"value", "weight"}
        if unknown:
            raise InvalidInput(f"{path}: unexpected columns {sorted(unknown)}")
    else:
        if raw.shape[1] > 2:
            raise InvalidInput(f"{path}: expected one or two columns, got {raw.shape[1]}")
        raw.columns = ["value", "weight"][: raw.shape[1]]

    if raw.empty:
        raise InvalidInput(f"{path} has no data rows")

    try:
        values = pd.to_numeric(raw["value"], errors="raise")
        weights = pd.to_numeric(raw["weight"], errors="raise") if "weight" in raw else None
    except (ValueError, TypeError) as e:
        raise InvalidInput(f"{path}: non-numeric entry ({e})") from e
    if values.isna().any() or (weights is not None and weights.isna().any()):
        raise InvalidInput(f"{path}: missing entries")

    logger.info(f"Read {len(values)} rows from {path}")
    return DiscreteDistribution.from_samples(
        values.to_numpy(), None if weights is None else weights.to_numpy()
    )


def _read_json(path):
    try:
        data = load_json(path)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise InvalidInput(f"{path} is not valid JSON: {e}") from e
    d = DiscreteDistribution.from_dict(data)
    logger.info(f"Read {d.size} atoms from {path}")
    return d


def load_distribution(path, fmt=None):
    """Load a baseline law from CSV or JSON (format from the extension by default)"""
    if not os.path.isfile(path):
        raise InvalidInput(f"input file not found: {path}")
    fmt = fmt or detect_format(path)
    if fmt == "csv":
        return _read_csv(path)
    if fmt == "json":
        return _read_json(path)
    raise InvalidInput(f"unsupported input format '{fmt}'")
