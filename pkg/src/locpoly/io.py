"""CSV and JSON helpers.

Floats are written with ``repr``, the shortest string that parses back to
the same double, so a load/save cycle is byte-stable.
"""
from __future__ import annotations

import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .estimator import Dataset

SCHEMA_VERSION = 1


def format_float(v: float) -> str:
    return repr(float(v))


def write_columns(path, columns: dict[str, np.ndarray]) -> None:
    names = list(columns)
    data = [np.asarray(columns[c], dtype=float) for c in names]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*data):
            w.writerow([format_float(v) for v in row])


def read_columns(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"{path}: empty CSV file") from None
        rows = [r for r in reader if r]
    for i, r in enumerate(rows, start=2):
        if len(r) != len(header):
            raise ValueError(f"{path}:{i}: expected {len(header)} fields, got {len(r)}")
    cols = list(zip(*rows)) if rows else [()] * len(header)
    try:
        return {h: np.array([float(v) for v in c]) for h, c in zip(header, cols)}
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric value ({exc})") from None


def write_dataset(path, d: Dataset) -> None:
    write_columns(path, {"x": d.x, "y": d.y})


def read_dataset(path) -> Dataset:
    cols = read_columns(path)
    if "x" not in cols or "y" not in cols:
        raise ValueError(f"{path}: CSV header must contain columns 'x' and 'y'")
    return Dataset(cols["x"], cols["y"])


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def dump_json(obj: dict, path=None) -> str:
    """Serialise ``obj`` with a ``schema_version`` field; write to ``path`` or stdout."""
    payload = {"schema_version": SCHEMA_VERSION, **_clean(obj)}
    text = json.dumps(payload, indent=2, sort_keys=False)
    if path is None:
        sys.stdout.write(text + "\n")
    else:
        Path(path).write_text(text + "\n")
    return text
