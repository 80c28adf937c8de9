"""Deterministic JSON/CSV text output.

Floats are rendered with 17 significant digits so that repeated runs
produce byte-identical files and values round-trip exactly.
"""

from __future__ import annotations

import json

import numpy as np


def format_float(x: float) -> str:
    if x != x:
        return "NaN"
    if x == float("inf"):
        return "Infinity"
    if x == float("-inf"):
        return "-Infinity"
    return f"{x:.17g}"


def _encode(obj) -> str:
    if isinstance(obj, (np.floating, float)):
        return format_float(float(obj))
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (np.integer, int)):
        return str(int(obj))
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    if isinstance(obj, dict):
        items = (f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items())
        return "{" + ", ".join(items) + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """JSON text with fixed float formatting; insertion order preserved."""
    return _encode(obj) + "\n"


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(obj))


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def write_csv(path, header: str, columns) -> None:
    """Write columns of floats under a comma-separated header line."""
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in data:
            fh.write(",".join(format_float(v) for v in row) + "\n")
