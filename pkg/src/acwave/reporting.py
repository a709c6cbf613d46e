"""Deterministic text serialization: JSON reports and CSV tables.

All floats are written with 17 significant digits so every number
round-trips exactly; keys are sorted, so equal inputs give equal bytes.
Non-finite floats become the JSON strings ``"NaN"``, ``"Infinity"`` and
``"-Infinity"`` (and ``nan``/``inf`` in CSV).
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np


def fmt(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return fmt(x)
        return json.dumps("NaN" if math.isnan(x) else ("Infinity" if x > 0 else "-Infinity"))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(obj[k], indent, level + 1)}" for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    return _encode(obj, indent, 0) + "\n"


def write_json(path: Path, obj) -> None:
    Path(path).write_text(dumps(obj))


def write_csv(path: Path, header: list, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else (str(v) if isinstance(v, (int, np.integer)) else fmt(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def wave_rows(U: np.ndarray, x: np.ndarray, cross):
    """Rows ``x, y..., u`` in row-major order: x outer, cross-section nodes inner."""
    coords = cross.coordinates
    if cross.ndim == 1:
        ys = [(y,) for y in np.asarray(coords).ravel()]
    else:
        mesh = np.meshgrid(*coords, indexing="ij")
        ys = list(zip(*(m.ravel() for m in mesh)))
    for i, xi in enumerate(x):
        vals = np.asarray(U[i]).ravel()
        for y, u in zip(ys, vals):
            yield (xi, *y, u)


def wave_header(cross) -> list:
    return ["x", "y", "u"] if cross.ndim == 1 else ["x", "y1", "y2", "u"]


def read_table(path: Path) -> tuple:
    """Header and float array of a CSV written by :func:`write_csv`."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data.reshape(-1, len(header))
