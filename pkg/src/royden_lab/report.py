"""Deterministic JSON and CSV emission.

Floats are written with 17 significant digits, so values round-trip
exactly; complex numbers become ``{"re": .., "im": ..}``.  Key order is the
insertion order of the result dictionaries, which the commands build in a
fixed order.
"""

from __future__ import annotations

import csv
import dataclasses
import math
from pathlib import Path

import numpy as np

from .errors import IoError


def _float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    text = format(x, ".17g")
    return text if any(ch in text for ch in ".en") else text + ".0"


def plain(obj):
    """Convert numpy scalars/arrays, complex numbers and dataclasses to JSON-able values."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    obj = plain(obj)
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_string(k)}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _float(obj)
    return _string(str(obj))


def _string(s: str) -> str:
    import json

    return json.dumps(s, ensure_ascii=False)


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return _float(float(v)).strip('"')
    return str(v)


def write_json(obj, path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dumps(obj) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None
    return path


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_cell(v) for v in row])
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None
    return path


def emit_report(results, fmt: str, path, header=None) -> Path:
    """Write ``results`` as JSON, or as CSV rows under ``header``."""
    if fmt == "json":
        return write_json(results, path)
    if fmt == "csv":
        if header is None:
            raise ValueError("CSV output needs a header")
        return write_csv(path, header, results or [])
    raise ValueError(f"unknown report format {fmt!r}")
