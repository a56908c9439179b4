"""CSV and JSON artifact writers with a fixed, byte-stable format."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    return f"{float(x):.17g}"


def plain(obj):
    """Convert numpy scalars, tuples and non-finite floats into JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def write_csv(path: Path, header, rows, meta: dict) -> Path:
    """Header row after one ``#`` line carrying the scenario hash and seed."""
    lines = [f"# scenario={meta['scenario']} scenario_hash={meta['scenario_hash']} seed={meta['seed']}",
             ",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


def write_column(path: Path, name: str, values, meta: dict) -> Path:
    head = f"# scenario={meta['scenario']} scenario_hash={meta['scenario_hash']} seed={meta['seed']}\n{name}\n"
    body = "".join(f"{v:.17g}\n" for v in np.asarray(values, dtype=float))
    path.write_text(head + body)
    return path


def write_json(path: Path, payload: dict, meta: dict) -> Path:
    doc = {"schema_version": SCHEMA_VERSION, **meta, **payload}
    path.write_text(json.dumps(plain(doc), sort_keys=True, indent=2) + "\n")
    return path


def read_json(path: Path) -> dict:
    return json.loads(Path(path).read_text())
