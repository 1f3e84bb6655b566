"""Tabular sweep records and their CSV/JSON serialization."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__


@dataclass
class SweepResult:
    columns: Sequence[str]
    rows: list
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        j = list(self.columns).index(name)
        values = [row[j] for row in self.rows]
        if len({isinstance(v, str) for v in values}) > 1:
            # e.g. integer windings mixed with an "undefined" marker
            return np.array(values, dtype=object)
        return np.array(values)


def config_hash(config_dict: dict) -> str:
    blob = json.dumps(config_dict, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def meta_line(seed: Optional[int], chash: str) -> str:
    seed_text = "none" if seed is None else str(seed)
    return f"# meta: version={__version__} seed={seed_text} config_hash={chash}"


def write_csv(path, columns: Sequence[str], rows, seed: Optional[int], chash: str) -> Path:
    path = Path(path)
    lines = [meta_line(seed, chash), ",".join(columns)]
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_csv(path):
    """Return (meta line, columns, rows as lists of strings)."""
    lines = Path(path).read_text().splitlines()
    meta = lines[0]
    columns = lines[1].split(",")
    rows = [line.split(",") for line in lines[2:]]
    return meta, columns, rows


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not np.isfinite(value):
            return str(value)
        return value
    return value


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
    return path
