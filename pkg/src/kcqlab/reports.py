"""Report records and their JSON/CSV serialization.

Floats are written with 17 significant digits so that every double
round-trips exactly; non-finite values are written as the strings
``"inf"``, ``"-inf"`` and ``"nan"``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__


def format_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def _plain(obj):
    """Convert numpy scalars/arrays and tuples into plain JSON-able Python values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with fixed 17-significant-digit floats and keys kept in insertion order."""
    obj = _plain(obj) if _level == 0 else obj
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _cell(v) -> str:
    if isinstance(v, float):
        return format_float(v).strip('"')
    if isinstance(v, (list, dict)):
        return dumps(v, indent=0).replace("\n", "")
    if v is None:
        return ""
    return str(v)


@dataclass
class ReportRecord:
    """Result of one experiment run: echoed config, result rows and provenance notes."""

    kind: str
    config: dict
    rows: list[dict]
    summary: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    version: str = __version__

    def payload(self) -> dict:
        """Numeric content only; identical configs must reproduce it byte for byte."""
        return {"rows": self.rows, "summary": self.summary}

    def payload_text(self) -> str:
        return dumps(self.payload())

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "tool_version": self.version,
            "config": self.config,
            "rows": self.rows,
            "summary": self.summary,
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return dumps(self.to_dict()) + "\n"

    def to_csv(self) -> str:
        rows = _plain(self.rows)
        columns: list[str] = []
        for r in rows:
            for k in r:
                if k not in columns:
                    columns.append(k)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r.get(c)) for c in columns])
        return buf.getvalue()

    def render(self, fmt: str) -> str:
        return self.to_csv() if fmt == "csv" else self.to_json()
