"""Diagnostics reports and their JSON / CSV serialisation."""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np


@dataclass
class Row:
    index: int
    point: np.ndarray | None
    quantities: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    error: str | None = None
    error_kind: str | None = None


@dataclass
class DiagnosticsReport:
    config: dict
    rows: list[Row]
    summary: dict
    wall_time: float = 0.0

    @property
    def verdict(self) -> str:
        return self.summary.get("verdict", "INDETERMINATE")

    def to_dict(self, include_timing: bool = False) -> dict:
        out = {
            "config": self.config,
            "rows": [_row_dict(r) for r in sorted(self.rows, key=lambda r: r.index)],
            "summary": self.summary,
        }
        if include_timing:
            out["wall_time"] = self.wall_time
        return _jsonable(out)


def _row_dict(r: Row) -> dict:
    d = {
        "index": r.index,
        "point": None if r.point is None else [complex(x) for x in r.point],
        "quantities": dict(sorted(r.quantities.items())),
        "residuals": dict(sorted(r.residuals.items())),
    }
    if r.error is not None:
        d["error"] = r.error
        d["error_kind"] = r.error_kind
    return d


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return [_jsonable(float(x.real)), _jsonable(float(x.imag))]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


def to_json(report: DiagnosticsReport, include_timing: bool = False) -> str:
    # repr-based float formatting gives shortest round-trip decimals
    return json.dumps(report.to_dict(include_timing), indent=2, allow_nan=False) + "\n"


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def to_csv(report: DiagnosticsReport) -> str:
    rows = sorted(report.rows, key=lambda r: r.index)
    n = max((len(r.point) for r in rows if r.point is not None), default=0)
    coord_cols = [f"{part}_z{i + 1}" for i in range(n) for part in ("re", "im")]
    qty_cols = sorted({k for r in rows for k in r.quantities})
    res_cols = sorted({k for r in rows for k in r.residuals})
    header = coord_cols + qty_cols + [f"residual_{k}" for k in res_cols] + ["error"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        coords = []
        if r.point is not None:
            for x in r.point:
                coords += [repr(float(x.real)), repr(float(x.imag))]
        else:
            coords = [""] * len(coord_cols)
        line = coords
        line += [_cell(r.quantities.get(k)) for k in qty_cols]
        line += [_cell(r.residuals.get(k)) for k in res_cols]
        line.append(r.error or "")
        w.writerow(line)
    return buf.getvalue()


def emit(report: DiagnosticsReport, fmt: str = "json", destination="-") -> int:
    """Write the report; returns the number of bytes written."""
    if fmt == "json":
        text = to_json(report)
    elif fmt == "csv":
        text = to_csv(report)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    data = text.encode("utf-8")
    if destination in (None, "-"):
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    elif hasattr(destination, "write"):
        if isinstance(destination, io.TextIOBase):
            destination.write(text)
        else:
            destination.write(data)
    else:
        with open(destination, "wb") as fh:
            fh.write(data)
    return len(data)
