"""Run configuration and report files (JSON plus optional CSV curves).

Reports are byte-stable: keys are sorted, floats are written in their
shortest round-trip form, and the only time-dependent value lives in the
top-level ``timestamp`` field.
"""
from __future__ import annotations

import csv
import datetime as _dt
import json
import math
import platform
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import scipy

SCHEMA_VERSION = 1


@dataclass
class RunConfig:
    command: str
    domain: dict = field(default_factory=lambda: {"family": "rect", "l": 1.0})
    operator: dict | None = None
    nx: int | None = None
    ny: int | None = None
    h_sweep: list = field(default_factory=lambda: [0.2, 0.1, 0.05, 0.025])
    bc: str = "dirichlet_ends"
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)
    out: str | None = None
    csv: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys {sorted(extra)}")
        if "command" not in d:
            raise ValueError("config needs a 'command'")
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))


def _plain(obj):
    """Recursively convert numpy scalars/arrays and tuples to JSON types."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, two-space indent, shortest round-trip floats."""
    return json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"


def environment() -> dict:
    from . import __version__
    return {"python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "kornlab": __version__}


def build_report(config: RunConfig, records: list, summary: dict | None = None,
                 timestamp: str | None = None) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "config": config.to_dict(),
        "records": records,
        "summary": summary or {},
        "environment": environment(),
        "timestamp": timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }


def write_csv(path, rows) -> None:
    """Sweep curve with header ``h,lhs,rhs,ratio``; one line per row."""
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["h", "lhs", "rhs", "ratio"])
            for row in rows:
                w.writerow([repr(float(v)) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write CSV {path}: {exc}") from exc


def emit_report(config: RunConfig, records: list, summary: dict | None = None,
                csv_rows=None, timestamp: str | None = None) -> dict:
    """Write the JSON report (and CSV when configured); returns the report."""
    report = build_report(config, records, summary, timestamp)
    if config.out:
        path = Path(config.out)
        try:
            path.write_text(dumps(report))
        except OSError as exc:
            raise OSError(f"cannot write report {path}: {exc}") from exc
    if config.csv and csv_rows is not None:
        write_csv(config.csv, csv_rows)
    return report


def strip_timestamp(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "timestamp"}
