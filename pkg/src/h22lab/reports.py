"""Deterministic CSV / JSON emission.

Outputs carry no timestamps and use sorted keys and ``repr`` floats, so an
identical configuration produces byte-identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any, Iterable, List, Sequence

from .errors import ConfigError
from .integrate import MonotonicityReport
from .suites import IdentityCheck

CSV_VERSION = "1"

CHECK_COLUMNS = ["suite", "check", "inputs-digest", "expected", "got", "pass", "config-digest"]
SCAN_COLUMNS = ["graph", "edge", "probe", "convex", "W", "K", "estimate", "stderr", "method",
                "backend", "tolerance", "pass", "config-digest"]
PLOT_COLUMNS = ["graph", "edge", "probe", "W", "K", "estimate", "stderr"]


def _cell(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> int:
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_cell(v) for v in row])
            count += 1
    return count


def write_json(path: Path, obj: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def check_rows(checks: Sequence[IdentityCheck], digest: str) -> List[list]:
    return [[c.suite, c.check, c.inputs_digest, c.expected, c.got, c.passed, digest] for c in checks]


def scan_rows(reports: Sequence[MonotonicityReport], digest: str) -> List[list]:
    rows = []
    for r in reports:
        for w, k, est, se in zip(r.w_grid, r.values, r.estimates, r.stderrs):
            ok = est <= r.tolerance + 3.0 * se
            rows.append([r.graph, r.edge, r.probe, r.convex, w, k, est, se, r.method, r.backend,
                         r.tolerance, ok, digest])
    return rows


def read_scan_csv(path: Path) -> List[dict]:
    if not path.is_file():
        raise ConfigError(f"missing input {path}: run mono-scan first")
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return []
        missing = [c for c in PLOT_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise ConfigError(f"{path}: not a mono-scan table, missing columns {missing}")
        return list(reader)


def plot_rows(scan: Sequence[dict]) -> List[list]:
    """Long-format rows sorted by (graph, edge, probe, W)."""
    rows = [[r["graph"], r["edge"], r["probe"], float(r["W"]), float(r["K"]),
             float(r["estimate"]), float(r["stderr"])] for r in scan]
    rows.sort(key=lambda r: (r[0], r[1], r[2], r[3]))
    return rows
