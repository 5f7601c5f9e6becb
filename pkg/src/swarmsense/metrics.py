"""Mission evaluation metrics and cross-seed aggregation.

Three headline metrics per run: total energy, risk ratio (risky over total
distance), and sensing mismatch (the same unit-scaled residual the optimizer
minimizes — single source of truth), plus counts of the detected
collision classes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

from .collective import rss
from .env import SensingRequirement
from .errors import DataError
from .scheduling import KIND_CROSS, KIND_DEST_OCCUPIED, KIND_PARALLEL, CollisionEvent
from .sim import MissionReport

RESULTS_HEADER = [
    "method",
    "seed",
    "energy_J",
    "risk_ratio",
    "mismatch_rss",
    "cross",
    "parallel",
    "dest_occupied",
    "status",
]


@dataclass
class Metrics:
    energy_J: float
    risk_ratio: float
    mismatch_rss: float
    collision_counts: dict[str, int] = field(default_factory=dict)
    sub_dmin_events: int = 0
    complete: bool = True


def compute_metrics(
    report: MissionReport,
    requirement: SensingRequirement,
    events: list[CollisionEvent],
) -> Metrics:
    """Metrics for one run; incomplete (timed-out) reports are flagged, not rejected."""
    counts = {KIND_CROSS: 0, KIND_PARALLEL: 0, KIND_DEST_OCCUPIED: 0}
    for e in events:
        counts[e.kind] = counts.get(e.kind, 0) + 1
    ratio = report.risk_distance / report.total_distance if report.total_distance > 0 else 0.0
    return Metrics(
        energy_J=report.energy,
        risk_ratio=ratio,
        mismatch_rss=rss(report.sensed, requirement.values),
        collision_counts=counts,
        sub_dmin_events=report.sub_dmin_events,
        complete=report.complete,
    )


def _mean_stderr(values: list[float]) -> tuple[float, float]:
    n = len(values)
    mean = sum(values) / n
    if n < 2:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var) / math.sqrt(n)


def aggregate(rows: list[dict]) -> list[dict]:
    """Per-method mean and standard error of each metric over seeds.

    rows are results-CSV row dicts; failed cells (status != ok) are skipped.
    """
    if not rows:
        raise DataError("no result rows to aggregate")
    by_method: dict[str, list[dict]] = {}
    for row in rows:
        if str(row.get("status", "ok")) != "ok":
            continue
        by_method.setdefault(str(row["method"]), []).append(row)

    out = []
    for method in sorted(by_method):
        group = by_method[method]
        summary: dict = {"method": method, "runs": len(group)}
        for metric in ("energy_J", "risk_ratio", "mismatch_rss", "cross", "parallel", "dest_occupied"):
            mean, err = _mean_stderr([float(r[metric]) for r in group])
            summary[f"{metric}_mean"] = mean
            summary[f"{metric}_stderr"] = err
        out.append(summary)
    return out


def write_results_csv(rows: list[dict], path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(RESULTS_HEADER)
        for row in rows:
            writer.writerow([_format(row.get(col, "")) for col in RESULTS_HEADER])


def _format(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def read_results_csv(path: str | Path) -> list[dict]:
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or "method" not in reader.fieldnames:
            raise DataError(f"{path}: not a results table")
        return list(reader)


def metrics_row(method: str, seed: int, m: Metrics) -> dict:
    return {
        "method": method,
        "seed": seed,
        "energy_J": m.energy_J,
        "risk_ratio": m.risk_ratio,
        "mismatch_rss": m.mismatch_rss,
        "cross": m.collision_counts.get(KIND_CROSS, 0),
        "parallel": m.collision_counts.get(KIND_PARALLEL, 0),
        "dest_occupied": m.collision_counts.get(KIND_DEST_OCCUPIED, 0),
        "status": "ok" if m.complete else "timeout",
    }
