"""Result profiling: the summaries behind the workbench sidebar.

A profile is a pure function of a series: row/trajectory counts, rows per
trajectory, missingness, and a value summary (numeric five-number summary
with a 20-bin histogram, categorical top-10, or timestamp range).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .series import (
    AttributeSeries,
    EventSeries,
    IntervalSeries,
    TimeSeries,
    series_kind,
)
from .values import DURATION, NUMBER, TIMESTAMP, format_timestamp

HISTOGRAM_BINS = 20
TOP_K = 10


@dataclass
class SeriesProfile:
    kind: str
    row_count: int
    trajectory_count: int
    rows_per_trajectory: dict
    missing_fraction: float
    value_summary: dict | None = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "row_count": self.row_count,
            "trajectory_count": self.trajectory_count,
            "rows_per_trajectory": self.rows_per_trajectory,
            "missing_fraction": self.missing_fraction,
            "value_summary": self.value_summary,
        }


@dataclass
class ProfileBundle:
    final: SeriesProfile
    subqueries: list = field(default_factory=list)  # [{span,label,profile,plan?}]
    diagnostics: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "final": self.final.to_dict(),
            "subqueries": [
                {"span": list(s["span"]), "label": s["label"],
                 "profile": s["profile"].to_dict(),
                 "plan": s.get("plan")}
                for s in self.subqueries
            ],
            "diagnostics": self.diagnostics,
        }


def profile(series) -> SeriesProfile:
    """Summarize any series kind; empty series profile to zero counts."""
    kind = series_kind(series)
    n = len(series)
    if isinstance(series, AttributeSeries):
        traj_rows = np.ones(n, dtype=np.int64) if n else np.zeros(0, np.int64)
        traj_count = n
    else:
        traj_count = len(np.unique(series.traj)) if n else 0
        traj_rows = np.bincount(series.traj)[np.unique(series.traj)] if n else np.zeros(0, np.int64)
    vec = series.values
    miss_frac = float(vec.missing.sum() / n) if n else 0.0
    return SeriesProfile(
        kind=kind,
        row_count=n,
        trajectory_count=int(traj_count),
        rows_per_trajectory=_spread(traj_rows),
        missing_fraction=miss_frac,
        value_summary=_value_summary(vec) if n else None,
    )


def _spread(rows: np.ndarray) -> dict:
    if len(rows) == 0:
        return {"min": 0, "median": 0, "max": 0}
    return {"min": int(rows.min()), "median": float(np.median(rows)),
            "max": int(rows.max())}


def _value_summary(vec) -> dict | None:
    live_idx = np.flatnonzero(~vec.missing)
    if len(live_idx) == 0:
        return None
    if vec.kind == NUMBER:
        return _numeric_summary(vec.data[live_idx])
    if vec.kind == TIMESTAMP:
        data = vec.data[live_idx]
        return {"type": "timestamp",
                "min": format_timestamp(int(data.min())),
                "max": format_timestamp(int(data.max()))}
    if vec.kind == "mixed":
        cells = [vec.get(int(i)) for i in live_idx]
        if all(c.kind == NUMBER for c in cells):
            return _numeric_summary(np.array([c.payload for c in cells]))
        return _categorical_summary([_display(c) for c in cells])
    cells = [vec.get(int(i)) for i in live_idx]
    return _categorical_summary([_display(c) for c in cells])


def _display(cell) -> str:
    if cell.kind == "boolean":
        return "true" if cell.payload else "false"
    if cell.kind == TIMESTAMP:
        return format_timestamp(cell.payload)
    if cell.kind == DURATION:
        return f"{cell.payload} ms"
    return str(cell.payload)


def _numeric_summary(data: np.ndarray) -> dict:
    lo, hi = float(data.min()), float(data.max())
    if lo == hi:
        counts, edges = np.array([len(data)]), np.array([lo, hi])
    else:
        counts, edges = np.histogram(data, bins=HISTOGRAM_BINS, range=(lo, hi))
    q1, med, q3 = (float(q) for q in np.quantile(data, [0.25, 0.5, 0.75]))
    return {
        "type": "numeric",
        "min": lo, "q1": q1, "median": med, "q3": q3, "max": hi,
        "mean": float(data.mean()),
        "histogram": {"counts": [int(c) for c in counts],
                      "edges": [float(e) for e in edges]},
    }


def _categorical_summary(values: list) -> dict:
    counts: dict[str, int] = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    top = ordered[:TOP_K]
    other = sum(c for _, c in ordered[TOP_K:])
    return {
        "type": "categorical",
        "top": [{"value": v, "count": c} for v, c in top],
        "other_count": int(other),
        "distinct_count": len(ordered),
    }


def profile_result(qr) -> ProfileBundle:
    """Profile a QueryResult: the final series plus every captured
    subquery, preserving order and attaching retrieval-plan renderings."""
    subs = []
    for cap in qr.subqueries:
        subs.append({
            "span": tuple(cap.span),
            "label": cap.label,
            "profile": profile(cap.series),
            "plan": cap.plan.render() if cap.plan is not None else None,
        })
    return ProfileBundle(final=profile(qr.result), subqueries=subs,
                         diagnostics=list(qr.diagnostics))
