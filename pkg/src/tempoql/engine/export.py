"""Result export: delimited rows plus a JSON metadata sidecar.

The CSV has columns ``trajectory_id[,timestep],value``; timestamps are
ISO-8601 UTC, durations are integer milliseconds, and missing cells are
empty fields. The sidecar records the query text, the dataset-spec
fingerprint, and any diagnostics, so an export is reproducible.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from ..series import AttributeSeries, EventSeries, IntervalSeries, TimeSeries, series_kind
from ..values import DURATION, NUMBER, TIMESTAMP, Value, format_timestamp


def render_cell(v: Value) -> str:
    if v.is_missing():
        return ""
    if v.kind == NUMBER:
        f = float(v.payload)
        return str(int(f)) if f.is_integer() and abs(f) < 1e15 else repr(f)
    if v.kind == "boolean":
        return "true" if v.payload else "false"
    if v.kind == TIMESTAMP:
        return format_timestamp(v.payload)
    if v.kind == DURATION:
        return str(int(v.payload))
    return str(v.payload)


def result_rows(series):
    """Yield export rows for any series kind."""
    if isinstance(series, AttributeSeries):
        for tid, v in series.rows():
            yield {"trajectory_id": tid, "value": render_cell(v)}
    elif isinstance(series, TimeSeries):
        for tid, t, v in series.rows():
            yield {"trajectory_id": tid, "timestep": format_timestamp(t),
                   "value": render_cell(v)}
    elif isinstance(series, EventSeries):
        for tid, t, typ, v in series.rows():
            yield {"trajectory_id": tid, "timestep": format_timestamp(t),
                   "element_type": typ, "value": render_cell(v)}
    elif isinstance(series, IntervalSeries):
        for tid, s, e, typ, v in series.rows():
            yield {"trajectory_id": tid, "start": format_timestamp(s),
                   "end": format_timestamp(e), "element_type": typ,
                   "value": render_cell(v)}
    else:
        raise TypeError(f"cannot export {type(series).__name__}")


_HEADERS = {
    "attribute": ["trajectory_id", "value"],
    "timeseries": ["trajectory_id", "timestep", "value"],
    "events": ["trajectory_id", "timestep", "element_type", "value"],
    "intervals": ["trajectory_id", "start", "end", "element_type", "value"],
}


def export_result(qr, dataset, out_path, fmt: str = "csv") -> dict:
    """Write the result and its sidecar; returns the sidecar dict."""
    out_path = Path(out_path)
    kind = series_kind(qr.result)
    rows = list(result_rows(qr.result))
    if fmt == "csv":
        with out_path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=_HEADERS[kind])
            writer.writeheader()
            writer.writerows(rows)
    elif fmt == "json":
        out_path.write_text(json.dumps(rows, indent=2, ensure_ascii=False) + "\n",
                            encoding="utf-8")
    else:
        raise ValueError(f"unknown export format {fmt!r}")
    sidecar = {
        "query": qr.query_text,
        "result_kind": kind,
        "row_count": len(rows),
        "spec_fingerprint": dataset.spec.fingerprint(),
        "diagnostics": qr.diagnostics,
    }
    sidecar_path = out_path.with_suffix(out_path.suffix + ".meta.json")
    sidecar_path.write_text(json.dumps(sidecar, indent=2, ensure_ascii=False) + "\n",
                            encoding="utf-8")
    return sidecar
