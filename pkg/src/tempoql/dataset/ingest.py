"""Ingestion: delimited source files to an in-memory column store.

Sources are header-bearing comma-delimited UTF-8 files; the empty string is
missing and timestamps are ISO-8601 (date-only means midnight UTC). Dots in
a table's ``source`` name map to path separators with ``.csv`` appended, so
``hosp.labevents`` resolves to ``<root>/hosp/labevents.csv``. Datasets can
also be built from in-memory DataFrames via ``Dataset.from_frames`` (the
same adapter, minus the file round-trip).

Joins graft the destination table's id column onto tables that lack one
(equi-join on ``join_key``); rows that fail the join, fail timestamp
parsing, or have end < start are dropped and counted in the ingestion
report.

Value columns keep their source representation here; element resolution
types each retrieved subset on demand, so one text column can serve both
numeric vitals and device names.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from ..errors import IngestError
from ..series import TrajectoryIndex
from ..values import ValueVector
from .spec import DatasetSpecification, TableSpec

_ORDER_STRIDE = 1 << 40  # per-table band for stable cross-table tie-breaks


def _key_str(x) -> str:
    """Canonical text for join keys and concept ids ("5.0" and 5 -> "5")."""
    if isinstance(x, float) and x.is_integer():
        return str(int(x))
    s = str(x).strip()
    if s.endswith(".0") and s[:-2].isdigit():
        return s[:-2]
    return s


def key_strings(series: pd.Series) -> np.ndarray:
    if pd.api.types.is_float_dtype(series):
        out = series.map(lambda v: "" if pd.isna(v) else _key_str(v))
    elif pd.api.types.is_integer_dtype(series):
        out = series.astype(str)
    else:
        out = series.fillna("").map(_key_str)
    return out.to_numpy(dtype=object)


def parse_time_column(series: pd.Series) -> tuple[np.ndarray, np.ndarray]:
    """Return (epoch_ms int64, ok mask). Accepts ISO strings, datetime64,
    or numeric columns already holding epoch milliseconds."""
    if pd.api.types.is_datetime64_any_dtype(series):
        vals = pd.to_datetime(series, utc=True)
        ok = vals.notna().to_numpy()
        ms = np.where(ok, vals.to_numpy(dtype="datetime64[ns]").view("i8") // 1_000_000, 0)
        return ms.astype(np.int64), ok
    if pd.api.types.is_numeric_dtype(series):
        ok = series.notna().to_numpy()
        ms = np.where(ok, series.fillna(0).to_numpy(), 0)
        return ms.astype(np.int64), ok
    as_str = series.fillna("").astype(str)
    nonempty = (as_str.str.strip() != "").to_numpy()
    parsed = pd.to_datetime(as_str.where(nonempty, None), errors="coerce",
                            utc=True, format="ISO8601")
    ok = parsed.notna().to_numpy() & nonempty
    ms = np.where(ok, parsed.to_numpy(dtype="datetime64[ns]").view("i8") // 1_000_000, 0)
    return ms.astype(np.int64), ok


_BOOL_WORDS = {"true": True, "false": False, "True": True, "False": False,
               "TRUE": True, "FALSE": False}


def infer_vector(cells: np.ndarray) -> ValueVector:
    """Type a retrieved subset of raw text cells.

    All-numeric subsets become numbers, all-boolean-word subsets booleans,
    all-ISO-timestamp subsets timestamps; anything else stays text. Empty
    cells are missing.
    """
    cells = np.asarray(cells, dtype=object)
    stripped = np.array([str(c).strip() if c is not None else "" for c in cells], dtype=object)
    missing = np.array([s == "" for s in stripped], dtype=bool)
    live = stripped[~missing]
    if len(live) == 0:
        return ValueVector.all_missing(len(cells))
    nums = pd.to_numeric(pd.Series(live), errors="coerce")
    if not nums.isna().any():
        data = np.zeros(len(cells), dtype=np.float64)
        data[~missing] = nums.to_numpy()
        return ValueVector.from_numbers(np.where(missing, np.nan, data))
    if all(s in _BOOL_WORDS for s in live):
        data = np.zeros(len(cells), dtype=bool)
        data[~missing] = [_BOOL_WORDS[s] for s in live]
        return ValueVector.from_booleans(data, missing)
    ts = pd.to_datetime(pd.Series(live, dtype=object), errors="coerce",
                        utc=True, format="ISO8601")
    if not ts.isna().any() and not nums.notna().any():
        data = np.zeros(len(cells), dtype=np.int64)
        data[~missing] = ts.to_numpy(dtype="datetime64[ns]").view("i8") // 1_000_000
        return ValueVector.from_timestamps(data, missing)
    return ValueVector(
        "text", np.where(missing, "", stripped).astype(object), missing)


def column_to_vector(series: pd.Series) -> ValueVector:
    """Type a pandas column (or subset) as a value vector."""
    if pd.api.types.is_bool_dtype(series):
        return ValueVector.from_booleans(series.to_numpy())
    if pd.api.types.is_numeric_dtype(series):
        return ValueVector.from_numbers(series.to_numpy(dtype=np.float64, na_value=np.nan))
    if pd.api.types.is_datetime64_any_dtype(series):
        ok = series.notna().to_numpy()
        ms = np.where(ok, series.to_numpy(dtype="datetime64[ns]").view("i8") // 1_000_000, 0)
        return ValueVector.from_timestamps(ms.astype(np.int64), ~ok)
    return infer_vector(series.fillna("").to_numpy(dtype=object))


@dataclass
class IngestReportEntry:
    table: str
    rows_read: int
    rows_dropped: int
    reasons: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"table": self.table, "rows_read": self.rows_read,
                "rows_dropped": self.rows_dropped, "reasons": dict(self.reasons)}


class IngestedTable:
    """One source table after joins, time parsing, and row filtering."""

    def __init__(self, spec: TableSpec, frame: pd.DataFrame, traj: np.ndarray,
                 order_base: int, times=None, starts=None, ends=None):
        self.spec = spec
        self.frame = frame
        self.traj = traj                     # trajectory codes, row-aligned
        self.order = order_base + np.arange(len(frame), dtype=np.int64)
        self.times = times
        self.starts = starts
        self.ends = ends
        self._vectors: dict[str, ValueVector] = {}

    def __len__(self) -> int:
        return len(self.frame)

    def has_column(self, name: str) -> bool:
        return name in self.frame.columns

    def raw_column(self, name: str) -> pd.Series:
        return self.frame[name]

    def key_column(self, name: str) -> np.ndarray:
        cache_key = f"__key__{name}"
        if cache_key not in self._vectors:
            self._vectors[cache_key] = key_strings(self.frame[name])
        return self._vectors[cache_key]


class Dataset:
    """Immutable ingested dataset: tables, vocabularies, trajectory universe,
    and per-trajectory observation extents."""

    def __init__(self, spec: DatasetSpecification, tables: dict,
                 vocabularies: dict, index: TrajectoryIndex,
                 report: list):
        self.spec = spec
        self.tables = tables               # source -> IngestedTable
        self.vocabularies = vocabularies   # source -> DataFrame(concept_id, name, scope)
        self.index = index
        self.report = report
        self.mintime, self.maxtime, self.observed = self._extents()
        self._catalog = None

    # -- construction -------------------------------------------------------

    @staticmethod
    def from_frames(spec: DatasetSpecification, frames: dict) -> "Dataset":
        """Build a dataset from in-memory DataFrames keyed by source name."""
        return _assemble(spec, dict(frames))

    def catalog(self):
        from .catalog import build_catalog
        if self._catalog is None:
            self._catalog = build_catalog(self)
        return self._catalog

    def _extents(self):
        n = len(self.index)
        mins = np.full(n, np.iinfo(np.int64).max, dtype=np.int64)
        maxs = np.full(n, np.iinfo(np.int64).min, dtype=np.int64)
        seen = np.zeros(n, dtype=bool)
        for table in self.tables.values():
            if table.spec.kind == "event" and len(table):
                np.minimum.at(mins, table.traj, table.times)
                np.maximum.at(maxs, table.traj, table.times)
                seen[table.traj] = True
            elif table.spec.kind == "interval" and len(table):
                np.minimum.at(mins, table.traj, table.starts)
                np.maximum.at(maxs, table.traj, table.ends)
                seen[table.traj] = True
        return mins, maxs, seen

    def report_json(self) -> list[dict]:
        return [e.to_dict() for e in self.report]


def ingest(spec: DatasetSpecification, root=None) -> Dataset:
    """Read every table under ``root`` (default: the spec's root) and build
    the dataset."""
    base = Path(root) if root is not None else spec.root
    frames: dict[str, pd.DataFrame] = {}
    for t in spec.tables:
        frames[t.source] = _read_source(base, t.source)
    for v in spec.vocabularies:
        if v.source not in frames:
            frames[v.source] = _read_source(base, v.source)
    # join destinations may be standalone files (not data element tables)
    for join in spec.joins.values():
        if join.dest_table not in frames and spec.table(join.dest_table) is None:
            frames[join.dest_table] = _read_source(base, join.dest_table)
    return _assemble(spec, frames)


def _read_source(base: Path, source: str) -> pd.DataFrame:
    rel = Path(*source.split(".")).with_suffix(".csv")
    path = base / rel
    if not path.exists():
        raise IngestError(f"source file not found: {path} (for table {source!r})")
    try:
        return pd.read_csv(path, dtype=str, keep_default_na=False)
    except Exception as exc:
        raise IngestError(f"could not read {path}: {exc}") from exc


def _assemble(spec: DatasetSpecification, frames: dict) -> Dataset:
    report: list[IngestReportEntry] = []
    joined: dict[str, pd.DataFrame] = {}

    def _id_field_of(source: str) -> str:
        cur = source
        while True:
            t = spec.table(cur)
            if t is not None:
                return t.id_field
            cur = spec.joins[cur].dest_table  # chain validity checked at load

    # resolve id columns, following join chains
    def resolve_ids(source: str, frame: pd.DataFrame, entry: IngestReportEntry) -> pd.DataFrame:
        id_field = _id_field_of(source)
        join = spec.joins.get(source)
        if join is not None and id_field and id_field not in frame.columns:
            dest_frame = _dest_with_ids(join.dest_table)
            dest_id = _id_field_of(join.dest_table)
            if join.join_key not in frame.columns:
                raise IngestError(f"table {source!r} lacks join column {join.join_key!r}")
            if join.join_key not in dest_frame.columns:
                raise IngestError(
                    f"join destination {join.dest_table!r} lacks column {join.join_key!r}")
            mapping = pd.DataFrame({
                "__joinkey__": key_strings(dest_frame[join.join_key]),
                id_field: dest_frame[dest_id],
            })
            mapping = mapping[mapping["__joinkey__"] != ""].drop_duplicates()
            lhs = frame.copy()
            lhs["__joinkey__"] = key_strings(lhs[join.join_key])
            matched = lhs["__joinkey__"].isin(set(mapping["__joinkey__"]))
            misses = int((~matched).sum())
            if misses:
                entry.reasons["join_miss"] = misses
            merged = lhs.merge(mapping, on="__joinkey__", how="inner", sort=False)
            frame = merged.drop(columns="__joinkey__")
        if id_field and id_field not in frame.columns:
            raise IngestError(
                f"table {source!r} has no id column {id_field!r} after joins")
        return frame

    def _dest_with_ids(dest: str) -> pd.DataFrame:
        if dest in joined:
            return joined[dest]
        frame = frames.get(dest)
        if frame is None:
            raise IngestError(f"join destination {dest!r} was not loaded")
        entry = IngestReportEntry(dest, len(frame), 0)
        out = resolve_ids(dest, frame, entry)
        joined[dest] = out
        return out

    # first pass: joins
    prepared: dict[str, pd.DataFrame] = {}
    entries: dict[str, IngestReportEntry] = {}
    for t in spec.tables:
        frame = frames[t.source].copy()
        frame["__row__"] = np.arange(len(frame), dtype=np.int64)
        entry = IngestReportEntry(t.source, len(frame), 0)
        frame = resolve_ids(t.source, frame, entry)
        prepared[t.source] = frame
        entries[t.source] = entry

    # trajectory universe: every id seen in any table, post-join
    all_ids: set[str] = set()
    for t in spec.tables:
        ids = key_strings(prepared[t.source][t.id_field])
        all_ids.update(i for i in ids if i != "")
    index = TrajectoryIndex(all_ids)

    tables: dict[str, IngestedTable] = {}
    for ti, t in enumerate(spec.tables):
        frame = prepared[t.source]
        entry = entries[t.source]
        ids = key_strings(frame[t.id_field])
        ok = np.array([i != "" for i in ids], dtype=bool)
        if not ok.all():
            entry.reasons["missing_id"] = int((~ok).sum())
        times = starts = ends = None
        if t.kind == "event":
            ms, tok = parse_time_column(frame[t.time_field])
            bad = ok & ~tok
            if bad.any():
                entry.reasons["bad_time"] = int(bad.sum())
            ok &= tok
            times = ms
        elif t.kind == "interval":
            sms, sok = parse_time_column(frame[t.start_time_field])
            ems, eok = parse_time_column(frame[t.end_time_field])
            bad = ok & ~(sok & eok)
            if bad.any():
                entry.reasons["bad_time"] = int(bad.sum())
            ok &= sok & eok
            neg = ok & (ems < sms)
            if neg.any():
                entry.reasons["negative_interval"] = int(neg.sum())
            ok &= ~neg
            starts, ends = sms, ems
        keep = np.flatnonzero(ok)
        entry.rows_dropped = int(len(frame) - len(keep))
        sub = frame.iloc[keep].reset_index(drop=True)
        traj = index.codes_of(ids[keep])
        tables[t.source] = IngestedTable(
            t, sub, traj, order_base=ti * _ORDER_STRIDE,
            times=None if times is None else times[keep],
            starts=None if starts is None else starts[keep],
            ends=None if ends is None else ends[keep],
        )
        report.append(entry)

    vocabularies = _load_vocabularies(spec, frames, report)
    return Dataset(spec, tables, vocabularies, index, report)


def _load_vocabularies(spec, frames, report) -> dict:
    out = {}
    for v in spec.vocabularies:
        frame = frames.get(v.source)
        if frame is None:
            raise IngestError(f"vocabulary source {v.source!r} was not loaded")
        entry = IngestReportEntry(v.source, len(frame), 0)
        ids = key_strings(frame[v.concept_id_field])
        names = frame[v.concept_name_field].fillna("").astype(str).to_numpy(dtype=object)
        if v.scope_field:
            scopes = frame[v.scope_field].fillna("").astype(str).to_numpy(dtype=object)
            allowed = set(v.scopes)
            ok = np.array([s in allowed for s in scopes], dtype=bool)
            if not ok.all():
                entry.reasons["unlisted_scope"] = int((~ok).sum())
        else:
            scopes = np.array([v.scope] * len(frame), dtype=object)
            ok = np.ones(len(frame), dtype=bool)
        ok &= np.array([i != "" and n != "" for i, n in zip(ids, names)], dtype=bool)
        entry.rows_dropped = int((~ok).sum())
        out[v.source] = pd.DataFrame({
            "concept_id": ids[ok], "name": names[ok], "scope": scopes[ok],
        })
        report.append(entry)
    return out
