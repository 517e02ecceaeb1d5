"""Windowed aggregation over events, intervals, and time series.

The hot path (count/sum/mean/min/max/exists and friends over events) never
materializes per-window row sets: windows become [lo, hi) ranges into the
canonically sorted row arrays via two vectorized ``searchsorted`` calls on a
composite (trajectory, time) key, and segmented reductions run with
``ufunc.reduceat`` over prefix-padded data. Order statistics (median,
distinct counts) gather their window members once and sort per segment.

Window semantics are half-open [start, end); ``before t`` is (-inf, t),
``after t`` is (t, +inf), and ``at t`` matches exactly t (for intervals:
contains t). A window whose bound evaluates to missing yields a missing
cell regardless of the function. Empty windows yield 0 for the count
family, false for exists/any, true (vacuously) for all variants, and
missing for numeric and positional functions.

Interval targets are first projected through their mode: ``value`` keeps
the row value for any overlapping interval, ``duration`` contributes the
overlap length, ``rate`` contributes value x overlap-hours, and ``amount``
prorates value by the fraction of the interval covered (zero-length
intervals contribute fully when their instant lies in the window).
"""

from __future__ import annotations

import numpy as np

from ..errors import EvalError, QueryTypeError
from ..series import (
    EventSeries,
    IntervalSeries,
    TimeSeries,
    TIME_BITS,
    TIME_LIMIT,
    composite_key,
)
from ..values import (
    BOOLEAN,
    DURATION,
    MISSING,
    MIXED,
    NUMBER,
    TEXT,
    TIMESTAMP,
    Value,
    ValueVector,
)

MS_PER_HOUR = 3_600_000.0

COUNT_FAMILY = {"count", "count nonnull", "count distinct", "count distinct nonnull"}
NUMERIC_FNS = {"sum", "mean", "median", "integral"}
ORDER_FNS = {"min", "max"}
BOOL_FNS = {"any", "all", "all nonnull"}
EXIST_FNS = {"exists", "exists nonnull"}
POSITIONAL_FNS = {"first", "last"}

AGGREGATE_FNS = COUNT_FAMILY | NUMERIC_FNS | ORDER_FNS | BOOL_FNS | EXIST_FNS | POSITIONAL_FNS


class Windows:
    """Per-timestep window bounds. ``point`` windows match one instant."""

    __slots__ = ("start", "end", "missing", "point")

    def __init__(self, start, end, missing, point=False):
        self.start = np.asarray(start, np.int64)
        self.end = np.asarray(end, np.int64)
        self.missing = np.asarray(missing, bool)
        self.point = point

    def __len__(self):
        return len(self.start)


def _bound_key(traj: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Composite keys for window bounds; ends may land one past the band."""
    t = np.clip(np.asarray(times, np.int64), -TIME_LIMIT, TIME_LIMIT)
    return (np.asarray(traj, np.int64) << TIME_BITS) + (t + TIME_LIMIT)


def aggregate(fn: str, target, windows: Windows, ts_traj: np.ndarray) -> ValueVector:
    """Aggregate ``target`` rows into one value per window.

    ``ts_traj`` gives the trajectory code of each window; windows are sorted
    by (trajectory, time) in step with the timestep frame.
    """
    if fn not in AGGREGATE_FNS:
        raise EvalError(f"unknown aggregation function {fn!r}")
    if isinstance(target, IntervalSeries):
        raise TypeError("interval targets must be projected through a mode first")
    out = _aggregate_events(fn, target, windows, ts_traj)
    if windows.missing.any():
        vals = out.to_values()
        for i in np.flatnonzero(windows.missing):
            vals[i] = MISSING
        out = ValueVector.from_values(vals)
    return out


def _aggregate_events(fn, target, windows, ts_traj):
    times = target.times
    traj = target.traj
    vec = target.values
    key = composite_key(traj, times)

    ws, we = windows.start, windows.end
    if windows.point:
        ws, we = ws, ws + 1  # integer-ms instants
    safe_ws = np.where(windows.missing, 0, ws)
    safe_we = np.where(windows.missing, 0, we)
    lo = np.searchsorted(key, _bound_key(ts_traj, safe_ws), side="left")
    hi = np.searchsorted(key, _bound_key(ts_traj, safe_we), side="left")
    hi = np.maximum(lo, hi)  # inverted windows are empty

    n = len(windows)
    counts = hi - lo

    if fn == "count":
        return ValueVector.from_numbers(counts.astype(np.float64))
    if fn == "exists":
        return ValueVector.from_booleans(counts > 0)

    nn_prefix = _prefix(~vec.missing)
    nn = nn_prefix[hi] - nn_prefix[lo]
    if fn == "count nonnull":
        return ValueVector.from_numbers(nn.astype(np.float64))
    if fn == "exists nonnull":
        return ValueVector.from_booleans(nn > 0)

    if fn in BOOL_FNS:
        return _bool_agg(fn, vec, lo, hi, counts, nn)

    if fn in POSITIONAL_FNS:
        pick = np.where(counts > 0, lo if fn == "first" else hi - 1, 0)
        vals = [vec.get(int(p)) if counts[i] else MISSING
                for i, p in enumerate(pick)]
        return ValueVector.from_values(vals)

    if fn in ("count distinct", "count distinct nonnull"):
        return _distinct_agg(fn, vec, lo, hi, n)

    if fn == "integral":
        return _integral_agg(target, windows, ts_traj, ws, we)

    # numeric / order statistics
    data, kind = _numeric_view(fn, vec, lo, hi)
    if fn == "median":
        return _median_agg(data, vec.missing, lo, hi, n, kind)

    filled0 = np.where(vec.missing, 0.0, data)
    if fn == "sum":
        sums = _seg_reduce(np.add, filled0, lo, hi, 0.0)
        return _pack(kind, sums, nn == 0)
    if fn == "mean":
        sums = _seg_reduce(np.add, filled0, lo, hi, 0.0)
        with np.errstate(invalid="ignore", divide="ignore"):
            means = sums / np.maximum(nn, 1)
        return _pack(kind, means, nn == 0)
    if fn == "min":
        vals = _seg_reduce(np.minimum, np.where(vec.missing, np.inf, data), lo, hi, np.inf)
        return _pack(kind, vals, nn == 0)
    if fn == "max":
        vals = _seg_reduce(np.maximum, np.where(vec.missing, -np.inf, data), lo, hi, -np.inf)
        return _pack(kind, vals, nn == 0)
    raise EvalError(f"unknown aggregation function {fn!r}")


def _prefix(mask_or_vals) -> np.ndarray:
    out = np.zeros(len(mask_or_vals) + 1, dtype=np.int64)
    np.cumsum(mask_or_vals, out=out[1:])
    return out


def _seg_reduce(ufunc, data, lo, hi, empty_fill):
    """ufunc-reduce each [lo_i, hi_i) slice of data."""
    m = len(lo)
    if m == 0:
        return np.empty(0, dtype=np.float64)
    padded = np.append(data.astype(np.float64, copy=False), empty_fill)
    idx = np.empty(2 * m, dtype=np.int64)
    idx[0::2] = lo
    idx[1::2] = np.maximum(hi, lo)
    # reduceat yields data[i] for equal consecutive indices; fix empties below
    idx = np.minimum(idx, len(padded) - 1)
    red = ufunc.reduceat(padded, idx)[0::2]
    return np.where(hi > lo, red, empty_fill)


def _numeric_view(fn, vec: ValueVector, lo, hi):
    """Float view of the values plus the result kind; rejects windows that
    contain values no numeric/order function accepts."""
    if vec.kind == NUMBER or (vec.missing.all() and vec.kind != MIXED):
        return vec.data.astype(np.float64, copy=False), NUMBER
    allowed = {NUMBER, DURATION} | ({TIMESTAMP} if fn in ORDER_FNS else set())
    if vec.kind in (DURATION, TIMESTAMP):
        if vec.kind not in allowed:
            raise QueryTypeError(f"{fn} cannot aggregate {vec.kind} values")
        return vec.data.astype(np.float64), vec.kind
    if vec.kind == MIXED:
        data = np.zeros(len(vec), dtype=np.float64)
        bad = np.zeros(len(vec), dtype=bool)
        kinds = set()
        for i, v in enumerate(vec.to_values()):
            if v.is_missing():
                continue
            if v.kind in allowed:
                kinds.add(v.kind)
                data[i] = float(v.payload)
            else:
                bad[i] = True
        _raise_if_windowed(fn, bad, lo, hi, "mixed-kind")
        if len(kinds) > 1:
            _raise_if_windowed(fn, np.ones(len(vec), bool) & ~vec.missing, lo, hi,
                               "mixed-kind")
        return data, (kinds.pop() if kinds else NUMBER)
    # text / boolean
    bad = ~vec.missing
    _raise_if_windowed(fn, bad, lo, hi, vec.kind)
    return np.zeros(len(vec), dtype=np.float64), NUMBER


def _raise_if_windowed(fn, bad, lo, hi, kind):
    if not bad.any():
        return
    p = _prefix(bad)
    if ((p[hi] - p[lo]) > 0).any():
        raise QueryTypeError(f"{fn} cannot aggregate {kind} values")


def _pack(kind, vals, empty_mask) -> ValueVector:
    if kind == NUMBER:
        return ValueVector.from_numbers(np.where(empty_mask, np.nan, vals))
    data = np.where(empty_mask, 0, np.round(vals)).astype(np.int64)
    return ValueVector(kind, data, np.asarray(empty_mask, bool))


def _bool_agg(fn, vec, lo, hi, counts, nn):
    if vec.kind == BOOLEAN:
        truthy = vec.data & ~vec.missing
    elif vec.missing.all():
        truthy = np.zeros(len(vec), dtype=bool)
    elif vec.kind == MIXED:
        truthy = np.zeros(len(vec), dtype=bool)
        bad = np.zeros(len(vec), dtype=bool)
        for i, v in enumerate(vec.to_values()):
            if v.is_missing():
                continue
            if v.kind != BOOLEAN:
                bad[i] = True
            else:
                truthy[i] = v.payload
        _raise_if_windowed(fn, bad, lo, hi, "non-boolean")
    else:
        _raise_if_windowed(fn, ~vec.missing, lo, hi, vec.kind)
        truthy = np.zeros(len(vec), dtype=bool)
    p = _prefix(truthy)
    trues = p[hi] - p[lo]
    if fn == "any":
        return ValueVector.from_booleans(trues > 0)
    if fn == "all":
        return ValueVector.from_booleans(trues == counts)
    return ValueVector.from_booleans(trues == nn)  # all nonnull


def _distinct_agg(fn, vec, lo, hi, n):
    nonnull_only = fn.endswith("nonnull")
    out = np.zeros(n, dtype=np.float64)
    for i in range(n):
        a, b = int(lo[i]), int(hi[i])
        if a >= b:
            continue
        seen = set()
        has_missing = False
        for j in range(a, b):
            v = vec.get(j)
            if v.is_missing():
                has_missing = True
            else:
                seen.add((v.kind, v.payload))
        out[i] = len(seen) + (0 if nonnull_only or not has_missing else 1)
    return ValueVector.from_numbers(out)


def _median_agg(data, missing, lo, hi, n, kind):
    sizes = (hi - lo).astype(np.int64)
    total = int(sizes.sum())
    if total == 0:
        return ValueVector.all_missing(n, kind)
    seg = np.repeat(np.arange(n), sizes)
    offsets = np.repeat(np.cumsum(sizes) - sizes, sizes)
    idx = np.arange(total) - offsets + np.repeat(lo, sizes)
    vals = data[idx]
    keep = ~missing[idx]
    seg, vals = seg[keep], vals[keep]
    order = np.lexsort((vals, seg))
    seg, vals = seg[order], vals[order]
    counts = np.bincount(seg, minlength=n)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    out = np.full(n, np.nan)
    nz = counts > 0
    loidx = starts[nz] + (counts[nz] - 1) // 2
    hiidx = starts[nz] + counts[nz] // 2
    out[nz] = (vals[loidx] + vals[hiidx]) / 2.0
    return _pack(kind, np.nan_to_num(out), ~nz)


def _integral_agg(target, windows, ts_traj, ws, we):
    """Trapezoidal integral of (time, value) pairs inside each window, with
    time measured in hours."""
    vec = target.values
    if vec.kind not in (NUMBER,) and not vec.missing.all():
        if vec.kind == MIXED:
            kinds = {v.kind for v in vec.to_values() if not v.is_missing()}
            if kinds - {NUMBER}:
                raise QueryTypeError("integral cannot aggregate non-number values")
            data_full = np.array([0.0 if v.is_missing() else float(v.payload)
                                  for v in vec.to_values()])
        else:
            raise QueryTypeError(f"integral cannot aggregate {vec.kind} values")
    else:
        data_full = np.where(vec.missing, 0.0, vec.data.astype(np.float64, copy=False))

    keep = ~vec.missing
    traj = target.traj[keep]
    times = target.times[keep]
    vals = data_full[keep]
    key = composite_key(traj, times)
    lo = np.searchsorted(key, _bound_key(ts_traj, np.where(windows.missing, 0, ws)))
    hi = np.searchsorted(key, _bound_key(ts_traj, np.where(windows.missing, 0, we)))
    hi = np.maximum(lo, hi)
    if len(vals) >= 2:
        same = traj[:-1] == traj[1:]
        dt_h = (times[1:] - times[:-1]) / MS_PER_HOUR
        pair_area = np.where(same, (vals[:-1] + vals[1:]) / 2.0 * dt_h, 0.0)
    else:
        pair_area = np.zeros(0)
    sums = _seg_reduce(np.add, pair_area, lo, np.maximum(lo, hi - 1), 0.0)
    counts = hi - lo
    return ValueVector.from_numbers(np.where(counts > 0, sums, np.nan))


# --- interval projection ------------------------------------------------------


def project_intervals(target: IntervalSeries, mode: str, windows: Windows,
                      ts_traj: np.ndarray):
    """Expand interval rows into per-window derived rows.

    Returns (seg ids, EventSeries-like pseudo target) where the pseudo
    target's rows are ordered by (window, interval start, source order) and
    positioned at the overlap start. The caller aggregates per segment.
    """
    key = composite_key(target.traj, target.starts)
    band_lo = _bound_key(ts_traj, np.full(len(ts_traj), -TIME_LIMIT, np.int64))
    ws, we = windows.start, windows.end
    if windows.point:
        cand_hi_time = ws + 1
    else:
        cand_hi_time = we
    safe_hi = np.where(windows.missing, -TIME_LIMIT, cand_hi_time)
    lo = np.searchsorted(key, band_lo)
    hi = np.searchsorted(key, _bound_key(ts_traj, safe_hi))
    hi = np.maximum(lo, hi)

    sizes = (hi - lo).astype(np.int64)
    total = int(sizes.sum())
    n = len(ts_traj)
    if total == 0:
        return (np.zeros(0, np.int64),
                np.zeros(0, np.int64), np.zeros(0, np.int64),
                ValueVector.empty(), np.zeros(0, np.int64))
    seg = np.repeat(np.arange(n), sizes)
    offsets = np.repeat(np.cumsum(sizes) - sizes, sizes)
    idx = np.arange(total) - offsets + np.repeat(lo, sizes)

    s = target.starts[idx]
    e = target.ends[idx]
    w_s = ws[seg]
    w_e = we[seg]
    if windows.point:
        t = w_s
        include = (s <= t) & (e >= t)
        ov_len = np.zeros(total, dtype=np.int64)
    else:
        ov_s = np.maximum(s, w_s)
        ov_e = np.minimum(e, w_e)
        ov_len = np.maximum(0, ov_e - ov_s)
        include = (ov_len > 0) | ((s == e) & (w_s <= s) & (s < w_e))

    keep = include & ~windows.missing[seg]
    idx, seg, ov_len = idx[keep], seg[keep], ov_len[keep]
    s, e = s[keep], e[keep]

    base = target.values.take(idx)
    if mode == "value":
        derived = base
    elif mode == "duration":
        derived = ValueVector(DURATION, ov_len, np.zeros(len(idx), bool))
    elif mode == "hours":  # internal: overlap length in hours, for integral
        derived = ValueVector.from_numbers(ov_len / MS_PER_HOUR)
    elif mode == "rate":
        nums = _as_numbers(base, "rate")
        derived = ValueVector.from_numbers(
            np.where(nums.missing, np.nan, nums.data * (ov_len / MS_PER_HOUR)))
    elif mode == "amount":
        nums = _as_numbers(base, "amount")
        length = (e - s).astype(np.float64)
        frac = np.where(length > 0, ov_len / np.maximum(length, 1), 1.0)
        derived = ValueVector.from_numbers(
            np.where(nums.missing, np.nan, nums.data * frac))
    else:
        raise EvalError(f"unknown interval mode {mode!r}")
    return seg, target.traj[idx], s, derived, target.order[idx]


def _as_numbers(vec: ValueVector, mode: str) -> ValueVector:
    if vec.kind == NUMBER or vec.missing.all():
        return ValueVector(NUMBER, vec.data.astype(np.float64, copy=False)
                           if vec.kind == NUMBER else np.zeros(len(vec)), vec.missing)
    if vec.kind == MIXED:
        vals = []
        for v in vec.to_values():
            if v.is_missing():
                vals.append(np.nan)
            elif v.kind == NUMBER:
                vals.append(float(v.payload))
            else:
                raise QueryTypeError(f"{mode} mode needs number values, got {v.kind}")
        return ValueVector.from_numbers(np.array(vals))
    raise QueryTypeError(f"{mode} mode needs number values, got {vec.kind}")


def aggregate_intervals(fn, target: IntervalSeries, mode: str, windows: Windows,
                        ts_traj: np.ndarray) -> ValueVector:
    """Aggregate an interval target through its mode projection.

    ``integral`` integrates the mode's step function over overlap hours, so
    ``integral rate`` and ``sum rate`` coincide (both sum value x
    overlap-hours), ``integral value`` equals them, and ``integral
    duration`` totals overlap hours as a number.
    """
    proj_mode = mode
    if fn == "integral":
        proj_mode = {"value": "rate", "duration": "hours"}.get(mode, mode)
    seg, traj, starts, derived, order = project_intervals(target, proj_mode, windows, ts_traj)
    n = len(ts_traj)

    out_vals: list[Value] = []
    bounds = np.searchsorted(seg, np.arange(n + 1))
    for i in range(n):
        if windows.missing[i]:
            out_vals.append(MISSING)
            continue
        a, b = int(bounds[i]), int(bounds[i + 1])
        cells = [derived.get(j) for j in range(a, b)]
        times = starts[a:b]
        out_vals.append(_reduce_cells(fn, cells, times))
    return ValueVector.from_values(out_vals)


def _reduce_cells(fn, cells: list[Value], times) -> Value:
    live = [c for c in cells if not c.is_missing()]
    if fn == "count":
        return Value(NUMBER, float(len(cells)))
    if fn == "count nonnull":
        return Value(NUMBER, float(len(live)))
    if fn == "count distinct":
        seen = {(c.kind, c.payload) for c in live}
        return Value(NUMBER, float(len(seen) + (1 if len(live) < len(cells) else 0)))
    if fn == "count distinct nonnull":
        return Value(NUMBER, float(len({(c.kind, c.payload) for c in live})))
    if fn == "exists":
        return Value(BOOLEAN, len(cells) > 0)
    if fn == "exists nonnull":
        return Value(BOOLEAN, len(live) > 0)
    if fn == "any":
        _check_bools(fn, live)
        return Value(BOOLEAN, any(c.payload for c in live))
    if fn == "all":
        _check_bools(fn, live)
        return Value(BOOLEAN, len(live) == len(cells) and all(c.payload for c in live))
    if fn == "all nonnull":
        _check_bools(fn, live)
        return Value(BOOLEAN, all(c.payload for c in live))
    if fn == "first":
        return cells[0] if cells else MISSING
    if fn == "last":
        return cells[-1] if cells else MISSING
    # numeric family
    kinds = {c.kind for c in live}
    allowed = {NUMBER, DURATION} | ({TIMESTAMP} if fn in ORDER_FNS else set())
    if kinds - allowed:
        raise QueryTypeError(f"{fn} cannot aggregate "
                             f"{sorted(kinds - allowed)[0]} values")
    if len(kinds) > 1:
        raise QueryTypeError(f"{fn} cannot mix {' and '.join(sorted(kinds))} values")
    if not live:
        return MISSING
    kind = kinds.pop()
    nums = [float(c.payload) for c in live]
    if fn == "sum":
        out = sum(nums)
    elif fn == "mean":
        out = sum(nums) / len(nums)
    elif fn == "median":
        ss = sorted(nums)
        out = (ss[(len(ss) - 1) // 2] + ss[len(ss) // 2]) / 2.0
    elif fn == "min":
        out = min(nums)
    elif fn == "max":
        out = max(nums)
    elif fn == "integral":
        if kind != NUMBER:
            raise QueryTypeError("integral cannot aggregate non-number values")
        # piecewise contributions already carry their duration weighting in
        # rate/amount modes; integrate value mode over overlap hours upstream
        out = sum(nums)
    else:
        raise EvalError(f"unknown aggregation function {fn!r}")
    if kind == NUMBER:
        return Value(NUMBER, out)
    return Value(kind, int(round(out)))


def _check_bools(fn, live):
    for c in live:
        if c.kind != BOOLEAN:
            raise QueryTypeError(f"{fn} cannot aggregate {c.kind} values")
