"""Built-in value-transforming functions.

These follow call syntax (``time(...)``, ``intervals(a, b)``) so the set can
grow without grammar changes. Each checks its argument kinds and arity.
"""

from __future__ import annotations

import numpy as np

from ..errors import EvalError, QueryTypeError
from ..lang.regexes import compile_pattern
from ..series import (
    AttributeSeries,
    EventSeries,
    IntervalSeries,
    TimeSeries,
    broadcast_op,
    series_kind,
)
from ..values import (
    DURATION,
    MISSING,
    NUMBER,
    TEXT,
    TIMESTAMP,
    Value,
    ValueVector,
    apply_neg,
)


def union_series(parts: list):
    """Merge same-kind series into one, restoring canonical order."""
    kinds = {type(p) for p in parts}
    if len(kinds) != 1:
        names = ", ".join(sorted(series_kind(p) for p in parts))
        raise QueryTypeError(f"union() needs series of one kind, got {names}")
    cls = kinds.pop()
    index = parts[0].index
    for p in parts[1:]:
        if not index.same_as(p.index):
            raise EvalError("union() arguments belong to different datasets")
    values = ValueVector.concat([p.values for p in parts])
    if cls is EventSeries:
        return EventSeries(
            index,
            np.concatenate([p.traj for p in parts]),
            np.concatenate([p.times for p in parts]),
            np.concatenate([p.types for p in parts]),
            values,
            order=np.concatenate([p.order for p in parts]),
        )
    if cls is IntervalSeries:
        return IntervalSeries(
            index,
            np.concatenate([p.traj for p in parts]),
            np.concatenate([p.starts for p in parts]),
            np.concatenate([p.ends for p in parts]),
            np.concatenate([p.types for p in parts]),
            values,
            order=np.concatenate([p.order for p in parts]),
        )
    raise QueryTypeError(f"union() does not support {series_kind(parts[0])}")


def _require(cond: bool, message: str):
    if not cond:
        raise QueryTypeError(message)


def fn_time(args, diagnostics):
    _require(len(args) == 1, "time() takes one argument")
    e = args[0]
    _require(isinstance(e, (EventSeries, TimeSeries)), "time() needs an events series")
    vec = ValueVector.from_timestamps(e.times)
    if isinstance(e, TimeSeries):
        return EventSeries(e.index, e.traj, e.times,
                           np.array(["timestep"] * len(e), object), vec)
    return e.with_values(vec)


def fn_type(args, diagnostics):
    _require(len(args) == 1, "type() takes one argument")
    e = args[0]
    _require(isinstance(e, (EventSeries, IntervalSeries)),
             "type() needs an events or intervals series")
    vec = ValueVector.from_texts([str(t) for t in e.types])
    return e.with_values(vec)


def _interval_arg(args, name):
    _require(len(args) == 1, f"{name}() takes one argument")
    _require(isinstance(args[0], IntervalSeries), f"{name}() needs an intervals series")
    return args[0]


def fn_start(args, diagnostics):
    i = _interval_arg(args, "start")
    return EventSeries(i.index, i.traj, i.starts, i.types, i.values, order=i.order)


def fn_end(args, diagnostics):
    i = _interval_arg(args, "end")
    return EventSeries(i.index, i.traj, i.ends, i.types, i.values, order=i.order)


def fn_starttime(args, diagnostics):
    i = _interval_arg(args, "starttime")
    return EventSeries(i.index, i.traj, i.starts, i.types,
                       ValueVector.from_timestamps(i.starts), order=i.order)


def fn_endtime(args, diagnostics):
    i = _interval_arg(args, "endtime")
    return EventSeries(i.index, i.traj, i.starts, i.types,
                       ValueVector.from_timestamps(i.ends), order=i.order)


def fn_duration(args, diagnostics):
    i = _interval_arg(args, "duration")
    return EventSeries(i.index, i.traj, i.starts, i.types,
                       ValueVector.from_durations(i.ends - i.starts), order=i.order)


def fn_intervals(args, diagnostics):
    """Pair each start event with the first unconsumed end event at or after
    it; unmatched starts are dropped with a diagnostic."""
    _require(len(args) == 2, "intervals() takes two arguments")
    a, b = args
    _require(isinstance(a, EventSeries) and isinstance(b, EventSeries),
             "intervals() needs two events series")
    _require(a.index.same_as(b.index), "intervals() arguments belong to different datasets")
    out_rows = []
    dropped = 0
    bi = 0
    b_codes, b_times = b.traj, b.times
    nb = len(b)
    for i in range(len(a)):
        code, t = a.traj[i], a.times[i]
        while bi < nb and (b_codes[bi] < code or (b_codes[bi] == code and b_times[bi] < t)):
            bi += 1
        if bi < nb and b_codes[bi] == code:
            out_rows.append((i, bi))
            bi += 1
        else:
            dropped += 1
    if dropped:
        diagnostics.append(f"intervals(): dropped {dropped} start event(s) with no matching end")
    idx_a = np.array([r[0] for r in out_rows], dtype=np.int64)
    idx_b = np.array([r[1] for r in out_rows], dtype=np.int64)
    if len(out_rows) == 0:
        return IntervalSeries(a.index, [], [], [], np.array([], object), ValueVector.empty())
    return IntervalSeries(
        a.index, a.traj[idx_a], a.times[idx_a], b.times[idx_b],
        a.types[idx_a], a.values.take(idx_a), order=a.order[idx_a])


def fn_assign(args, diagnostics):
    """Replace every row's value with the (broadcast) second argument."""
    _require(len(args) == 2, "assign() takes two arguments")
    target, val = args
    _require(not isinstance(target, Value), "assign() needs a series first argument")
    if isinstance(val, Value):
        return target.with_values(ValueVector.filled(val, len(target)))
    if isinstance(val, AttributeSeries):
        _require(target.index.same_as(val.index),
                 "assign() arguments belong to different datasets")
        if isinstance(target, AttributeSeries):
            return target.with_values(val.values)
        return target.with_values(val.values.take(target.traj))
    from ..series import _join_timeseries_to_events, _require_aligned_rows
    if isinstance(target, EventSeries) and isinstance(val, TimeSeries):
        return target.with_values(_join_timeseries_to_events(val, target))
    _require_aligned_rows(target, val)
    return target.with_values(val.values)


def fn_extract(args, diagnostics, pattern=None, index=1):
    target = args[0]
    _require(pattern is not None and pattern.kind == "regex",
             "extract() needs a /regex/ pattern as its second argument")
    rx = compile_pattern(pattern.text, pattern.flags)
    if rx.groups < index:
        raise EvalError(
            f"extract() asked for group {index} but the pattern has {rx.groups}")

    def one(v: Value) -> Value:
        if v.is_missing():
            return MISSING
        if v.kind != TEXT:
            raise QueryTypeError(f"extract() needs text values, got {v.kind}")
        m = rx.search(v.payload)
        if m is None or m.group(index) is None:
            return MISSING
        return Value(TEXT, m.group(index))

    if isinstance(target, Value):
        return one(target)
    return target.with_values(ValueVector.from_values(
        [one(v) for v in target.values.to_values()]))


def fn_abs(args, diagnostics):
    _require(len(args) == 1, "abs() takes one argument")
    target = args[0]

    def one(v: Value) -> Value:
        if v.is_missing():
            return MISSING
        if v.kind == NUMBER:
            return Value(NUMBER, abs(v.payload))
        if v.kind == DURATION:
            return Value(DURATION, abs(v.payload))
        raise QueryTypeError(f"abs() needs a number or duration, got {v.kind}")

    if isinstance(target, Value):
        return one(target)
    vec = target.values
    if vec.kind == NUMBER:
        return target.with_values(ValueVector(NUMBER, np.abs(vec.data), vec.missing))
    if vec.kind == DURATION:
        return target.with_values(ValueVector(DURATION, np.abs(vec.data), vec.missing))
    return target.with_values(ValueVector.from_values(
        [one(v) for v in vec.to_values()]))


def fn_minmax(name, args, diagnostics):
    _require(len(args) >= 2, f"{name}() needs at least two arguments")
    out = args[0]
    for other in args[1:]:
        cond = broadcast_op("<" if name == "min" else ">", out, other)
        out = _select(cond, out, other)
    return out


def _select(cond, a, b):
    """cond true -> a, false -> b, missing -> missing (elementwise)."""
    from .evaluate import align_operands
    template, (cvec, avec, bvec) = align_operands([cond, a, b])
    if template is None:
        c, av, bv = cond, a, b
        if c.is_missing():
            return MISSING
        return av if c.payload else bv
    out = []
    for i in range(len(cvec)):
        c = cvec.get(i)
        if c.is_missing():
            out.append(MISSING)
        else:
            out.append(avec.get(i) if c.payload else bvec.get(i))
    return template.with_values(ValueVector.from_values(out))
