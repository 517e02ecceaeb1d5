"""The four postfix clause operators: where, impute, carry, cut.

Clause order in the query is application order; carry-then-impute and
impute-then-carry are different pipelines on purpose.
"""

from __future__ import annotations

import numpy as np

from ..errors import EvalError, QueryTypeError
from ..series import AttributeSeries, EventSeries, IntervalSeries, TimeSeries
from ..values import (
    DURATION,
    MISSING,
    NUMBER,
    TEXT,
    TIMESTAMP,
    Value,
    ValueVector,
)


def aligned_values(target, operand) -> ValueVector:
    """Operand values aligned to the target's rows (broadcast semantics)."""
    from ..series import _join_timeseries_to_events, _require_aligned_rows

    if isinstance(operand, Value):
        return ValueVector.filled(operand, len(target))
    if isinstance(operand, AttributeSeries):
        if isinstance(target, AttributeSeries):
            return operand.values
        return operand.values.take(target.traj)
    if isinstance(target, AttributeSeries):
        raise QueryTypeError(
            "cannot align a row series against an attribute target")
    if isinstance(target, EventSeries) and isinstance(operand, TimeSeries):
        return _join_timeseries_to_events(operand, target)
    _require_aligned_rows(target, operand)
    return operand.values


def apply_where(target, predicate, diagnostics: list):
    """Keep rows where the predicate is strictly true.

    Attribute targets keep their trajectory universe: non-qualifying slots
    become missing instead of disappearing.
    """
    if isinstance(target, Value):
        raise QueryTypeError("where needs a series on its left side")
    mask_vec = aligned_values(target, predicate)
    keep = mask_vec.is_truthy()
    if isinstance(target, AttributeSeries):
        vals = [target.values.get(i) if keep[i] else MISSING for i in range(len(target))]
        return target.with_values(ValueVector.from_values(vals))
    return target.take(np.flatnonzero(keep))


def apply_impute(target, strategy, diagnostics: list):
    """Fill missing values: population mean/median, or a broadcast expression."""
    if isinstance(target, Value):
        raise QueryTypeError("impute needs a series on its left side")
    vec = target.values
    if isinstance(strategy, str):
        if vec.kind not in (NUMBER,) and not vec.missing.all():
            raise QueryTypeError(
                f"impute {strategy} needs a numeric series, got {vec.kind}")
        live = vec.data[~vec.missing] if vec.kind == NUMBER else np.empty(0)
        if len(live) == 0:
            diagnostics.append(f"impute {strategy}: no non-missing values to average")
            return target
        stat = float(np.mean(live)) if strategy == "mean" else float(np.median(live))
        data = np.where(vec.missing, stat, vec.data if vec.kind == NUMBER else 0.0)
        return target.with_values(ValueVector.from_numbers(data))
    fill = aligned_values(target, strategy)
    out = [fill.get(i) if vec.missing[i] else vec.get(i) for i in range(len(vec))]
    return target.with_values(ValueVector.from_values(out))


def apply_carry(target, horizon_ms: int, diagnostics: list):
    """Forward-fill missing values from the most recent non-missing value
    whose timestep is within ``horizon_ms`` (measured from the original
    observation, so carried values keep carrying until the horizon)."""
    if horizon_ms < 0:
        raise EvalError("carry horizon must not be negative")
    if isinstance(target, AttributeSeries):
        return target  # one slot per trajectory: nothing to carry along
    if isinstance(target, IntervalSeries) or isinstance(target, Value):
        raise QueryTypeError("carry needs a timestep-aligned or events series")
    times = target.times
    traj = target.traj
    vec = target.values
    vals = vec.to_values()
    out = list(vals)
    last_code = None
    src_time = None
    src_val = MISSING
    for i in range(len(vals)):
        code = traj[i]
        if code != last_code:
            last_code = code
            src_time = None
            src_val = MISSING
        if not vals[i].is_missing():
            src_time = times[i]
            src_val = vals[i]
        elif src_time is not None and 0 < times[i] - src_time <= horizon_ms:
            out[i] = src_val
    return target.with_values(ValueVector.from_values(out))


def apply_cut(target, edges: list, labels: list, diagnostics: list):
    """Map numeric values into labeled bins; bin i is [edge_i, edge_i+1)."""
    if isinstance(target, Value):
        target_vec = ValueVector.from_values([target])
        out = _cut_vector(target_vec, edges, labels, diagnostics)
        return out.get(0)
    out = _cut_vector(target.values, edges, labels, diagnostics)
    return target.with_values(out)


def _cut_vector(vec: ValueVector, edges, labels, diagnostics) -> ValueVector:
    arr = np.asarray(edges, dtype=np.float64)
    out = []
    oob = 0
    for v in vec.to_values():
        if v.is_missing():
            out.append(MISSING)
            continue
        if v.kind != NUMBER:
            raise QueryTypeError(f"cut needs numeric values, got {v.kind}")
        pos = int(np.searchsorted(arr, v.payload, side="right")) - 1
        if pos < 0 or pos >= len(labels):
            oob += 1
            out.append(MISSING)
        else:
            out.append(Value(TEXT, labels[pos]))
    if oob:
        diagnostics.append(f"cut: {oob} value(s) fell outside the outermost bin edges")
    return ValueVector.from_values(out)
