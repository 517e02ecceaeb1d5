"""Trajectory-grouped series: the four collection types and broadcasting.

All series are immutable after construction and numpy-backed:

* ``AttributeSeries`` — exactly one cell per trajectory.
* ``EventSeries`` — (trajectory, time, element type, value) rows.
* ``IntervalSeries`` — (trajectory, start, end, element type, value) rows.
* ``TimeSeries`` — timestep-aligned aggregation output, one row per
  (trajectory, timestep), with unique index.

Rows are kept in canonical order: sorted by (trajectory, time[, end]) with a
stable tie-break on the original source index, so shuffled input reproduces
the same series. Trajectories are identified by text ids; series store
integer codes into a shared ``TrajectoryIndex``.
"""

from __future__ import annotations

import numpy as np

from .errors import AlignmentError, QueryTypeError
from .values import (
    MISSING,
    Value,
    ValueVector,
    apply_scalar_op,
    vector_op,
)

TIME_BITS = 46
TIME_LIMIT = 1 << 45  # |epoch ms| bound; covers years ~900..3084


def composite_key(traj: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Single sortable int64 key per (trajectory code, time).

    Times are clipped to ±TIME_LIMIT so unbounded window sentinels stay
    inside their trajectory's band.
    """
    t = np.clip(np.asarray(times, np.int64), -TIME_LIMIT, TIME_LIMIT - 1)
    return (np.asarray(traj, np.int64) << TIME_BITS) + (t + TIME_LIMIT)


def _check_times(times: np.ndarray) -> None:
    if len(times) and (np.abs(times) >= TIME_LIMIT).any():
        raise ValueError("timestamp out of supported range")


class TrajectoryIndex:
    """The ordered universe of trajectory ids (text, strictly ascending)."""

    __slots__ = ("ids", "_pos")

    def __init__(self, ids):
        ids = sorted({str(i) for i in ids})
        self.ids = np.array(ids, dtype=object)
        self._pos = {tid: i for i, tid in enumerate(ids)}

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, tid) -> bool:
        return str(tid) in self._pos

    def code_of(self, tid) -> int:
        return self._pos[str(tid)]

    def codes_of(self, tids) -> np.ndarray:
        return np.array([self._pos[str(t)] for t in tids], dtype=np.int64)

    def same_as(self, other: "TrajectoryIndex") -> bool:
        return self is other or (
            len(self.ids) == len(other.ids) and (self.ids == other.ids).all()
        )


class AttributeSeries:
    """One value slot per trajectory (the slot may hold missing)."""

    __slots__ = ("index", "values", "name")

    def __init__(self, index: TrajectoryIndex, values: ValueVector, name: str = ""):
        if len(values) != len(index):
            raise ValueError("attribute series needs one value per trajectory")
        self.index = index
        self.values = values
        self.name = name

    def __len__(self) -> int:
        return len(self.index)

    @staticmethod
    def from_mapping(index: TrajectoryIndex, mapping: dict, name: str = "") -> "AttributeSeries":
        vals = [mapping.get(tid, MISSING) for tid in index.ids]
        return AttributeSeries(index, ValueVector.from_values(vals), name)

    def rows(self) -> list[tuple]:
        return [(tid, self.values.get(i)) for i, tid in enumerate(self.index.ids)]

    def with_values(self, values: ValueVector, name: str | None = None) -> "AttributeSeries":
        return AttributeSeries(self.index, values, self.name if name is None else name)


class EventSeries:
    """Timestamped point rows, canonically sorted."""

    __slots__ = ("index", "traj", "times", "types", "values", "order", "name")

    def __init__(self, index, traj, times, types, values, order=None, name="", presorted=False):
        traj = np.asarray(traj, np.int64)
        times = np.asarray(times, np.int64)
        types = np.asarray(types, dtype=object)
        _check_times(times)
        n = len(traj)
        if not (len(times) == len(types) == len(values) == n):
            raise ValueError("event series columns must share one length")
        order = np.arange(n, dtype=np.int64) if order is None else np.asarray(order, np.int64)
        if not presorted and n:
            perm = np.lexsort((order, times, traj))
            traj, times, types, order = traj[perm], times[perm], types[perm], order[perm]
            values = values.take(perm)
        self.index = index
        self.traj = traj
        self.times = times
        self.types = types
        self.values = values
        self.order = order
        self.name = name

    def __len__(self) -> int:
        return len(self.traj)

    @staticmethod
    def build(index: TrajectoryIndex, rows, name="") -> "EventSeries":
        """rows: iterable of (trajectory_id, time_ms, element_type, Value)."""
        rows = list(rows)
        traj = index.codes_of([r[0] for r in rows])
        times = np.array([r[1] for r in rows], np.int64)
        types = np.array([r[2] for r in rows], object)
        values = ValueVector.from_values([r[3] for r in rows])
        return EventSeries(index, traj, times, types, values, name=name)

    def rows(self) -> list[tuple]:
        return [
            (self.index.ids[self.traj[i]], int(self.times[i]), self.types[i], self.values.get(i))
            for i in range(len(self))
        ]

    def take(self, idx) -> "EventSeries":
        return EventSeries(
            self.index, self.traj[idx], self.times[idx], self.types[idx],
            self.values.take(idx), self.order[idx], self.name, presorted=True,
        )

    def with_values(self, values: ValueVector, name: str | None = None) -> "EventSeries":
        return EventSeries(
            self.index, self.traj, self.times, self.types, values, self.order,
            self.name if name is None else name, presorted=True,
        )


class IntervalSeries:
    """Rows spanning [start, end] (start ≤ end), canonically sorted by start."""

    __slots__ = ("index", "traj", "starts", "ends", "types", "values", "order", "name")

    def __init__(self, index, traj, starts, ends, types, values, order=None, name="", presorted=False):
        traj = np.asarray(traj, np.int64)
        starts = np.asarray(starts, np.int64)
        ends = np.asarray(ends, np.int64)
        types = np.asarray(types, dtype=object)
        _check_times(starts)
        _check_times(ends)
        n = len(traj)
        if len(starts) and (ends < starts).any():
            raise ValueError("interval rows must satisfy start <= end")
        order = np.arange(n, dtype=np.int64) if order is None else np.asarray(order, np.int64)
        if not presorted and n:
            perm = np.lexsort((order, starts, traj))
            traj, starts, ends, types, order = (
                traj[perm], starts[perm], ends[perm], types[perm], order[perm])
            values = values.take(perm)
        self.index = index
        self.traj = traj
        self.starts = starts
        self.ends = ends
        self.types = types
        self.values = values
        self.order = order
        self.name = name

    def __len__(self) -> int:
        return len(self.traj)

    @staticmethod
    def build(index: TrajectoryIndex, rows, name="") -> "IntervalSeries":
        """rows: iterable of (trajectory_id, start_ms, end_ms, element_type, Value)."""
        rows = list(rows)
        traj = index.codes_of([r[0] for r in rows])
        starts = np.array([r[1] for r in rows], np.int64)
        ends = np.array([r[2] for r in rows], np.int64)
        types = np.array([r[3] for r in rows], object)
        values = ValueVector.from_values([r[4] for r in rows])
        return IntervalSeries(index, traj, starts, ends, types, values, name=name)

    def rows(self) -> list[tuple]:
        return [
            (self.index.ids[self.traj[i]], int(self.starts[i]), int(self.ends[i]),
             self.types[i], self.values.get(i))
            for i in range(len(self))
        ]

    def take(self, idx) -> "IntervalSeries":
        return IntervalSeries(
            self.index, self.traj[idx], self.starts[idx], self.ends[idx],
            self.types[idx], self.values.take(idx), self.order[idx], self.name,
            presorted=True,
        )

    def with_values(self, values: ValueVector, name: str | None = None) -> "IntervalSeries":
        return IntervalSeries(
            self.index, self.traj, self.starts, self.ends, self.types, values,
            self.order, self.name if name is None else name, presorted=True,
        )


class TimeSeries:
    """Timestep-aligned values; (trajectory, timestep) pairs unique and sorted.

    ``provenance`` fingerprints the timestep definition that produced the
    series; two time series may be combined only when their indices match.
    """

    __slots__ = ("index", "traj", "times", "values", "provenance", "name")

    def __init__(self, index, traj, times, values, provenance="", name="", presorted=False):
        traj = np.asarray(traj, np.int64)
        times = np.asarray(times, np.int64)
        _check_times(times)
        if len(traj) != len(times) or len(traj) != len(values):
            raise ValueError("time series columns must share one length")
        if not presorted and len(traj):
            perm = np.lexsort((times, traj))
            traj, times = traj[perm], times[perm]
            values = values.take(perm)
        if len(traj) > 1:
            key = composite_key(traj, times)
            if (np.diff(key) <= 0).any():
                raise ValueError("time series index must be unique and sorted")
        self.index = index
        self.traj = traj
        self.times = times
        self.values = values
        self.provenance = provenance
        self.name = name

    def __len__(self) -> int:
        return len(self.traj)

    @staticmethod
    def build(index: TrajectoryIndex, rows, provenance="", name="") -> "TimeSeries":
        """rows: iterable of (trajectory_id, time_ms, Value)."""
        rows = list(rows)
        traj = index.codes_of([r[0] for r in rows])
        times = np.array([r[1] for r in rows], np.int64)
        values = ValueVector.from_values([r[2] for r in rows])
        return TimeSeries(index, traj, times, values, provenance)

    def rows(self) -> list[tuple]:
        return [
            (self.index.ids[self.traj[i]], int(self.times[i]), self.values.get(i))
            for i in range(len(self))
        ]

    def take(self, idx) -> "TimeSeries":
        return TimeSeries(
            self.index, self.traj[idx], self.times[idx], self.values.take(idx),
            self.provenance, self.name, presorted=True,
        )

    def with_values(self, values: ValueVector, name: str | None = None) -> "TimeSeries":
        return TimeSeries(
            self.index, self.traj, self.times, values, self.provenance,
            self.name if name is None else name, presorted=True,
        )


Series = (AttributeSeries, EventSeries, IntervalSeries, TimeSeries)
RowSeries = (EventSeries, IntervalSeries, TimeSeries)


def series_kind(s) -> str:
    if isinstance(s, AttributeSeries):
        return "attribute"
    if isinstance(s, EventSeries):
        return "events"
    if isinstance(s, IntervalSeries):
        return "intervals"
    if isinstance(s, TimeSeries):
        return "timeseries"
    return "scalar"


def _first_divergence(a, b) -> tuple | None:
    """First (trajectory_id, time) where two row series' indices differ."""
    ta = a.starts if isinstance(a, IntervalSeries) else a.times
    tb = b.starts if isinstance(b, IntervalSeries) else b.times
    n = min(len(a), len(b))
    neq = (a.traj[:n] != b.traj[:n]) | (ta[:n] != tb[:n])
    if neq.any():
        i = int(np.argmax(neq))
    elif len(a) != len(b):
        i = n if n < max(len(a), len(b)) else 0
        src = a if len(a) > len(b) else b
        ts = src.starts if isinstance(src, IntervalSeries) else src.times
        return (str(src.index.ids[src.traj[i]]), int(ts[i]))
    else:
        return None
    return (str(a.index.ids[a.traj[i]]), int(ta[i]))


def _require_aligned_rows(a, b) -> None:
    if type(a) is not type(b):
        raise QueryTypeError(
            f"cannot combine {series_kind(a)} with {series_kind(b)}")
    if not a.index.same_as(b.index):
        raise AlignmentError("series belong to different trajectory universes")
    div = None
    if len(a) != len(b):
        div = _first_divergence(a, b)
    else:
        ta = a.starts if isinstance(a, IntervalSeries) else a.times
        tb = b.starts if isinstance(b, IntervalSeries) else b.times
        if not ((a.traj == b.traj).all() and (ta == tb).all()):
            div = _first_divergence(a, b)
        elif isinstance(a, IntervalSeries) and not (a.ends == b.ends).all():
            div = _first_divergence(a, b)
        else:
            return
    raise AlignmentError(
        f"misaligned series indices; first divergence at {div}", divergence=div)


def _join_timeseries_to_events(ts: TimeSeries, ev: EventSeries) -> ValueVector:
    """Look up one time-series value per event row; indices must coincide.

    The (trajectory, time) key sets of both operands must be equal; the
    time-series value is replicated across events sharing a key.
    """
    ts_key = composite_key(ts.traj, ts.times)
    ev_key = composite_key(ev.traj, ev.times)
    pos = np.searchsorted(ts_key, ev_key)
    ok = (pos < len(ts_key))
    ok[ok] = ts_key[pos[ok]] == ev_key[ok]
    if not ok.all():
        i = int(np.argmax(~ok))
        div = (str(ev.index.ids[ev.traj[i]]), int(ev.times[i]))
        raise AlignmentError(
            f"misaligned series indices; first divergence at {div}", divergence=div)
    covered = np.zeros(len(ts_key), dtype=bool)
    covered[pos] = True
    if not covered.all():
        i = int(np.argmax(~covered))
        div = (str(ts.index.ids[ts.traj[i]]), int(ts.times[i]))
        raise AlignmentError(
            f"misaligned series indices; first divergence at {div}", divergence=div)
    return ts.values.take(pos)


def _rank(x) -> int:
    if isinstance(x, Value):
        return 0
    if isinstance(x, AttributeSeries):
        return 1
    return 2


def broadcast_op(op: str, lhs, rhs):
    """Apply a scalar operator across two operands, fanning out as needed.

    Operands are ``Value`` scalars or series. Attribute values replicate to
    every row of their trajectory; row series require identical indices
    (time series and events may combine when their (trajectory, time) key
    sets coincide). The result takes the shape of the larger operand and row
    order is never changed.
    """
    if isinstance(lhs, Value) and isinstance(rhs, Value):
        return apply_scalar_op(op, lhs, rhs)

    big, small, flipped = (lhs, rhs, False) if _rank(lhs) >= _rank(rhs) else (rhs, lhs, True)

    if isinstance(big, AttributeSeries):
        if isinstance(small, Value):
            other = ValueVector.filled(small, len(big))
        else:  # attribute × attribute
            if not big.index.same_as(small.index):
                raise AlignmentError("attribute series belong to different universes")
            other = small.values
        a, b = (big.values, other) if not flipped else (other, big.values)
        return big.with_values(vector_op(op, a, b))

    # big is a row series
    if isinstance(small, Value):
        other = ValueVector.filled(small, len(big))
    elif isinstance(small, AttributeSeries):
        if not big.index.same_as(small.index):
            raise AlignmentError("series belong to different trajectory universes")
        other = small.values.take(big.traj)
    elif isinstance(big, EventSeries) and isinstance(small, TimeSeries):
        other = _join_timeseries_to_events(small, big)
    elif isinstance(big, TimeSeries) and isinstance(small, EventSeries):
        # events outrank an aligned time series: result keeps event rows
        big, small = small, big
        flipped = not flipped
        other = _join_timeseries_to_events(small, big)
    else:
        _require_aligned_rows(big, small)
        other = small.values
    a, b = (big.values, other) if not flipped else (other, big.values)
    return big.with_values(vector_op(op, a, b))
