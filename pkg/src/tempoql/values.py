"""The scalar value system: tagged cells and typed columns.

Every cell in the system is a ``Value``: a number, text, boolean, timestamp,
duration, or the absorbing ``MISSING``. Timestamps are integer milliseconds
since the Unix epoch (UTC); durations are signed integer milliseconds. This
keeps time arithmetic exact and associative.

``ValueVector`` is the columnar counterpart used inside series: a homogeneous
numpy column plus a missing mask, with a ``mixed`` fallback (object array of
``Value``) for columns that genuinely hold several kinds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Iterable, Union

import numpy as np

from .errors import QueryTypeError

NUMBER = "number"
TEXT = "text"
BOOLEAN = "boolean"
TIMESTAMP = "timestamp"
DURATION = "duration"
MISSING_KIND = "missing"
MIXED = "mixed"

MS = {
    "seconds": 1_000,
    "minutes": 60_000,
    "hours": 3_600_000,
    "days": 86_400_000,
    "weeks": 7 * 86_400_000,
    "years": int(365.25 * 86_400_000),  # 31_557_600_000, exact in ms
}

# Sentinels for unbounded window ends; comfortably clear of any epoch-ms
# value while leaving headroom for duration arithmetic.
T_NEG_INF = -(2**62)
T_POS_INF = 2**62


@dataclass(frozen=True)
class Value:
    """A tagged scalar cell."""

    kind: str
    payload: Union[float, str, bool, int, None] = None

    def is_missing(self) -> bool:
        return self.kind == MISSING_KIND

    def __repr__(self) -> str:
        if self.kind == MISSING_KIND:
            return "Value(missing)"
        return f"Value({self.kind}, {self.payload!r})"


MISSING = Value(MISSING_KIND)


def number(x: float) -> Value:
    return Value(NUMBER, float(x))


def text(s: str) -> Value:
    return Value(TEXT, s)


def boolean(b: bool) -> Value:
    return Value(BOOLEAN, bool(b))


def timestamp(ms: int) -> Value:
    return Value(TIMESTAMP, int(ms))


def duration(ms: int) -> Value:
    return Value(DURATION, int(ms))


def parse_timestamp(textval: str) -> int:
    """Parse an ISO-8601 timestamp (date-only allowed) to epoch milliseconds.

    Naive timestamps are taken as UTC. Raises ValueError on bad input.
    """
    s = textval.strip()
    if not s:
        raise ValueError("empty timestamp")
    if s.endswith("Z"):
        s = s[:-1] + "+00:00"
    dt = datetime.fromisoformat(s)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp() * 1000)


def format_timestamp(ms: int) -> str:
    dt = datetime.fromtimestamp(ms / 1000.0, tz=timezone.utc)
    if ms % 1000 == 0:
        return dt.strftime("%Y-%m-%dT%H:%M:%SZ")
    return dt.strftime("%Y-%m-%dT%H:%M:%S.%f")[:-3] + "Z"


def convert_duration(v: Value, unit: str) -> Value:
    """Express a duration value in ``unit`` as a number.

    A year is 365.25 days and a week 7 days; months are not a unit.
    """
    if v.is_missing():
        return MISSING
    if v.kind != DURATION:
        raise QueryTypeError(f"cannot convert {v.kind} to {unit}; expected a duration")
    if unit not in MS:
        raise QueryTypeError(f"unknown duration unit {unit!r}")
    return number(v.payload / MS[unit])


ARITH_OPS = {"+", "-", "*", "/", "^"}
CMP_OPS = {"=", "!=", "<", "<=", ">", ">="}
BOOL_OPS = {"and", "or"}


def _type_error(op: str, lhs: Value, rhs: Value) -> QueryTypeError:
    return QueryTypeError(
        f"operator {op!r} is not defined between {lhs.kind} and {rhs.kind}"
    )


def apply_scalar_op(op: str, lhs: Value, rhs: Value) -> Value:
    """Apply an arithmetic, comparison, or boolean operator to two cells.

    Missing is absorbing: if either side is missing the result is missing.
    Division by zero (and other non-finite numeric results) yields missing
    rather than an error so downstream ``where`` clauses can filter it.
    """
    if lhs.is_missing() or rhs.is_missing():
        return MISSING
    lk, rk = lhs.kind, rhs.kind
    a, b = lhs.payload, rhs.payload

    if op in BOOL_OPS:
        if lk != BOOLEAN or rk != BOOLEAN:
            raise _type_error(op, lhs, rhs)
        return boolean((a and b) if op == "and" else (a or b))

    if op in CMP_OPS:
        if lk != rk:
            raise _type_error(op, lhs, rhs)
        if op == "=":
            return boolean(a == b)
        if op == "!=":
            return boolean(a != b)
        if lk not in (NUMBER, TIMESTAMP, DURATION):
            raise _type_error(op, lhs, rhs)
        return boolean({"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op])

    if op == "+":
        if lk == NUMBER and rk == NUMBER:
            return _finite(a + b)
        if lk == TIMESTAMP and rk == DURATION:
            return timestamp(a + b)
        if lk == DURATION and rk == TIMESTAMP:
            return timestamp(a + b)
        if lk == DURATION and rk == DURATION:
            return duration(a + b)
        raise _type_error(op, lhs, rhs)
    if op == "-":
        if lk == NUMBER and rk == NUMBER:
            return _finite(a - b)
        if lk == TIMESTAMP and rk == DURATION:
            return timestamp(a - b)
        if lk == TIMESTAMP and rk == TIMESTAMP:
            return duration(a - b)
        if lk == DURATION and rk == DURATION:
            return duration(a - b)
        raise _type_error(op, lhs, rhs)
    if op == "*":
        if lk == NUMBER and rk == NUMBER:
            return _finite(a * b)
        if lk == DURATION and rk == NUMBER:
            return duration(round(a * b))
        if lk == NUMBER and rk == DURATION:
            return duration(round(a * b))
        raise _type_error(op, lhs, rhs)
    if op == "/":
        if lk == NUMBER and rk == NUMBER:
            return MISSING if b == 0 else _finite(a / b)
        if lk == DURATION and rk == NUMBER:
            return MISSING if b == 0 else duration(round(a / b))
        raise _type_error(op, lhs, rhs)
    if op == "^":
        if lk == NUMBER and rk == NUMBER:
            try:
                return _finite(a**b)
            except (OverflowError, ZeroDivisionError, ValueError):
                return MISSING
        raise _type_error(op, lhs, rhs)
    raise QueryTypeError(f"unknown operator {op!r}")


def _finite(x) -> Value:
    if isinstance(x, complex) or not math.isfinite(x):
        return MISSING
    return number(x)


def apply_not(v: Value) -> Value:
    if v.is_missing():
        return MISSING
    if v.kind != BOOLEAN:
        raise QueryTypeError(f"'not' requires a boolean, got {v.kind}")
    return boolean(not v.payload)


def apply_neg(v: Value) -> Value:
    if v.is_missing():
        return MISSING
    if v.kind == NUMBER:
        return number(-v.payload)
    if v.kind == DURATION:
        return duration(-v.payload)
    raise QueryTypeError(f"unary minus requires a number or duration, got {v.kind}")


_KIND_DTYPE = {
    NUMBER: np.float64,
    BOOLEAN: np.bool_,
    TIMESTAMP: np.int64,
    DURATION: np.int64,
    TEXT: object,
    MIXED: object,
}


class ValueVector:
    """A column of cells with a uniform kind and an explicit missing mask.

    ``kind`` is one of number/text/boolean/timestamp/duration/mixed. In the
    mixed case ``data`` is an object array of ``Value`` scalars; otherwise it
    is a plain numpy array of payloads (contents under the mask are
    unspecified). Vectors are treated as immutable after construction.
    """

    __slots__ = ("kind", "data", "missing")

    def __init__(self, kind: str, data: np.ndarray, missing: np.ndarray):
        data = np.asarray(data, dtype=_KIND_DTYPE[kind])
        missing = np.asarray(missing, dtype=bool)
        if data.shape != missing.shape:
            raise ValueError("data and missing mask must have the same length")
        if kind == NUMBER:
            bad = ~np.isfinite(data)
            if bad.any():
                missing = missing | bad
                data = np.where(bad, 0.0, data)
        self.kind = kind
        self.data = data
        self.missing = missing

    def __len__(self) -> int:
        return len(self.data)

    # -- constructors -----------------------------------------------------

    @staticmethod
    def empty(kind: str = NUMBER) -> "ValueVector":
        return ValueVector(kind, np.empty(0, dtype=_KIND_DTYPE[kind]), np.empty(0, dtype=bool))

    @staticmethod
    def all_missing(n: int, kind: str = NUMBER) -> "ValueVector":
        return ValueVector(kind, np.zeros(n, dtype=_KIND_DTYPE[kind]), np.ones(n, dtype=bool))

    @staticmethod
    def from_numbers(xs, missing=None) -> "ValueVector":
        data = np.asarray(xs, dtype=np.float64)
        mask = np.isnan(data) if missing is None else np.asarray(missing, bool) | np.isnan(data)
        return ValueVector(NUMBER, np.nan_to_num(data), mask)

    @staticmethod
    def from_timestamps(xs, missing=None) -> "ValueVector":
        data = np.asarray(xs, dtype=np.int64)
        mask = np.zeros(len(data), bool) if missing is None else np.asarray(missing, bool)
        return ValueVector(TIMESTAMP, data, mask)

    @staticmethod
    def from_durations(xs, missing=None) -> "ValueVector":
        data = np.asarray(xs, dtype=np.int64)
        mask = np.zeros(len(data), bool) if missing is None else np.asarray(missing, bool)
        return ValueVector(DURATION, data, mask)

    @staticmethod
    def from_booleans(xs, missing=None) -> "ValueVector":
        data = np.asarray(xs, dtype=bool)
        mask = np.zeros(len(data), bool) if missing is None else np.asarray(missing, bool)
        return ValueVector(BOOLEAN, data, mask)

    @staticmethod
    def from_texts(xs, missing=None) -> "ValueVector":
        data = np.asarray(list(xs), dtype=object)
        if missing is None:
            mask = np.array([x is None for x in data], dtype=bool)
            data = np.array(["" if x is None else x for x in data], dtype=object)
        else:
            mask = np.asarray(missing, bool)
        return ValueVector(TEXT, data, mask)

    @staticmethod
    def from_values(values: Iterable[Value]) -> "ValueVector":
        """Build from scalar cells, collapsing to a homogeneous kind if possible."""
        values = list(values)
        kinds = {v.kind for v in values if not v.is_missing()}
        mask = np.array([v.is_missing() for v in values], dtype=bool)
        if len(kinds) == 1:
            (k,) = kinds
            fill = "" if k == TEXT else 0
            data = np.array(
                [fill if v.is_missing() else v.payload for v in values],
                dtype=_KIND_DTYPE[k],
            )
            return ValueVector(k, data, mask)
        if not kinds:
            return ValueVector.all_missing(len(values))
        data = np.array([MISSING if v.is_missing() else v for v in values], dtype=object)
        return ValueVector(MIXED, data, mask)

    # -- access ------------------------------------------------------------

    def get(self, i: int) -> Value:
        if self.missing[i]:
            return MISSING
        if self.kind == MIXED:
            return self.data[i]
        payload = self.data[i]
        if self.kind == NUMBER:
            return number(float(payload))
        if self.kind == BOOLEAN:
            return boolean(bool(payload))
        if self.kind == TEXT:
            return text(payload)
        return Value(self.kind, int(payload))

    def to_values(self) -> list[Value]:
        return [self.get(i) for i in range(len(self))]

    def take(self, idx) -> "ValueVector":
        out = ValueVector(self.kind, self.data[idx], self.missing[idx])
        if self.kind == MIXED:
            return out._narrowed()
        return out

    def _narrowed(self) -> "ValueVector":
        """Collapse a mixed vector whose live cells share one kind."""
        if self.kind != MIXED:
            return self
        return ValueVector.from_values(self.to_values())

    def repeat(self, counts) -> "ValueVector":
        return ValueVector(self.kind, np.repeat(self.data, counts), np.repeat(self.missing, counts))

    @staticmethod
    def concat(vectors: list["ValueVector"]) -> "ValueVector":
        vectors = [v for v in vectors]
        if not vectors:
            return ValueVector.empty()
        kinds = {v.kind for v in vectors if len(v) and not v.missing.all()}
        if len(kinds) <= 1 and MIXED not in kinds:
            k = kinds.pop() if kinds else vectors[0].kind
            data = np.concatenate([_cast_for_concat(v, k) for v in vectors])
            mask = np.concatenate([v.missing for v in vectors])
            return ValueVector(k, data, mask)
        values: list[Value] = []
        for v in vectors:
            values.extend(v.to_values())
        return ValueVector.from_values(values)

    @staticmethod
    def filled(v: Value, n: int) -> "ValueVector":
        """A length-``n`` vector holding ``n`` copies of one cell."""
        if v.is_missing():
            return ValueVector.all_missing(n)
        data = np.full(n, v.payload, dtype=_KIND_DTYPE[v.kind])
        return ValueVector(v.kind, data, np.zeros(n, dtype=bool))

    def is_truthy(self) -> np.ndarray:
        """Boolean array: non-missing and strictly true. Requires boolean kind."""
        if self.kind == BOOLEAN:
            return self.data & ~self.missing
        if self.kind == MIXED:
            out = np.zeros(len(self), dtype=bool)
            for i, v in enumerate(self.to_values()):
                if not v.is_missing():
                    if v.kind != BOOLEAN:
                        raise QueryTypeError(f"expected booleans, got {v.kind}")
                    out[i] = v.payload
            return out
        if self.missing.all():
            return np.zeros(len(self), dtype=bool)
        raise QueryTypeError(f"expected booleans, got {self.kind}")


def _cast_for_concat(v: ValueVector, kind: str) -> np.ndarray:
    if v.kind == kind:
        return v.data
    # all-missing vectors can adopt any kind
    return np.zeros(len(v), dtype=_KIND_DTYPE[kind]) if kind != TEXT else np.array([""] * len(v), dtype=object)


def vector_op(op: str, lhs: ValueVector, rhs: ValueVector) -> ValueVector:
    """Elementwise operator over two equally-sized vectors."""
    n = len(lhs)
    if len(rhs) != n:
        raise ValueError("vector_op requires equal lengths")
    both = lhs.missing | rhs.missing
    lk, rk = lhs.kind, rhs.kind

    # All-missing operands never constrain the result kind.
    if lhs.missing.all() or rhs.missing.all():
        kind = BOOLEAN if (op in CMP_OPS or op in BOOL_OPS) else NUMBER
        return ValueVector.all_missing(n, kind)

    if MIXED in (lk, rk):
        return _vector_op_slow(op, lhs, rhs)

    if op in BOOL_OPS:
        if lk != BOOLEAN or rk != BOOLEAN:
            raise _type_error(op, Value(lk), Value(rk))
        data = (lhs.data & rhs.data) if op == "and" else (lhs.data | rhs.data)
        return ValueVector(BOOLEAN, data, both)

    if op in CMP_OPS:
        if lk != rk:
            raise _type_error(op, Value(lk), Value(rk))
        if op in ("=", "!="):
            if lk == TEXT:
                eq = np.array([a == b for a, b in zip(lhs.data, rhs.data)], dtype=bool)
            else:
                eq = lhs.data == rhs.data
            data = eq if op == "=" else ~eq
            return ValueVector(BOOLEAN, data, both)
        if lk not in (NUMBER, TIMESTAMP, DURATION):
            raise _type_error(op, Value(lk), Value(rk))
        cmp = {"<": np.less, "<=": np.less_equal, ">": np.greater, ">=": np.greater_equal}[op]
        return ValueVector(BOOLEAN, cmp(lhs.data, rhs.data), both)

    # arithmetic
    if op == "+":
        if (lk, rk) == (NUMBER, NUMBER):
            return ValueVector(NUMBER, lhs.data + rhs.data, both)
        if (lk, rk) in ((TIMESTAMP, DURATION), (DURATION, TIMESTAMP)):
            return ValueVector(TIMESTAMP, lhs.data + rhs.data, both)
        if (lk, rk) == (DURATION, DURATION):
            return ValueVector(DURATION, lhs.data + rhs.data, both)
    elif op == "-":
        if (lk, rk) == (NUMBER, NUMBER):
            return ValueVector(NUMBER, lhs.data - rhs.data, both)
        if (lk, rk) == (TIMESTAMP, DURATION):
            return ValueVector(TIMESTAMP, lhs.data - rhs.data, both)
        if (lk, rk) == (TIMESTAMP, TIMESTAMP):
            return ValueVector(DURATION, lhs.data - rhs.data, both)
        if (lk, rk) == (DURATION, DURATION):
            return ValueVector(DURATION, lhs.data - rhs.data, both)
    elif op == "*":
        if (lk, rk) == (NUMBER, NUMBER):
            return ValueVector(NUMBER, lhs.data * rhs.data, both)
        if (lk, rk) == (DURATION, NUMBER):
            return ValueVector(DURATION, np.round(lhs.data * rhs.data).astype(np.int64), both)
        if (lk, rk) == (NUMBER, DURATION):
            return ValueVector(DURATION, np.round(lhs.data * rhs.data).astype(np.int64), both)
    elif op == "/":
        if (lk, rk) == (NUMBER, NUMBER):
            zero = rhs.data == 0
            with np.errstate(divide="ignore", invalid="ignore"):
                data = np.where(zero, 0.0, lhs.data / np.where(zero, 1.0, rhs.data))
            return ValueVector(NUMBER, data, both | zero)
        if (lk, rk) == (DURATION, NUMBER):
            zero = rhs.data == 0
            with np.errstate(divide="ignore", invalid="ignore"):
                data = np.round(lhs.data / np.where(zero, 1.0, rhs.data)).astype(np.int64)
            return ValueVector(DURATION, data, both | zero)
    elif op == "^":
        if (lk, rk) == (NUMBER, NUMBER):
            with np.errstate(all="ignore"):
                data = np.power(lhs.data, rhs.data)
            return ValueVector(NUMBER, data, both)  # non-finite handled by ctor
    raise _type_error(op, Value(lk), Value(rk))


def _vector_op_slow(op: str, lhs: ValueVector, rhs: ValueVector) -> ValueVector:
    out = [apply_scalar_op(op, a, b) for a, b in zip(lhs.to_values(), rhs.to_values())]
    return ValueVector.from_values(out)


def vector_not(v: ValueVector) -> ValueVector:
    if v.kind == MIXED or (v.kind != BOOLEAN and not v.missing.all()):
        return ValueVector.from_values([apply_not(x) for x in v.to_values()])
    if v.missing.all():
        return ValueVector.all_missing(len(v), BOOLEAN)
    return ValueVector(BOOLEAN, ~v.data, v.missing)


def vector_neg(v: ValueVector) -> ValueVector:
    if v.missing.all():
        return ValueVector.all_missing(len(v), v.kind if v.kind in (NUMBER, DURATION) else NUMBER)
    if v.kind == NUMBER:
        return ValueVector(NUMBER, -v.data, v.missing)
    if v.kind == DURATION:
        return ValueVector(DURATION, -v.data, v.missing)
    return ValueVector.from_values([apply_neg(x) for x in v.to_values()])
