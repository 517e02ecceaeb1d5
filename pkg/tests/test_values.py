import math

import pytest

from tempoql.errors import QueryTypeError
from tempoql.values import (
    MISSING,
    MS,
    apply_scalar_op,
    boolean,
    convert_duration,
    duration,
    number,
    parse_timestamp,
    text,
    timestamp,
)

T0 = parse_timestamp("2000-01-01T00:00:00Z")
T1 = parse_timestamp("2000-01-02T00:00:00Z")


def test_number_arithmetic():
    assert apply_scalar_op("+", number(2), number(3)) == number(5)
    assert apply_scalar_op("^", number(2), number(10)) == number(1024)


def test_timestamp_minus_timestamp_is_duration():
    assert apply_scalar_op("-", timestamp(T1), timestamp(T0)) == duration(86_400_000)


def test_timestamp_plus_duration():
    assert apply_scalar_op("+", timestamp(T0), duration(3_600_000)) == timestamp(T0 + 3_600_000)
    assert apply_scalar_op("-", timestamp(T1), duration(86_400_000)) == timestamp(T0)


def test_missing_absorbs_everything():
    ops = ["+", "-", "*", "/", "^", "=", "!=", "<", "<=", ">", ">=", "and", "or"]
    operands = [number(1), text("x"), boolean(True), timestamp(T0), duration(5)]
    for op in ops:
        for v in operands:
            assert apply_scalar_op(op, MISSING, v) is MISSING
            assert apply_scalar_op(op, v, MISSING) is MISSING
    assert apply_scalar_op(">", MISSING, number(45)) is MISSING


def test_division_by_zero_yields_missing():
    assert apply_scalar_op("/", number(1), number(0)) is MISSING
    assert apply_scalar_op("/", duration(1000), number(0)) is MISSING


def test_cross_kind_arithmetic_is_a_type_error():
    with pytest.raises(QueryTypeError) as exc:
        apply_scalar_op("+", number(1), text("a"))
    assert "number" in str(exc.value) and "text" in str(exc.value)
    with pytest.raises(QueryTypeError):
        apply_scalar_op("*", timestamp(T0), timestamp(T1))
    with pytest.raises(QueryTypeError):
        apply_scalar_op("and", number(1), boolean(True))


def test_duration_scaling():
    assert apply_scalar_op("*", duration(MS["hours"]), number(2)) == duration(2 * MS["hours"])
    assert apply_scalar_op("/", duration(MS["days"]), number(2)) == duration(12 * MS["hours"])


def test_timestamp_algebra_is_associative():
    t, d1, d2 = timestamp(T0), duration(7_000_123), duration(986_543_210)
    lhs = apply_scalar_op("+", apply_scalar_op("+", t, d1), d2)
    rhs = apply_scalar_op("+", t, apply_scalar_op("+", d1, d2))
    assert lhs == rhs


def test_convert_duration():
    assert convert_duration(duration(86_400_000), "days") == number(1.0)
    two_years = duration(2 * int(365.25 * 86_400_000))
    assert convert_duration(two_years, "years") == number(2.0)
    assert convert_duration(duration(90_000), "minutes") == number(1.5)
    assert convert_duration(MISSING, "days") is MISSING
    with pytest.raises(QueryTypeError):
        convert_duration(duration(1), "fortnights")
    with pytest.raises(QueryTypeError):
        convert_duration(number(1), "days")


def test_boolean_ops_require_booleans():
    assert apply_scalar_op("and", boolean(True), boolean(False)) == boolean(False)
    assert apply_scalar_op("or", boolean(False), boolean(True)) == boolean(True)
    with pytest.raises(QueryTypeError):
        apply_scalar_op("or", text("yes"), boolean(True))


def test_comparisons():
    assert apply_scalar_op("=", text("a"), text("a")) == boolean(True)
    assert apply_scalar_op("<", duration(5), duration(9)) == boolean(True)
    assert apply_scalar_op("<=", timestamp(T0), timestamp(T1)) == boolean(True)
    with pytest.raises(QueryTypeError):
        apply_scalar_op("<", text("a"), text("b"))


def test_overflow_becomes_missing():
    assert apply_scalar_op("^", number(10), number(10_000)) is MISSING
    assert not math.isfinite(1e308 * 10)
    assert apply_scalar_op("*", number(1e308), number(10)) is MISSING
