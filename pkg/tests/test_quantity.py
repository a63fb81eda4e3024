from fractions import Fraction

import pytest

from eca.quantity import (
    JOULES, SECONDS, WATTS, Quantity, QuantityError, joules, parse_rational,
    seconds, watts,
)


def test_parse_integer():
    assert parse_rational("42") == Fraction(42)


def test_parse_fraction():
    assert parse_rational("3/4") == Fraction(3, 4)


def test_parse_decimal_exact():
    assert parse_rational("2.5") == Fraction(5, 2)
    assert parse_rational("0.125") == Fraction(1, 8)


def test_parse_decimal_nine_digits_ok():
    assert parse_rational("0.123456789") == Fraction(123456789, 10**9)


def test_parse_decimal_ten_digits_rejected():
    with pytest.raises(QuantityError, match="fractional digits"):
        parse_rational("0.1234567891")


def test_parse_garbage_rejected():
    with pytest.raises(QuantityError):
        parse_rational("1/0")
    with pytest.raises(QuantityError):
        parse_rational("watts")


def test_addition_same_unit():
    assert (joules(1) + joules("1/2")).value == Fraction(3, 2)


def test_addition_unit_mismatch():
    with pytest.raises(QuantityError):
        joules(1) + seconds(1)


def test_power_times_time_is_energy():
    e = watts(8) * seconds(2)
    assert e.unit == JOULES
    assert e.value == 16


def test_time_times_power_is_energy():
    assert (seconds("1/3") * watts(9)).value == 3


def test_scalar_multiplication():
    assert (4 * joules("3/4")).value == 3
    assert (joules(2) * Fraction(1, 2)).value == 1


def test_disallowed_unit_product():
    with pytest.raises(QuantityError):
        joules(1) * joules(1)


def test_ratio_round_trip():
    q = Quantity.parse("7/3", WATTS)
    assert q.as_ratio() == "7/3"
    assert Quantity.parse(q.as_ratio(), WATTS) == q


def test_exactness_survives_arithmetic():
    # 0.1 as a rational is exactly 1/10; floats cannot represent this
    q = Quantity.parse("0.1", SECONDS)
    total = q
    for _ in range(9):
        total = total + q
    assert total.value == 1


def test_comparison_same_unit_only():
    assert joules(1) < joules(2)
    with pytest.raises(QuantityError):
        joules(1) < seconds(2)


def test_unknown_unit_rejected():
    with pytest.raises(QuantityError):
        Quantity(Fraction(1), "kWh")
