"""Exact rational quantities with physical unit tags.

All energy (J), power (J/s) and time (s) values in the toolkit are exact
rationals; no float ever enters energy arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

JOULES = "J"
WATTS = "J/s"
SECONDS = "s"

_UNITS = (JOULES, WATTS, SECONDS)

# Decimal literals with more fractional digits than this do not round-trip
# reliably through hand-written model files; reject them at load time.
MAX_DECIMAL_DIGITS = 9


class QuantityError(ValueError):
    pass


def parse_rational(text: str) -> Fraction:
    """Parse "n", "n/d" or a decimal literal into an exact Fraction.

    Decimal literals are limited to MAX_DECIMAL_DIGITS fractional digits so
    that every accepted literal converts exactly.
    """
    text = text.strip()
    if "." in text:
        frac_part = text.split(".", 1)[1]
        if len(frac_part) > MAX_DECIMAL_DIGITS:
            raise QuantityError(
                f"decimal literal {text!r} has more than "
                f"{MAX_DECIMAL_DIGITS} fractional digits; "
                f"write it as a fraction n/d instead"
            )
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise QuantityError(f"not a rational number: {text!r}") from exc


@dataclass(frozen=True)
class Quantity:
    """An exact rational magnitude tagged with one of the units J, J/s, s."""

    value: Fraction
    unit: str

    def __post_init__(self) -> None:
        if self.unit not in _UNITS:
            raise QuantityError(f"unknown unit {self.unit!r}")
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))

    @classmethod
    def parse(cls, text: str, unit: str) -> "Quantity":
        return cls(parse_rational(text), unit)

    def __add__(self, other: "Quantity") -> "Quantity":
        if not isinstance(other, Quantity):
            return NotImplemented
        if self.unit != other.unit:
            raise QuantityError(f"cannot add {self.unit} and {other.unit}")
        return Quantity(self.value + other.value, self.unit)

    def __mul__(self, other):
        if isinstance(other, Quantity):
            pair = {self.unit, other.unit}
            if pair == {WATTS, SECONDS}:
                return Quantity(self.value * other.value, JOULES)
            raise QuantityError(f"cannot multiply {self.unit} by {other.unit}")
        if isinstance(other, (int, Fraction)):
            return Quantity(self.value * other, self.unit)
        return NotImplemented

    __rmul__ = __mul__

    def __lt__(self, other: "Quantity") -> bool:
        self._check_same(other)
        return self.value < other.value

    def __le__(self, other: "Quantity") -> bool:
        self._check_same(other)
        return self.value <= other.value

    def _check_same(self, other: "Quantity") -> None:
        if not isinstance(other, Quantity) or other.unit != self.unit:
            raise QuantityError(f"cannot compare {self} with {other!r}")

    def is_negative(self) -> bool:
        return self.value < 0

    def is_zero(self) -> bool:
        return self.value == 0

    def as_ratio(self) -> str:
        """Canonical "n/d" form (denominator always printed)."""
        return f"{self.value.numerator}/{self.value.denominator}"

    def approx(self) -> float:
        return float(self.value)

    def __str__(self) -> str:
        return f"{self.as_ratio()} {self.unit}"


def joules(value) -> Quantity:
    return Quantity(Fraction(value), JOULES)


def watts(value) -> Quantity:
    return Quantity(Fraction(value), WATTS)


def seconds(value) -> Quantity:
    return Quantity(Fraction(value), SECONDS)


ZERO_J = joules(0)
ZERO_W = watts(0)
ZERO_S = seconds(0)
