"""
Exact dyadic arithmetic.

Every scale in the construction (2^-λ, 2^-k, 2^-q) and every checkpoint time is a
dyadic rational, so the exact identities are checked without rounding.
"""
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
import math
from typing import Optional, Sequence, Tuple, Union

from ..errors import ConstructionError


@total_ordering
@dataclass(frozen=True, eq=False)
class DyadicRational:
    """
    numerator · 2^(-exponent)

    The representation is not required to be reduced: equality, ordering and hashing
    compare values, so ``DyadicRational(2, 2) == DyadicRational(1, 1)``.
    """

    numerator: int
    exponent: int = 0

    def __post_init__(self):
        if isinstance(self.numerator, bool) or not isinstance(self.numerator, int):
            raise ConstructionError(f"numerator must be an integer. Got {self.numerator!r}")
        if not isinstance(self.exponent, int) or self.exponent < 0:
            raise ConstructionError(f"exponent must be a non-negative integer. Got {self.exponent!r}")

    @classmethod
    def from_value(cls, value: "Scalar") -> "DyadicRational":
        """Reduced representation of an int, binary float, Fraction or DyadicRational."""
        if isinstance(value, DyadicRational):
            frac = value.value
        else:
            try:
                frac = Fraction(value)
            except (TypeError, ValueError) as exc:
                raise ConstructionError(f"not a finite rational: {value!r}") from exc
        den = frac.denominator
        if den & (den - 1):
            raise ConstructionError(f"{value!r} is not dyadic (denominator {den})")
        return cls(frac.numerator, den.bit_length() - 1)

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.exponent)

    def canonical(self) -> "DyadicRational":
        return DyadicRational.from_value(self.value)

    def scale(self, k: int) -> "DyadicRational":
        """Multiply by 2^k exactly (k may be negative)."""
        if k >= 0:
            return DyadicRational.from_value(self.value * (1 << k))
        return DyadicRational.from_value(self.value / (1 << -k))

    # arithmetic ----------------------------------------------------------
    def _coerce(self, other) -> Optional[Fraction]:
        if isinstance(other, DyadicRational):
            return other.value
        if isinstance(other, bool):
            return None
        if isinstance(other, (int, Fraction, float)):
            return Fraction(other)
        return None

    def __add__(self, other):
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return DyadicRational.from_value(self.value + rhs)

    __radd__ = __add__

    def __sub__(self, other):
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return DyadicRational.from_value(self.value - rhs)

    def __rsub__(self, other):
        lhs = self._coerce(other)
        if lhs is None:
            return NotImplemented
        return DyadicRational.from_value(lhs - self.value)

    def __mul__(self, other):
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return DyadicRational.from_value(self.value * rhs)

    __rmul__ = __mul__

    def __neg__(self):
        return DyadicRational(-self.numerator, self.exponent)

    def __abs__(self):
        return DyadicRational(abs(self.numerator), self.exponent)

    # comparison ----------------------------------------------------------
    def __eq__(self, other):
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return self.value == rhs

    def __lt__(self, other):
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return self.value < rhs

    def __hash__(self):
        return hash(self.value)

    def __float__(self):
        return float(self.value)

    def __floor__(self):
        return self.numerator >> self.exponent

    def __repr__(self):
        return f"DyadicRational({self.numerator}, {self.exponent})"

    def __str__(self):
        return str(self.value)


Scalar = Union[int, float, Fraction, DyadicRational]
DyadicPoint = Tuple[DyadicRational, DyadicRational]


def is_exact(value) -> bool:
    """True for int / Fraction / DyadicRational (bool excluded)."""
    return isinstance(value, (int, Fraction, DyadicRational)) and not isinstance(value, bool)


def to_fraction(value: Scalar) -> Fraction:
    if isinstance(value, DyadicRational):
        return value.value
    return Fraction(value)


def exact_point(x: Sequence) -> Optional[Tuple[Fraction, Fraction]]:
    """Fraction coordinates of ``x`` when both are exact, otherwise None."""
    if len(x) != 2:
        raise ConstructionError(f"point must have two coordinates. Got {x!r}")
    if is_exact(x[0]) and is_exact(x[1]):
        return to_fraction(x[0]), to_fraction(x[1])
    return None


def restore_point(x: Tuple[Fraction, Fraction], template: Sequence) -> tuple:
    """Return ``x`` as DyadicRationals if ``template`` used them, else as Fractions."""
    if any(isinstance(c, DyadicRational) for c in template):
        return DyadicRational.from_value(x[0]), DyadicRational.from_value(x[1])
    return x


def dyadic(value: Scalar) -> DyadicRational:
    return DyadicRational.from_value(value)


def dyadic_point(x1: Scalar, x2: Scalar) -> DyadicPoint:
    return DyadicRational.from_value(x1), DyadicRational.from_value(x2)


def pow2(k: int) -> Fraction:
    """2^k as an exact Fraction."""
    return Fraction(1 << k) if k >= 0 else Fraction(1, 1 << -k)


def log2_exact(value: Fraction) -> Optional[int]:
    """k with value == 2^k, or None."""
    if value <= 0:
        return None
    num, den = value.numerator, value.denominator
    if num == 1 and not den & (den - 1):
        return -(den.bit_length() - 1)
    if den == 1 and not num & (num - 1):
        return num.bit_length() - 1
    return None


def floor_scaled(value: Fraction, k: int) -> int:
    """floor(2^k · value) exactly."""
    return math.floor(value * pow2(k))
