"""Small protocol helpers for coefficient rings.

Coefficients are either Python rationals (``int``/``Fraction``) or objects from
this package that implement ``unit_inverse()`` and ``one()``.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational


class NonUnitError(ArithmeticError):
    """Raised when an element that must be a unit is not invertible."""


def is_rational(x) -> bool:
    return isinstance(x, Rational)


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not an exact rational: {x!r}")


def unit_inverse(x):
    if is_rational(x):
        if x == 0:
            raise NonUnitError("zero is not a unit")
        return 1 / as_fraction(x)
    inv = getattr(x, "unit_inverse", None)
    if inv is None:
        raise NonUnitError(f"cannot invert {type(x).__name__}")
    return inv()


def one_like(x):
    if is_rational(x):
        return Fraction(1)
    return x.one()


def is_zero(x) -> bool:
    if is_rational(x):
        return x == 0
    return x.is_zero()
