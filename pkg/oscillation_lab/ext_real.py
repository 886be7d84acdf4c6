"""
ext_real module
Nonnegative extended reals: a finite value or the explicit INF variant.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import total_ordering
from numbers import Real
from typing import Iterable


@total_ordering
class ExtReal:
    """
    A nonnegative extended real number.

    Finite values keep their exact type when they are ``int`` or ``Fraction``;
    every other real is stored as a Python ``float``. ``INF`` is a separate
    variant, never a float sentinel, and compares above every finite value.

    :ivar value: The finite value, or ``None`` for INF.
    :vartype value: int, Fraction, float or None
    """

    __slots__ = ("_value",)

    def __init__(self, value: Real | None):
        if value is not None:
            if not isinstance(value, (int, Fraction)):
                value = float(value)
                if math.isnan(value) or math.isinf(value):
                    raise ValueError(f"ExtReal needs a finite value or INF, got {value!r}")
            if value < 0:
                raise ValueError(f"ExtReal is nonnegative, got {value!r}")
        self._value = value

    @classmethod
    def of(cls, value: "Real | ExtReal") -> "ExtReal":
        """
        Coerce a real or an ExtReal into an ExtReal.

        :param value: Value to coerce.
        :type value: Real or ExtReal
        :returns: The corresponding ExtReal.
        :rtype: ExtReal
        """
        if isinstance(value, ExtReal):
            return value
        return cls(value)

    @property
    def value(self):
        return self._value

    @property
    def is_inf(self) -> bool:
        return self._value is None

    def to_float(self) -> float:
        return math.inf if self._value is None else float(self._value)

    def _key(self):
        return (1, 0) if self._value is None else (0, self._value)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Real) and not isinstance(other, bool):
            if self._value is None:
                return math.isinf(other) and other > 0
            return self._value == other
        if not isinstance(other, ExtReal):
            return NotImplemented
        return self._key() == other._key()

    def __lt__(self, other: object) -> bool:
        if isinstance(other, Real):
            if math.isinf(other) and other > 0:
                return self._value is not None
            return self._value is not None and self._value < other
        if not isinstance(other, ExtReal):
            return NotImplemented
        if self._value is None:
            return False
        return other._value is None or self._value < other._value

    def __hash__(self) -> int:
        return hash(("ExtReal", self._value))

    def __add__(self, other: "Real | ExtReal") -> "ExtReal":
        other = ExtReal.of(other)
        if self.is_inf or other.is_inf:
            return INF
        return ExtReal(self._value + other._value)

    __radd__ = __add__

    def __repr__(self) -> str:
        return "ExtReal(INF)" if self._value is None else f"ExtReal({self._value!r})"

    def __str__(self) -> str:
        if self._value is None:
            return "inf"
        if isinstance(self._value, Fraction):
            return f"{self._value.numerator}/{self._value.denominator}"
        return repr(self._value)


INF = ExtReal(None)
ZERO = ExtReal(0)


def ext_max(values: Iterable["Real | ExtReal"]) -> ExtReal:
    """
    Maximum of a collection of extended reals; the empty sup is zero.

    :param values: Values to reduce.
    :type values: Iterable[Real or ExtReal]
    :returns: The maximum, or ZERO for an empty collection.
    :rtype: ExtReal
    """
    best = ZERO
    for v in values:
        v = ExtReal.of(v)
        if v.is_inf:
            return INF
        if v > best:
            best = v
    return best


def ext_min(values: Iterable["Real | ExtReal"]) -> ExtReal:
    """
    Minimum of a nonempty collection of extended reals.

    :param values: Values to reduce.
    :type values: Iterable[Real or ExtReal]
    :returns: The minimum.
    :rtype: ExtReal
    :raises ValueError: If the collection is empty.
    """
    items = [ExtReal.of(v) for v in values]
    if not items:
        raise ValueError("ext_min of an empty collection")
    return min(items)
