"""
test_ext_real module
====================

Tests for ``oscillation_lab.ext_real``.

Covers:
- Ordering between finite values, INF and plain reals
- INF absorbing addition
- Text form used in tables
- ext_max / ext_min reductions
"""

import math
from fractions import Fraction

import pytest

from oscillation_lab.ext_real import INF, ZERO, ExtReal, ext_max, ext_min


def test_inf_is_above_every_finite_value():
    assert ExtReal(10**9) < INF
    assert INF > 1e300
    assert not INF < 5
    assert INF == math.inf
    assert ExtReal(3) != INF


@pytest.mark.parametrize(
    "left,right,expected",
    [
        (ExtReal(1), ExtReal(2), ExtReal(3)),
        (ExtReal(Fraction(1, 3)), Fraction(1, 6), ExtReal(Fraction(1, 2))),
        (INF, ExtReal(1), INF),
        (ExtReal(0), INF, INF),
    ],
    ids=["ints", "fractions", "inf-left", "inf-right"],
)
def test_addition(left, right, expected):
    assert left + right == expected


def test_fraction_values_stay_exact():
    v = ExtReal(Fraction(1, 3))
    assert v.value == Fraction(1, 3)
    assert v == Fraction(1, 3)
    assert v < Fraction(1, 2)


@pytest.mark.parametrize(
    "value,text",
    [(INF, "inf"), (ExtReal(Fraction(2, 3)), "2/3"), (ExtReal(0.25), "0.25")],
    ids=["inf", "fraction", "float"],
)
def test_str(value, text):
    assert str(value) == text


@pytest.mark.parametrize("bad", [-1, float("nan"), float("inf")], ids=["negative", "nan", "float-inf"])
def test_rejects_invalid_values(bad):
    with pytest.raises(ValueError):
        ExtReal(bad)


def test_ext_max_and_min():
    assert ext_max([]) == ZERO
    assert ext_max([1, ExtReal(4), 2]) == 4
    assert ext_max([1, INF, 2]).is_inf
    assert ext_min([INF, 3, ExtReal(2)]) == 2
    with pytest.raises(ValueError):
        ext_min([])


def test_to_float():
    assert INF.to_float() == math.inf
    assert ExtReal(Fraction(1, 4)).to_float() == 0.25
