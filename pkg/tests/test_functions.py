"""
test_functions module
=====================

Tests for ``oscillation_lab.functions``.

Covers:
- Oracle construction and validation
- Declared-unbounded points
- rho-diameters of images and of pair groups
- Deviation, shifting and the descriptor form
- The named coordinate functions
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from oscillation_lab.errors import ArgumentError, StructuralError
from oscillation_lab.ext_real import INF, ZERO
from oscillation_lab.functions import FunctionOracle, named_function
from oscillation_lab.metric_core import EuclideanSpace, MatrixSpace, SupSequenceSpace


def test_value_count_must_match_space(line5):
    space, _ = line5
    with pytest.raises(StructuralError):
        FunctionOracle(space, [1.0, 2.0])


def test_non_finite_values_must_be_declared(line5):
    space, _ = line5
    with pytest.raises(ArgumentError):
        FunctionOracle(space, [0.0, math.inf, 0.0, 0.0, 0.0])
    f = FunctionOracle(space, [0.0, math.inf, 0.0, 0.0, 0.0], unbounded=[False, True, False, False, False])
    assert f.has_unbounded
    assert f(1) == math.inf
    assert f(0) == 0.0


def test_unbounded_points_make_sups_infinite(line5):
    space, _ = line5
    f = FunctionOracle(space, np.zeros(5), unbounded=[False, True, False, False, False])
    assert f.pair_sup(np.array([0, 1]), np.array([1, 1])).is_inf
    assert f.pair_sup(np.array([1]), np.array([1])) == ZERO
    assert f.diam([0, 1]) == INF
    assert f.diam([0, 2]) == 0
    assert f.max_group_diam(np.array([0, 2]), np.array([1, 3])).is_inf


def test_image_diameter(line5):
    _, f = line5
    assert f.diam([0, 2, 4]) == 10.0
    assert f.diam([3]) == ZERO
    assert f.pair_sup(np.array([], dtype=np.intp), np.array([], dtype=np.intp)) == ZERO


def test_group_diams(line5):
    _, f = line5
    centers, diams, infinite = f.group_diams(np.array([0, 0, 2]), np.array([1, 4, 3]))
    assert centers.tolist() == [0, 2]
    assert diams.tolist() == [10.0, 1.0]
    assert not infinite.any()
    assert f.max_group_diam(np.array([0, 0, 2]), np.array([1, 4, 3])) == 10.0
    assert f.max_group_diam(np.array([], dtype=np.intp), np.array([], dtype=np.intp)) == ZERO


def test_vector_valued_oracle():
    space = EuclideanSpace([0.0, 1.0, 2.0])
    f = FunctionOracle(space, [[0.0, 0.0], [3.0, 4.0], [1.0, 0.0]], name="curve")
    assert not f.is_real
    assert f.target == "euclidean"
    assert f.diam([0, 1, 2]) == 5.0
    _, diams, _ = f.group_diams(np.array([0, 2]), np.array([1, 1]))
    assert diams.tolist() == [5.0, pytest.approx(math.sqrt(20))]
    with pytest.raises(ArgumentError):
        f.shifted(1.0)


def test_deviation_and_shift(line5):
    space, f = line5
    g = f.shifted(np.array([0.0, 0.5, 0.0, -0.25, 0.0]), name="g")
    assert g.name == "g"
    assert f.deviation(g, [0, 1, 2, 3, 4]) == 0.5
    assert f.deviation(g, [3]) == 0.25
    assert f.deviation(g, []) == ZERO
    other = FunctionOracle(EuclideanSpace([0.0, 1.0, 2.0, 3.0, 10.0]), np.zeros(5))
    with pytest.raises(StructuralError):
        f.deviation(other, [0])


def test_exact_values_and_descriptor():
    space = SupSequenceSpace([[0], [Fraction(1, 3)], [1]])
    f = FunctionOracle.from_points(space, lambda p: p[0] * 2, name="double")
    assert f.values.dtype == object
    assert f.diam([0, 1, 2]) == Fraction(2)
    g = FunctionOracle(space, [0.0, 1.5, 0.0], unbounded=[False, False, True])
    assert f.to_descriptor() == {"type": "table", "values": ["0/1", "2/3", "2/1"]}
    assert g.to_descriptor() == {"type": "table", "values": [0.0, 1.5, "inf"]}


@pytest.mark.parametrize(
    "name,expected",
    [
        ("square", [0.0, 1.0, 4.0, 9.0, 100.0]),
        ("first_coordinate", [0.0, 1.0, 2.0, 3.0, 10.0]),
        ("zero", [0.0] * 5),
    ],
    ids=["square", "first-coordinate", "zero"],
)
def test_named_functions(line5, name, expected):
    space, _ = line5
    f = named_function(space, name)
    assert f.name == name
    assert f.values.tolist() == expected


def test_named_function_errors():
    space = MatrixSpace([[0, 1], [1, 0]])
    assert named_function(space, "zero").values.tolist() == [0.0, 0.0]
    with pytest.raises(ArgumentError):
        named_function(space, "square")
    with pytest.raises(ArgumentError):
        named_function(space, "cube")
