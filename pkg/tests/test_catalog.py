"""
test_catalog module
===================

Tests for ``oscillation_lab.catalog``.

Covers:
- Point counts, ids and function values of each builder
- Named subsets and sequences
- Parameter validation and the registry
- The metric transform of an instance
"""

import numpy as np
import pytest

from oscillation_lab.catalog import (
    CATALOG,
    DEFAULT_PARAMETERS,
    apply_metric_transform,
    build,
    build_comb,
    build_cross,
    build_isolated_ladder,
    build_real_line,
    build_tents,
    tent,
)
from oscillation_lab.errors import ArgumentError
from oscillation_lab.metric_core import MatrixSpace


def test_comb_layout(comb8):
    space = comb8.space
    assert len(space) == 8**3 + 1 + 8 * 8**2
    assert comb8.parameters["resolution_h"] == 1 / 64
    axis = comb8.subset("axis")
    assert len(axis) == 513
    assert space.points[512].tolist() == [0.0, 8.0]
    f = comb8.function("f")
    assert f.values[axis.indices].max() == 0
    # column 1 follows the axis, then column 2 where f = 1 from k = 4 on
    assert space.points[513].tolist() == [1.0, 1.0]
    assert space.points[577].tolist() == [0.5, 0.5]
    assert f.values[577:582].tolist() == [0.0, 0.0, 0.0, 1.0, 1.0]
    assert len(comb8.subset("column_2")) == 16
    assert len(comb8.subset("columns")) == 512


def test_comb_sequences(comb8):
    perturbed = comb8.sequences["perturbed"]
    assert len(perturbed) == 8
    f = comb8.function("f")
    top = 512
    assert perturbed.term(2).values[top] - f.values[top] == pytest.approx(0.5)
    assert perturbed.term(3).values[0] == 0.0
    truncations = comb8.set_sequences["axis_truncations"]
    assert len(truncations.term(1)) == 65
    assert truncations.limit_candidate == comb8.subset("axis")
    assert comb8.set_sequences["columns"].term(3) == comb8.subset("column_3")


def test_cross_band():
    inst = build_cross(4, 0.5)
    assert len(inst.space) == 45
    assert len(inst.subset("A")) == 17
    pts = inst.space.points
    assert np.all(np.minimum(pts[:, 0], pts[:, 1]) <= 1.0)
    assert inst.function("f").values.max() == 4.0
    assert len(inst.subset("strip")) == len(inst.space)
    assert "whole" not in inst.subsets
    assert inst.parameters["band"] == 1.0


def test_tents(tents64):
    assert len(tents64.space) == 1025
    assert tents64.parameters["delta_depth"] == 6
    seq = tents64.sequences["tents"]
    assert seq.term(4).values[128] == 1.0
    assert seq.term(4).values[256] == 0.0
    assert tent(2, np.array([0.0, 0.25, 0.5, 1.0])).tolist() == [0.0, 1.0, 0.0, 0.0]
    assert tents64.subset("away").indices[0] == 512


def test_tents_warn_about_off_grid_peaks(caplog):
    build_tents(3, 0.25)
    assert "fall off the grid" in caplog.text


def test_bumps(bumps12):
    assert len(bumps12.space) == 433
    assert bumps12.space.exact
    assert bumps12.product_net.K == 12
    assert len(bumps12.sequences["diagonal"]) == 12


def test_real_line(real_line50):
    assert len(real_line50.space) == 2001
    assert len(real_line50.set_sequences["exhaustion"]) == 50
    assert len(real_line50.subset("A_1")) == 41
    assert real_line50.function("f").values[0] == pytest.approx(2500.0)
    assert len(build_real_line(20, 0.05, terms=16).sequences["square"]) == 16


def test_isolated_ladder(ladder50):
    space = ladder50.space
    assert len(space) == 50 + 49
    assert space.points[:3, 0].tolist() == [1.0, 2.0, 3.0]
    assert space.points[50, 0] == 2.5
    assert ladder50.subset("A").indices.tolist() == list(range(1, 50))
    assert space.resolution_h == 0.0


@pytest.mark.parametrize(
    "builder,params",
    [
        (build_comb, {"M": 3}),
        (build_cross, {"T": 0, "pitch": 0.5}),
        (build_tents, {"L": 0, "pitch": 0.1}),
        (build_tents, {"L": 4, "pitch": 2.0}),
        (build_real_line, {"L": -1.0}),
        (build_isolated_ladder, {"K": 2}),
    ],
    ids=["comb", "cross", "tents-L", "tents-pitch", "real-line", "ladder"],
)
def test_builder_validation(builder, params):
    with pytest.raises(ArgumentError):
        builder(**params)


def test_registry():
    assert set(CATALOG) == set(DEFAULT_PARAMETERS)
    inst = build("isolated_ladder", K=5)
    assert inst.parameters["K"] == 5
    with pytest.raises(ArgumentError):
        build("moebius")
    with pytest.raises(ArgumentError):
        build("comb", width=3)


def test_unknown_names(comb8):
    with pytest.raises(ArgumentError):
        comb8.subset("spine")
    with pytest.raises(ArgumentError):
        comb8.function("g")


def test_builders_are_deterministic():
    a, b = build_cross(4, 0.5), build_cross(4, 0.5)
    assert np.array_equal(a.space.points, b.space.points)
    assert np.array_equal(a.function("f").values, b.function("f").values)


def test_metric_transform_carries_everything():
    inst = apply_metric_transform(build_comb(4), "f")
    assert inst.name == "comb_transformed"
    assert isinstance(inst.space, MatrixSpace)
    assert inst.parameters["transformed_by"] == "f"
    assert inst.subset("axis").space is inst.space
    assert inst.sequences["perturbed"].limit.space is inst.space
    assert inst.set_sequences["columns"].limit_candidate == inst.subset("axis")
    with pytest.raises(ArgumentError):
        apply_metric_transform(build_comb(4), "g")
