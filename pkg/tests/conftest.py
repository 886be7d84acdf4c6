import numpy as np
import pytest
from scipy.spatial.distance import pdist, squareform

from oscillation_lab.catalog import (
    build_comb,
    build_isolated_ladder,
    build_linf_bumps,
    build_real_line,
    build_tents,
    build_unit_interval,
)
from oscillation_lab.functions import FunctionOracle
from oscillation_lab.metric_core import EuclideanSpace, MatrixSpace


@pytest.fixture(autouse=True)
def run_in_tmp(tmp_path, monkeypatch):
    # CLI defaults write relative paths; keep them out of the repo
    monkeypatch.chdir(tmp_path)


@pytest.fixture(scope="session")
def comb40():
    return build_comb(40)


@pytest.fixture(scope="session")
def comb8():
    return build_comb(8)


@pytest.fixture(scope="session")
def tents64():
    return build_tents(64, 1 / 1024)


@pytest.fixture(scope="session")
def bumps12():
    return build_linf_bumps(12, 12)


@pytest.fixture(scope="session")
def real_line50():
    return build_real_line(50, 0.05)


@pytest.fixture(scope="session")
def ladder50():
    return build_isolated_ladder(50)


@pytest.fixture(scope="session")
def unit_interval():
    return build_unit_interval(0.01)


@pytest.fixture
def line5():
    """
    Five points 0, 1, 2, 3, 10 on the real line with f(x) = x.
    """
    space = EuclideanSpace([0.0, 1.0, 2.0, 3.0, 10.0])
    return space, FunctionOracle(space, [0.0, 1.0, 2.0, 3.0, 10.0], name="identity")


def dyadic_instance(rng, size, steps=256, scale=64):
    """
    Random 1-D space on the grid k/scale with integer function values; every
    distance and value difference is exact in floating point.
    """
    grid = rng.choice(steps + 1, size=size, replace=False)
    space = EuclideanSpace(np.sort(grid) / scale)
    f = FunctionOracle(space, rng.integers(0, 20, size=size).astype(float), name="random")
    return space, f


def cityblock_instance(rng, size, steps=64):
    """
    Random ``MatrixSpace`` from l1 distances between points of the grid
    ``(k/steps)^3``, with real-valued f; the distances are exact sums of
    dyadic coordinates, so the triangle inequality holds without rounding.
    """
    grid = rng.integers(0, steps + 1, size=(size, 3)) / steps
    space = MatrixSpace(squareform(pdist(grid, "cityblock")))
    f = FunctionOracle(space, rng.normal(size=size), name="random")
    return space, f
