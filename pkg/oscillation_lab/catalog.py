"""
catalog module
Parameterized builders for the example spaces, subsets, functions and
sequences every experiment and test runs on. Builders are deterministic in
their parameters and return immutable instances.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from oscillation_lab.convergence import FunctionSequence, ProductNet, adequate_delta_depth
from oscillation_lab.errors import ArgumentError
from oscillation_lab.functions import FunctionOracle
from oscillation_lab.hyperspace import SetSequence
from oscillation_lab.metric_core import EuclideanSpace, MetricSpace, MetricTransform, SubsetRef, SupSequenceSpace


@dataclass(frozen=True)
class CatalogInstance:
    """
    A sampled example: space, named subsets, functions and sequences.

    :ivar name: Catalog key.
    :vartype name: str
    :ivar parameters: Builder parameters, including truncation and pitch.
    :vartype parameters: dict
    :ivar product_net: The ``(k, n)`` net, for the bump instance only.
    :vartype product_net: ProductNet or None
    """

    name: str
    parameters: dict
    space: MetricSpace = field(repr=False)
    subsets: dict[str, SubsetRef] = field(default_factory=dict, repr=False)
    functions: dict[str, FunctionOracle] = field(default_factory=dict, repr=False)
    sequences: dict[str, FunctionSequence] = field(default_factory=dict, repr=False)
    set_sequences: dict[str, SetSequence] = field(default_factory=dict, repr=False)
    product_net: ProductNet | None = field(default=None, repr=False)

    def subset(self, name: str) -> SubsetRef:
        if name not in self.subsets:
            raise ArgumentError(f"instance {self.name!r} has no subset {name!r}; known: {sorted(self.subsets)}")
        return self.subsets[name]

    def function(self, name: str) -> FunctionOracle:
        if name not in self.functions:
            raise ArgumentError(f"instance {self.name!r} has no function {name!r}; known: {sorted(self.functions)}")
        return self.functions[name]


def _grid(lo: int, hi: int, pitch: float) -> np.ndarray:
    return np.arange(lo, hi + 1) * pitch


def build_comb(M: int) -> CatalogInstance:
    """
    The comb: axis ``{0} x [0, M]`` at pitch ``1/M^2`` and columns
    ``{(1/m, k/m) : k = 1..M^2}`` for m = 1..M, with f equal to 1 on the
    column points with ``k >= m^2`` and 0 elsewhere.

    Named subsets: ``axis``, ``column_<m>`` (column m cut at height M) and
    ``columns``. Named sequences: ``columns`` (sets converging to the axis),
    ``axis_truncations`` (axis cut at height lam) and ``perturbed``
    (``f + (-1)^lam / lam * min(1, y/M)``), both indexed by lam = 1..M.

    :param M: Truncation scale, >= 4.
    :type M: int
    :returns: The comb instance; resolution is the axis pitch.
    :rtype: CatalogInstance
    """
    if M < 4:
        raise ArgumentError(f"comb needs M >= 4, got {M}")
    h = 1.0 / M**2
    axis_y = _grid(0, M**3, h)
    coords = [np.column_stack([np.zeros(len(axis_y)), axis_y])]
    values = [np.zeros(len(axis_y))]
    column_ids, offset = {}, len(axis_y)
    for m in range(1, M + 1):
        k = np.arange(1, M**2 + 1)
        coords.append(np.column_stack([np.full(len(k), 1.0 / m), k / m]))
        values.append((k >= m * m).astype(float))
        column_ids[m] = (offset, k)
        offset += len(k)
    points = np.vstack(coords)
    space = EuclideanSpace(points, resolution_h=h)
    f = FunctionOracle(space, np.concatenate(values), name="comb")
    axis = SubsetRef(space, np.arange(len(axis_y)))
    subsets = {"axis": axis}
    for m, (start, k) in column_ids.items():
        subsets[f"column_{m}"] = SubsetRef(space, start + np.flatnonzero(k <= m * M))
    subsets["columns"] = SubsetRef(space, np.arange(len(axis_y), len(space)))
    truncations = tuple(SubsetRef(space, np.flatnonzero(axis_y <= lam)) for lam in range(1, M + 1))
    ramp = np.minimum(1.0, points[:, 1] / M)
    perturbed = tuple(f.shifted((-1) ** lam / lam * ramp, name=f"comb_{lam}") for lam in range(1, M + 1))
    logging.info(f"built comb M={M}: {len(space)} points")
    return CatalogInstance(
        name="comb",
        parameters={"M": M, "resolution_h": h},
        space=space,
        subsets=subsets,
        functions={"f": f, "zero": FunctionOracle.constant(space, 0.0, name="zero")},
        sequences={"perturbed": FunctionSequence(perturbed, f)},
        set_sequences={
            "columns": SetSequence(space, tuple(subsets[f"column_{m}"] for m in range(1, M + 1)), axis),
            "axis_truncations": SetSequence(space, truncations, axis),
        },
    )


def build_cross(T: float, pitch: float, band: float = 1.0) -> CatalogInstance:
    """
    The two axes of ``[0, T]^2`` with ``f(x, y) = xy``, sampled on the grid
    of the square at ``pitch``, restricted to the points within ``band`` of
    the axes. ``Omega_n`` at A only reads ``S(A, 1/n)``, so any band >= 1
    gives the values of the full grid.

    :param T: Side of the square, > 0.
    :type T: float
    :param pitch: Grid pitch, > 0.
    :type pitch: float
    :param band: Width of the sampled strip along each axis.
    :type band: float
    :returns: Instance with subsets ``A`` and ``strip`` (every sampled point)
        and functions ``f`` and ``zero``.
    :rtype: CatalogInstance
    """
    if not T > 0 or not pitch > 0 or not band > 0:
        raise ArgumentError(f"cross needs T, pitch, band > 0, got T={T}, pitch={pitch}, band={band}")
    steps = int(math.floor(T / pitch + 1e-9))
    coord = _grid(0, steps, pitch)
    xx, yy = np.meshgrid(coord, coord, indexing="ij")
    xx, yy = xx.ravel(), yy.ravel()
    keep = np.minimum(xx, yy) <= band + 1e-12
    points = np.column_stack([xx[keep], yy[keep]])
    space = EuclideanSpace(points, resolution_h=pitch)
    f = FunctionOracle(space, points[:, 0] * points[:, 1], name="xy")
    A = SubsetRef(space, np.flatnonzero(np.minimum(points[:, 0], points[:, 1]) == 0))
    logging.info(f"built cross T={T}, pitch={pitch}: {len(space)} points")
    return CatalogInstance(
        name="cross",
        parameters={"T": T, "pitch": pitch, "band": band, "resolution_h": pitch},
        space=space,
        subsets={"A": A, "strip": SubsetRef.whole(space)},
        functions={"f": f, "zero": FunctionOracle.constant(space, 0.0, name="zero")},
    )


def tent(n: int, x: np.ndarray) -> np.ndarray:
    """
    Piecewise-linear tent through ``(0, 0), (1/2n, 1), (1/n, 0), (1, 0)``.
    """
    return np.clip(1.0 - np.abs(2 * n * x - 1.0), 0.0, None)


def build_tents(L: int, pitch: float) -> CatalogInstance:
    """
    ``[0, 1]`` at ``pitch`` with the tents ``f_1..f_L`` converging to 0.

    Subsets: ``origin`` = {0} and ``away`` = ``[1/2, 1]``. The parameter
    ``delta_depth`` is the deepest delta grid the L terms resolve.

    :param L: Number of tents, >= 1.
    :type L: int
    :param pitch: Grid pitch; peaks ``1/2n`` off the grid are flagged.
    :type pitch: float
    :rtype: CatalogInstance
    """
    if L < 1:
        raise ArgumentError(f"tents need L >= 1, got {L}")
    if not 0 < pitch <= 1:
        raise ArgumentError(f"pitch must lie in (0, 1], got {pitch}")
    xs = _grid(0, int(round(1 / pitch)), pitch)
    space = EuclideanSpace(xs, resolution_h=pitch)
    peaks = [n for n in range(1, L + 1) if abs(round(1 / (2 * n * pitch)) * pitch - 1 / (2 * n)) > 1e-12]
    if peaks:
        logging.warning(f"tent peaks 1/2n fall off the grid for n in {peaks[:5]}")
    zero = FunctionOracle.constant(space, 0.0, name="zero")
    terms = tuple(FunctionOracle(space, tent(n, xs), name=f"tent_{n}") for n in range(1, L + 1))
    return CatalogInstance(
        name="tents",
        parameters={"L": L, "pitch": pitch, "resolution_h": pitch, "delta_depth": adequate_delta_depth(L)},
        space=space,
        subsets={"origin": SubsetRef(space, [0]), "away": SubsetRef(space, np.flatnonzero(xs >= 0.5))},
        functions={"zero": zero},
        sequences={"tents": FunctionSequence(terms, zero)},
    )


def build_linf_bumps(K: int, Nmax: int) -> CatalogInstance:
    """
    Finite-support rational sequences under the sup metric: the origin, the
    points ``e_n/k`` and the shoulders ``(1/k +- 3^-k/2) e_n`` for
    k = 1..K, n = 1..Nmax, with the net

    ``f_{k,n}(x) = max(0, 1 - 3^k d(x, e_n/k))``

    converging to 0. All values are exact.

    :param K: Rows, >= 2.
    :type K: int
    :param Nmax: Columns, >= K.
    :type Nmax: int
    :rtype: CatalogInstance
    """
    if K < 2 or Nmax < K:
        raise ArgumentError(f"bumps need K >= 2 and Nmax >= K, got K={K}, Nmax={Nmax}")

    def axis_point(n: int, t: Fraction) -> tuple[Fraction, ...]:
        return tuple(t if i == n else Fraction(0) for i in range(1, Nmax + 1))

    points = [axis_point(1, Fraction(0))]
    centers = {}
    for k in range(1, K + 1):
        shoulder = Fraction(1, 2 * 3**k)
        for n in range(1, Nmax + 1):
            centers[(k, n)] = len(points)
            for t in (Fraction(1, k), Fraction(1, k) - shoulder, Fraction(1, k) + shoulder):
                points.append(axis_point(n, t))
    space = SupSequenceSpace(points)
    zero = FunctionOracle(space, np.array([Fraction(0)] * len(space), dtype=object), name="zero")
    table = {}
    for (k, n), c in centers.items():
        center = space.points[c]
        vals = []
        for p in space.points:
            d = max(abs(a - b) for a, b in zip(p, center))
            vals.append(max(Fraction(0), 1 - 3**k * d))
        table[(k, n)] = FunctionOracle(space, np.array(vals, dtype=object), name=f"f_{k}_{n}")
    net = ProductNet(K, Nmax, table, zero, origin=0)
    logging.info(f"built linf bumps K={K}, Nmax={Nmax}: {len(space)} points")
    return CatalogInstance(
        name="linf_bumps",
        parameters={"K": K, "Nmax": Nmax, "resolution_h": 0.0},
        space=space,
        subsets={"origin": SubsetRef(space, [0])},
        functions={"zero": zero},
        sequences={"diagonal": net.along(lambda k: k)},
        product_net=net,
    )


def build_real_line(L: float, pitch: float = 0.05, terms: int | None = None) -> CatalogInstance:
    """
    ``[-L, L]`` at ``pitch`` with ``f(x) = x^2`` and the exhaustion
    ``A_m = [-m, m]``, m = 1..terms (default ``floor(L)``).

    Sequences: ``exhaustion`` (sets converging to the whole grid) and
    ``square`` (the constant function sequence f, same length).

    :param L: Half-length, > 0.
    :type L: float
    :param pitch: Grid pitch, > 0.
    :type pitch: float
    :param terms: Length of the exhaustion.
    :type terms: int or None
    :rtype: CatalogInstance
    """
    if not L > 0 or not pitch > 0:
        raise ArgumentError(f"real line needs L, pitch > 0, got L={L}, pitch={pitch}")
    steps = int(math.floor(L / pitch + 1e-9))
    xs = _grid(-steps, steps, pitch)
    space = EuclideanSpace(xs, resolution_h=pitch)
    f = FunctionOracle(space, xs * xs, name="square")
    whole = SubsetRef.whole(space)
    count = terms if terms is not None else max(1, int(math.floor(L)))
    if count < 1:
        raise ArgumentError(f"exhaustion needs at least one term, got {count}")
    exhaustion = tuple(SubsetRef(space, np.flatnonzero(np.abs(xs) <= m + 1e-9)) for m in range(1, count + 1))
    subsets = {"A": whole}
    subsets.update({f"A_{m}": s for m, s in enumerate(exhaustion, start=1)})
    return CatalogInstance(
        name="real_line",
        parameters={"L": L, "pitch": pitch, "terms": count, "resolution_h": pitch},
        space=space,
        subsets=subsets,
        functions={"f": f, "zero": FunctionOracle.constant(space, 0.0, name="zero")},
        sequences={"square": FunctionSequence((f,) * count, f)},
        set_sequences={"exhaustion": SetSequence(space, exhaustion, whole)},
    )


def build_isolated_ladder(K: int) -> CatalogInstance:
    """
    ``{1..K} + {n + 1/n : n = 2..K}`` on the real line with A = ``{2..K}``:
    every point is isolated but A has pairs at distance ``1/n``.

    PointIds 0..K-1 are the integers 1..K in order.

    :param K: Largest integer, >= 3.
    :type K: int
    :rtype: CatalogInstance
    """
    if K < 3:
        raise ArgumentError(f"ladder needs K >= 3, got {K}")
    ints = [float(n) for n in range(1, K + 1)]
    shifted = [n + 1.0 / n for n in range(2, K + 1)]
    space = EuclideanSpace(ints + shifted, resolution_h=0.0)
    A = SubsetRef(space, np.arange(1, K))
    return CatalogInstance(
        name="isolated_ladder",
        parameters={"K": K, "resolution_h": 0.0},
        space=space,
        subsets={"A": A, "integers": SubsetRef(space, np.arange(K)), "whole": SubsetRef.whole(space)},
        functions={"zero": FunctionOracle.constant(space, 0.0, name="zero")},
    )


def build_unit_interval(pitch: float = 0.01) -> CatalogInstance:
    """
    ``[0, 1]`` at ``pitch`` with ``f(x) = x^2``; compact control instance.
    """
    if not 0 < pitch <= 1:
        raise ArgumentError(f"pitch must lie in (0, 1], got {pitch}")
    xs = _grid(0, int(round(1 / pitch)), pitch)
    space = EuclideanSpace(xs, resolution_h=pitch)
    return CatalogInstance(
        name="unit_interval",
        parameters={"pitch": pitch, "resolution_h": pitch},
        space=space,
        subsets={"A": SubsetRef.whole(space)},
        functions={"f": FunctionOracle(space, xs * xs, name="square"), "zero": FunctionOracle.constant(space, 0.0, name="zero")},
    )


def apply_metric_transform(inst: CatalogInstance, fname: str) -> CatalogInstance:
    """
    The same instance under ``d^(x, w) = d(x, w) + |f(x) - f(w)|`` for the
    named real function, materialized as an explicit distance matrix. Every
    subset, function and sequence is carried over by PointId.

    :param inst: Source instance.
    :type inst: CatalogInstance
    :param fname: Name of a real-valued function of the instance.
    :type fname: str
    :returns: The transformed instance, named ``<name>_transformed``.
    :rtype: CatalogInstance
    :raises ArgumentError: For an unknown or non-real function.
    """
    space = MetricTransform(inst.space, inst.function(fname)).materialize()

    def move_set(S: SubsetRef) -> SubsetRef:
        return SubsetRef(space, S.indices)

    def move_fn(g: FunctionOracle) -> FunctionOracle:
        return FunctionOracle(space, g.values, name=g.name, unbounded=g.unbounded)

    net = None
    if inst.product_net is not None:
        pn = inst.product_net
        net = ProductNet(pn.K, pn.Nmax, {key: move_fn(g) for key, g in pn.table.items()}, move_fn(pn.limit), pn.origin)
    return CatalogInstance(
        name=f"{inst.name}_transformed",
        parameters={**inst.parameters, "transformed_by": fname},
        space=space,
        subsets={k: move_set(S) for k, S in inst.subsets.items()},
        functions={k: move_fn(g) for k, g in inst.functions.items()},
        sequences={
            k: FunctionSequence(tuple(move_fn(g) for g in fs.terms), move_fn(fs.limit)) for k, fs in inst.sequences.items()
        },
        set_sequences={
            k: SetSequence(space, tuple(move_set(t) for t in seq.terms), move_set(seq.limit_candidate))
            for k, seq in inst.set_sequences.items()
        },
        product_net=net,
    )


CATALOG: dict[str, Callable[..., CatalogInstance]] = {
    "comb": build_comb,
    "cross": build_cross,
    "tents": build_tents,
    "linf_bumps": build_linf_bumps,
    "real_line": build_real_line,
    "isolated_ladder": build_isolated_ladder,
    "unit_interval": build_unit_interval,
}

DEFAULT_PARAMETERS: dict[str, dict] = {
    "comb": {"M": 8},
    "cross": {"T": 8.0, "pitch": 0.125},
    "tents": {"L": 64, "pitch": 1 / 1024},
    "linf_bumps": {"K": 12, "Nmax": 12},
    "real_line": {"L": 20.0, "pitch": 0.05},
    "isolated_ladder": {"K": 50},
    "unit_interval": {"pitch": 0.01},
}


def build(name: str, **params) -> CatalogInstance:
    """
    Build a registered instance, filling unspecified parameters with
    ``DEFAULT_PARAMETERS``.

    :raises ArgumentError: For an unknown name or parameter.
    """
    if name not in CATALOG:
        raise ArgumentError(f"unknown catalog instance {name!r}; known: {sorted(CATALOG)}")
    merged = {**DEFAULT_PARAMETERS[name], **params}
    try:
        return CATALOG[name](**merged)
    except TypeError as exc:
        raise ArgumentError(f"bad parameters for {name!r}: {exc}") from exc
