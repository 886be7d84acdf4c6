"""
functions module
Function oracles f: X -> Y evaluated on the points of a sampled space, with
target ``<Y, rho>`` either the real line or a euclidean space.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import TYPE_CHECKING, Callable, Sequence

import numpy as np
from scipy.spatial import ConvexHull
from scipy.spatial.distance import pdist

from oscillation_lab.errors import ArgumentError, StructuralError
from oscillation_lab.ext_real import INF, ZERO, ExtReal

if TYPE_CHECKING:
    from oscillation_lab.metric_core import MetricSpace


class FunctionOracle:
    """
    Tabulated function from the sample of a MetricSpace into ``<Y, rho>``.

    Real targets are stored as a 1-D array (float, or object dtype holding
    ``Fraction`` for exact instances); euclidean targets as an ``(N, k)``
    float array. Points may be declared unbounded, in which case every pair or
    ball containing them has rho-diameter INF.

    :ivar space: Domain sample.
    :vartype space: MetricSpace
    :ivar values: Read-only value table indexed by PointId.
    :vartype values: numpy.ndarray
    :ivar name: Display name.
    :vartype name: str
    :ivar unbounded: Read-only mask of declared-unbounded points.
    :vartype unbounded: numpy.ndarray
    """

    def __init__(self, space: "MetricSpace", values, name: str = "f", unbounded=None):
        vals = np.array(values)
        if vals.dtype != object:
            vals = vals.astype(float)
        if len(vals) != len(space):
            raise StructuralError(f"function {name!r} has {len(vals)} values for {len(space)} points")
        if vals.ndim not in (1, 2):
            raise ArgumentError(f"function {name!r} values must be scalars or vectors")
        if unbounded is None:
            unbounded = np.zeros(len(vals), dtype=bool)
        unbounded = np.array(unbounded, dtype=bool)
        if vals.dtype != object:
            vals = vals.copy()
            vals[unbounded] = 0.0
            if not np.all(np.isfinite(vals)):
                raise ArgumentError(f"function {name!r} has non-finite values; declare them unbounded instead")
        vals.setflags(write=False)
        unbounded.setflags(write=False)
        self.space = space
        self.values = vals
        self.name = name
        self.unbounded = unbounded

    @classmethod
    def from_points(cls, space: "MetricSpace", fn: Callable, name: str = "f") -> "FunctionOracle":
        """
        Tabulate ``fn`` on the coordinates of every sample point.

        :param space: Euclidean or sup-sequence space.
        :type space: MetricSpace
        :param fn: Callable taking one point's coordinates.
        :type fn: Callable
        :param name: Display name.
        :type name: str
        :returns: The tabulated oracle.
        :rtype: FunctionOracle
        """
        points = getattr(space, "points", None)
        if points is None:
            raise ArgumentError(f"{space.metric} spaces have no coordinates to evaluate on")
        raw = [fn(p) for p in points]
        if raw and isinstance(raw[0], Fraction):
            return cls(space, np.array(raw, dtype=object), name=name)
        return cls(space, raw, name=name)

    @classmethod
    def constant(cls, space: "MetricSpace", c: float = 0.0, name: str = "constant") -> "FunctionOracle":
        return cls(space, np.full(len(space), float(c)), name=name)

    @property
    def is_real(self) -> bool:
        return self.values.ndim == 1

    @property
    def target(self) -> str:
        return "real" if self.is_real else "euclidean"

    @property
    def has_unbounded(self) -> bool:
        return bool(self.unbounded.any())

    def __call__(self, x: int):
        if self.unbounded[x]:
            return math.inf
        return self.values[x]

    def __repr__(self) -> str:
        return f"FunctionOracle({self.name!r}, {self.target}, {len(self.values)} points)"

    def check_space(self, space: "MetricSpace") -> None:
        if self.space is not space:
            raise StructuralError(f"function {self.name!r} is defined on another space")

    def rho(self, I: np.ndarray, J: np.ndarray) -> np.ndarray:
        """
        ``rho(f(x), f(w))`` for paired PointId arrays, ignoring unbounded marks.
        """
        if self.is_real:
            return np.abs(self.values[I] - self.values[J])
        diff = self.values[I] - self.values[J]
        return np.sqrt((diff * diff).sum(axis=-1))

    def pair_sup(self, I: np.ndarray, J: np.ndarray) -> ExtReal:
        """
        ``sup rho(f(x), f(w))`` over the given pairs; the empty sup is 0.

        :param I: Left PointIds.
        :type I: numpy.ndarray
        :param J: Right PointIds.
        :type J: numpy.ndarray
        :returns: The supremum.
        :rtype: ExtReal
        """
        if len(I) == 0:
            return ZERO
        if self.has_unbounded and ((self.unbounded[I] | self.unbounded[J]) & (I != J)).any():
            return INF
        return ExtReal(self.rho(I, J).max())

    def diam(self, ids: Sequence[int]) -> ExtReal:
        """
        rho-diameter of the image ``f(ids)``.

        :param ids: PointIds of the set.
        :type ids: Sequence[int]
        :returns: The diameter; 0 for at most one point.
        :rtype: ExtReal
        """
        ids = np.asarray(ids, dtype=np.intp)
        if len(ids) <= 1:
            return ZERO
        if self.unbounded[ids].any():
            return INF
        vals = self.values[ids]
        if self.is_real:
            return ExtReal(vals.max() - vals.min())
        if len(vals) > 2000 and vals.shape[1] > 1:
            vals = vals[np.unique(ConvexHull(vals, qhull_options="QJ").vertices)]
        return ExtReal(float(pdist(vals).max()))

    def group_diams(self, I: np.ndarray, J: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Image diameters of the groups ``{c} + {J[k] : I[k] = c}``, one group per
        distinct center c of ``I``.

        :param I: Center PointIds, one per pair.
        :type I: numpy.ndarray
        :param J: Member PointIds.
        :type J: numpy.ndarray
        :returns: ``(centers, diameters, infinite)``: sorted centers, their finite
            diameters (0 where infinite) and the mask of INF groups.
        :rtype: tuple[numpy.ndarray, numpy.ndarray, numpy.ndarray]
        """
        centers, inverse = np.unique(I, return_inverse=True)
        infinite = np.zeros(len(centers), dtype=bool)
        if self.has_unbounded:
            touched = (self.unbounded[I] | self.unbounded[J]) & (I != J)
            infinite[np.unique(inverse[touched])] = True
        if self.is_real:
            hi = self.values[centers].copy()
            lo = hi.copy()
            np.maximum.at(hi, inverse, self.values[J])
            np.minimum.at(lo, inverse, self.values[J])
            diams = hi - lo
        else:
            order = np.argsort(inverse, kind="stable")
            bounds = np.searchsorted(inverse[order], np.arange(len(centers) + 1))
            diams = np.zeros(len(centers))
            for k, c in enumerate(centers):
                members = np.append(J[order[bounds[k] : bounds[k + 1]]], c)
                if not infinite[k]:
                    diams[k] = self.diam(members).value
        if infinite.any():
            diams = diams.copy()
            diams[infinite] = 0
        return centers, diams, infinite

    def max_group_diam(self, I: np.ndarray, J: np.ndarray) -> ExtReal:
        """
        Largest image diameter among the groups of :meth:`group_diams`.
        """
        if len(I) == 0:
            return ZERO
        _, diams, infinite = self.group_diams(I, J)
        if infinite.any():
            return INF
        return ExtReal(diams.max())

    def deviation(self, other: "FunctionOracle", ids: Sequence[int]) -> ExtReal:
        """
        ``sup rho(self(x), other(x))`` over ``ids``.
        """
        other.check_space(self.space)
        if self.target != other.target:
            raise ArgumentError("functions have different targets")
        ids = np.asarray(ids, dtype=np.intp)
        if len(ids) == 0:
            return ZERO
        if (self.unbounded[ids] | other.unbounded[ids]).any():
            return INF
        if self.is_real:
            return ExtReal(np.abs(self.values[ids] - other.values[ids]).max())
        diff = self.values[ids] - other.values[ids]
        return ExtReal(float(np.sqrt((diff * diff).sum(axis=-1)).max()))

    def shifted(self, offsets, name: str | None = None) -> "FunctionOracle":
        """
        The real-valued function ``f + offsets``.
        """
        if not self.is_real:
            raise ArgumentError("only real-valued functions can be shifted")
        offsets = np.broadcast_to(np.asarray(offsets, dtype=self.values.dtype), self.values.shape)
        return FunctionOracle(self.space, self.values + offsets, name=name or self.name, unbounded=self.unbounded)

    def to_descriptor(self) -> dict:
        out = []
        for k, v in enumerate(self.values.tolist()):
            if self.unbounded[k]:
                out.append("inf")
            elif isinstance(v, Fraction):
                out.append(f"{v.numerator}/{v.denominator}")
            else:
                out.append(v)
        return {"type": "table", "values": out}


NAMED_FUNCTIONS: dict[str, Callable] = {
    "square": lambda p: float(p[0]) ** 2,
    "product": lambda p: float(p[0]) * float(p[1]),
    "zero": lambda p: 0.0,
    "first_coordinate": lambda p: float(p[0]),
}


def named_function(space: "MetricSpace", name: str) -> FunctionOracle:
    """
    Build one of the registered coordinate functions on ``space``.

    :param space: Domain space.
    :type space: MetricSpace
    :param name: Registry key.
    :type name: str
    :returns: The tabulated function.
    :rtype: FunctionOracle
    :raises ArgumentError: For an unknown name.
    """
    if name not in NAMED_FUNCTIONS:
        raise ArgumentError(f"unknown catalog function {name!r}; known: {sorted(NAMED_FUNCTIONS)}")
    if name == "zero":
        return FunctionOracle.constant(space, 0.0, name=name)
    return FunctionOracle.from_points(space, NAMED_FUNCTIONS[name], name=name)
