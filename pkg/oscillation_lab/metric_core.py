"""
metric_core module
Finite sampled metric spaces, subsets of them, and the primitive set
functionals: distance to a set, diameter, enlargement, gap, isolation and
fixed-radius neighbour pairs.

Open balls are strict everywhere: ``x`` lies in ``S(a, r)`` iff ``d(x, a) < r``.
"""

from __future__ import annotations

import logging
import math
import threading
from fractions import Fraction
from itertools import combinations
from numbers import Real
from typing import TYPE_CHECKING, Iterator, Sequence

import numpy as np
from scipy.spatial import ConvexHull, cKDTree
from scipy.spatial.distance import pdist

from oscillation_lab.errors import ArgumentError, InvariantViolation, StructuralError
from oscillation_lab.ext_real import ExtReal

if TYPE_CHECKING:
    from oscillation_lab.functions import FunctionOracle

# Pad applied to kd-tree radii before the exact strict-inequality filter.
RADIUS_PAD = 1e-9


class MetricSpace:
    """
    Base class for a finite sample ``<X, d>`` of a metric space.

    Subclasses provide ``_distance_block``; the set primitives are built on top
    of it and may be overridden with indexed versions. Instances are immutable
    after construction; the only mutable state is an internal memo of spatial
    indices.

    :cvar METRIC: Descriptor name of the metric.
    :vartype METRIC: str
    :cvar ROW_BLOCK: Rows processed per block by the generic scans.
    :vartype ROW_BLOCK: int
    :ivar resolution_h: Sampling pitch of the underlying continuum (0 means the
        sample is the space itself).
    :vartype resolution_h: float
    """

    METRIC = ""
    ROW_BLOCK = 256
    exact = False

    def __init__(self, resolution_h: float = 0.0):
        if not resolution_h >= 0:
            raise ArgumentError(f"resolution_h must be >= 0, got {resolution_h!r}")
        self.resolution_h = float(resolution_h)

    def __len__(self) -> int:
        raise NotImplementedError

    @property
    def metric(self) -> str:
        return self.METRIC

    @property
    def all_ids(self) -> np.ndarray:
        ids = np.arange(len(self), dtype=np.intp)
        ids.setflags(write=False)
        return ids

    def radius(self, n: int):
        """
        The radius ``1/n`` in the number type the metric compares against.

        :param n: Positive integer.
        :type n: int
        :returns: ``Fraction(1, n)`` for exact metrics, ``1.0 / n`` otherwise.
        """
        if n < 1:
            raise ArgumentError(f"n must be >= 1, got {n}")
        return Fraction(1, n) if self.exact else 1.0 / n

    def _distance_block(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def distances_from(self, i: int, idx: Sequence[int]) -> np.ndarray:
        return self._distance_block(np.array([i], dtype=np.intp), np.asarray(idx, dtype=np.intp))[0]

    def distance(self, i: int, j: int):
        return self.distances_from(i, [j])[0]

    def nearest(self, rows: np.ndarray, cols: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """
        Distance from each row point to the set ``cols`` and the nearest member.

        Ties go to the lowest PointId.

        :param rows: PointIds to measure from.
        :type rows: numpy.ndarray
        :param cols: Nonempty sorted PointIds of the target set.
        :type cols: numpy.ndarray
        :returns: ``(distances, nearest_ids)``.
        :rtype: tuple[numpy.ndarray, numpy.ndarray]
        """
        dists, ids = [], []
        for start in range(0, len(rows), self.ROW_BLOCK):
            block = self._distance_block(rows[start : start + self.ROW_BLOCK], cols)
            pos = np.argmin(block, axis=1)
            dists.append(block[np.arange(len(pos)), pos])
            ids.append(cols[pos])
        if not dists:
            return np.empty(0), np.empty(0, dtype=np.intp)
        return np.concatenate(dists), np.concatenate(ids)

    def within(self, rows: np.ndarray, cols: np.ndarray, r) -> np.ndarray:
        """
        Boolean mask over ``rows``: ``d(x, cols) < r``.
        """
        dists, _ = self.nearest(rows, cols)
        return np.asarray(dists < r, dtype=bool)

    def iter_cross_pairs(self, rows: np.ndarray, cols: np.ndarray, r) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        """
        Stream all ``(i, j)`` with ``i`` in rows, ``j`` in cols and ``d(i, j) < r``,
        one block of rows at a time. Every pair of a given row is in the same
        block, and blocks follow the order of ``rows``.

        :param rows: PointIds on the left.
        :type rows: numpy.ndarray
        :param cols: PointIds on the right.
        :type cols: numpy.ndarray
        :param r: Strict radius.
        :returns: Iterator of ``(I, J)`` PointId arrays.
        """
        for start in range(0, len(rows), self.ROW_BLOCK):
            block_rows = rows[start : start + self.ROW_BLOCK]
            mask = np.asarray(self._distance_block(block_rows, cols) < r, dtype=bool)
            bi, bj = np.nonzero(mask)
            yield block_rows[bi], cols[bj]

    def isolation_of(self, rows: np.ndarray) -> np.ndarray:
        """
        Distance from each row point to the nearest *other* sample point.
        """
        out = []
        every = self.all_ids
        for start in range(0, len(rows), self.ROW_BLOCK):
            block_rows = rows[start : start + self.ROW_BLOCK]
            block = self._distance_block(block_rows, every)
            for k, row in enumerate(block_rows):
                others = np.delete(block[k], row)
                out.append(others.min())
        return np.array(out, dtype=object if self.exact else float)

    def to_descriptor(self) -> dict:
        raise NotImplementedError


class EuclideanSpace(MetricSpace):
    """
    Points of ``R^dim`` under the euclidean metric, indexed with
    ``scipy.spatial.cKDTree``.

    :ivar points: Read-only ``(N, dim)`` coordinate array.
    :vartype points: numpy.ndarray
    """

    METRIC = "euclidean"
    TREE_CACHE = 64
    BALL_BLOCK = 512

    def __init__(self, points, resolution_h: float = 0.0):
        super().__init__(resolution_h)
        pts = np.array(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or len(pts) == 0:
            raise ArgumentError("euclidean points must be a nonempty (N, dim) array")
        if not np.all(np.isfinite(pts)):
            raise ArgumentError("euclidean points must be finite")
        pts.setflags(write=False)
        self.points = pts
        self._trees: dict[bytes, cKDTree] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def tree(self, ids: np.ndarray) -> cKDTree:
        key = ids.tobytes()
        with self._lock:
            tree = self._trees.get(key)
            if tree is None:
                tree = cKDTree(self.points[ids])
                if len(self._trees) >= self.TREE_CACHE:
                    self._trees.pop(next(iter(self._trees)))
                self._trees[key] = tree
        return tree

    def _pair_distances(self, I: np.ndarray, J: np.ndarray) -> np.ndarray:
        diff = self.points[I] - self.points[J]
        return np.sqrt((diff * diff).sum(axis=-1))

    def _distance_block(self, rows, cols):
        diff = self.points[rows][:, None, :] - self.points[cols][None, :, :]
        return np.sqrt((diff * diff).sum(axis=-1))

    def nearest(self, rows, cols):
        _, pos = self.tree(cols).query(self.points[rows], k=1)
        ids = cols[np.asarray(pos, dtype=np.intp)]
        return self._pair_distances(rows, ids), ids

    def within(self, rows, cols, r):
        dist, pos = self.tree(cols).query(self.points[rows], k=1, distance_upper_bound=r * (1 + RADIUS_PAD))
        found = np.isfinite(dist)
        mask = np.zeros(len(rows), dtype=bool)
        if found.any():
            ids = cols[np.asarray(pos[found], dtype=np.intp)]
            mask[found] = self._pair_distances(rows[found], ids) < r
        return mask

    def iter_cross_pairs(self, rows, cols, r):
        tree = self.tree(cols)
        padded = r * (1 + RADIUS_PAD)
        for start in range(0, len(rows), self.BALL_BLOCK):
            block_rows = rows[start : start + self.BALL_BLOCK]
            hits = tree.query_ball_point(self.points[block_rows], padded)
            lengths = np.fromiter((len(h) for h in hits), dtype=np.intp, count=len(hits))
            if lengths.sum() == 0:
                continue
            J = cols[np.concatenate([np.asarray(h, dtype=np.intp) for h in hits])]
            I = np.repeat(block_rows, lengths)
            keep = self._pair_distances(I, J) < r
            yield I[keep], J[keep]

    def isolation_of(self, rows):
        if len(self) < 2:
            raise ArgumentError("isolation needs a space with at least two points")
        _, pos = self.tree(self.all_ids).query(self.points[rows], k=2)
        pos = np.asarray(pos, dtype=np.intp)
        # a duplicate of the row may be returned first; both sit at distance 0
        other = np.where(pos[:, 0] == rows, pos[:, 1], pos[:, 0])
        return self._pair_distances(rows, other)

    def to_descriptor(self) -> dict:
        return {
            "metric": self.METRIC,
            "points": self.points.tolist(),
            "resolution_h": self.resolution_h,
        }


class MatrixSpace(MetricSpace):
    """
    A finite space given by an explicit distance matrix.

    :ivar matrix: Read-only ``(N, N)`` distance matrix.
    :vartype matrix: numpy.ndarray
    """

    METRIC = "matrix"
    ROW_BLOCK = 2048

    def __init__(self, matrix, resolution_h: float = 0.0):
        super().__init__(resolution_h)
        mat = np.array(matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or len(mat) == 0:
            raise ArgumentError("distance matrix must be square and nonempty")
        if not np.all(np.isfinite(mat)) or (mat < 0).any():
            raise ArgumentError("distance matrix entries must be finite and nonnegative")
        mat.setflags(write=False)
        self.matrix = mat

    def __len__(self) -> int:
        return len(self.matrix)

    def _distance_block(self, rows, cols):
        return self.matrix[np.ix_(rows, cols)]

    def to_descriptor(self) -> dict:
        return {
            "metric": self.METRIC,
            "points": self.matrix.tolist(),
            "resolution_h": self.resolution_h,
        }


class SupSequenceSpace(MetricSpace):
    """
    Finite-support rational sequences under the sup metric, with exact
    ``Fraction`` distances.

    Coordinates are rescaled by their common denominator so that distances are
    computed on integers and only converted to ``Fraction`` on the way out.

    :ivar points: Tuples of ``Fraction`` padded to a common support length.
    :vartype points: tuple[tuple[Fraction, ...], ...]
    """

    METRIC = "sup_sequence"
    exact = True

    def __init__(self, points: Sequence[Sequence], resolution_h: float = 0.0):
        super().__init__(resolution_h)
        if not points:
            raise ArgumentError("sup_sequence space needs at least one point")
        parsed = [tuple(Fraction(c) for c in p) for p in points]
        width = max((len(p) for p in parsed), default=0) or 1
        self.points = tuple(p + (Fraction(0),) * (width - len(p)) for p in parsed)
        self._scale = math.lcm(*(c.denominator for p in self.points for c in p))
        scaled = [[c.numerator * (self._scale // c.denominator) for c in p] for p in self.points]
        bound = max(abs(v) for row in scaled for v in row)
        dtype = np.int64 if 2 * bound < 2**62 else object
        self._scaled = np.array(scaled, dtype=dtype)

    def __len__(self) -> int:
        return len(self.points)

    def _scaled_block(self, rows, cols) -> np.ndarray:
        diff = self._scaled[rows][:, None, :] - self._scaled[cols][None, :, :]
        return np.abs(diff).max(axis=-1)

    def _threshold(self, r) -> int:
        # x < r*scale  <=>  x < ceil(r*scale) for integer x
        return math.ceil(Fraction(r) * self._scale)

    def _distance_block(self, rows, cols):
        scaled = self._scaled_block(rows, cols)
        to_fraction = np.frompyfunc(lambda v: Fraction(int(v), self._scale), 1, 1)
        return to_fraction(scaled)

    def nearest(self, rows, cols):
        scaled = self._scaled_block(rows, cols)
        pos = np.argmin(scaled, axis=1)
        best = scaled[np.arange(len(rows)), pos]
        dists = np.array([Fraction(int(v), self._scale) for v in best], dtype=object)
        return dists, cols[pos]

    def within(self, rows, cols, r):
        scaled = self._scaled_block(rows, cols)
        return np.asarray(scaled.min(axis=1) < self._threshold(r), dtype=bool)

    def iter_cross_pairs(self, rows, cols, r):
        limit = self._threshold(r)
        for start in range(0, len(rows), self.ROW_BLOCK):
            block_rows = rows[start : start + self.ROW_BLOCK]
            bi, bj = np.nonzero(np.asarray(self._scaled_block(block_rows, cols) < limit, dtype=bool))
            yield block_rows[bi], cols[bj]

    def to_descriptor(self) -> dict:
        return {
            "metric": self.METRIC,
            "points": [[f"{c.numerator}/{c.denominator}" for c in p] for p in self.points],
            "resolution_h": self.resolution_h,
        }


class SubsetRef:
    """
    A nonempty set of PointIds of one MetricSpace.

    :ivar space: The ambient space.
    :vartype space: MetricSpace
    :ivar indices: Sorted, unique, read-only PointId array.
    :vartype indices: numpy.ndarray
    """

    __slots__ = ("space", "indices")

    def __init__(self, space: MetricSpace, indices):
        ids = np.unique(np.asarray(indices, dtype=np.intp).ravel())
        if ids.size == 0:
            raise StructuralError("subsets must be nonempty")
        if ids[0] < 0 or ids[-1] >= len(space):
            raise StructuralError(f"subset indices out of range for a space of {len(space)} points")
        ids.setflags(write=False)
        self.space = space
        self.indices = ids

    @classmethod
    def whole(cls, space: MetricSpace) -> "SubsetRef":
        return cls(space, space.all_ids)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return (int(i) for i in self.indices)

    def __contains__(self, x: int) -> bool:
        pos = np.searchsorted(self.indices, x)
        return bool(pos < len(self.indices) and self.indices[pos] == x)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SubsetRef):
            return NotImplemented
        return self.space is other.space and np.array_equal(self.indices, other.indices)

    def __hash__(self) -> int:
        return hash((id(self.space), self.indices.tobytes()))

    def __repr__(self) -> str:
        return f"SubsetRef({len(self)} of {len(self.space)} points)"

    def check_same_space(self, other: "SubsetRef") -> None:
        if self.space is not other.space:
            raise StructuralError("subsets belong to different spaces")

    def union(self, other: "SubsetRef") -> "SubsetRef":
        self.check_same_space(other)
        return SubsetRef(self.space, np.union1d(self.indices, other.indices))

    def intersects(self, other: "SubsetRef") -> bool:
        self.check_same_space(other)
        return np.intersect1d(self.indices, other.indices, assume_unique=True).size > 0

    def issubset(self, other: "SubsetRef") -> bool:
        self.check_same_space(other)
        return bool(np.isin(self.indices, other.indices, assume_unique=True).all())

    def to_descriptor(self) -> list[int]:
        return self.indices.tolist()


def _check_point(space: MetricSpace, x: int) -> int:
    if not 0 <= int(x) < len(space):
        raise StructuralError(f"PointId {x} out of range for a space of {len(space)} points")
    return int(x)


def _check_radius(r, what: str = "radius") -> None:
    if not isinstance(r, Real) or not r > 0:
        raise ArgumentError(f"{what} must be > 0, got {r!r}")


def dist_point_set(x: int, A: SubsetRef):
    """
    ``d(x, A)``: the attained minimum of ``d(x, a)`` over the sample of A.

    :param x: PointId of the space A lives in.
    :type x: int
    :param A: Target subset.
    :type A: SubsetRef
    :returns: The distance (float, or Fraction for exact metrics).
    """
    x = _check_point(A.space, x)
    dists, _ = A.space.nearest(np.array([x], dtype=np.intp), A.indices)
    return dists[0]


def nearest_distances(rows: SubsetRef, cols: SubsetRef) -> np.ndarray:
    """
    ``d(x, cols)`` for every x in ``rows``.
    """
    rows.check_same_space(cols)
    dists, _ = rows.space.nearest(rows.indices, cols.indices)
    return dists


def diam(A: SubsetRef) -> ExtReal:
    """
    Largest pairwise distance in A; 0 for a singleton.

    Large euclidean sets are reduced to their convex-hull vertices first.

    :param A: Subset to measure.
    :type A: SubsetRef
    :returns: The diameter.
    :rtype: ExtReal
    """
    space, ids = A.space, A.indices
    if len(ids) == 1:
        return ExtReal(0)
    if isinstance(space, EuclideanSpace):
        pts = space.points[ids]
        if space.dim == 1:
            return ExtReal(float(pts.max() - pts.min()))
        if len(ids) > 2000:
            hull = ConvexHull(pts, qhull_options="QJ")
            pts = pts[np.unique(hull.vertices)]
        return ExtReal(float(pdist(pts).max()))
    best = 0
    for start in range(0, len(ids), space.ROW_BLOCK):
        best = max(best, space._distance_block(ids[start : start + space.ROW_BLOCK], ids).max())
    return ExtReal(best)


def enlargement(A: SubsetRef, eps) -> SubsetRef:
    """
    ``S(A, eps)``: every sample point at distance strictly below eps from A.

    :param A: Subset to enlarge.
    :type A: SubsetRef
    :param eps: Positive radius.
    :type eps: Real
    :returns: The enlargement, always containing A.
    :rtype: SubsetRef
    :raises ArgumentError: If eps <= 0.
    """
    _check_radius(eps, "eps")
    space = A.space
    mask = space.within(space.all_ids, A.indices, eps)
    mask[A.indices] = True
    return SubsetRef(space, np.nonzero(mask)[0])


def ball(space: MetricSpace, x: int, r) -> SubsetRef:
    """
    The sampled open ball ``S(x, r)``.
    """
    _check_radius(r)
    x = _check_point(space, x)
    ids = [x]
    for _, J in space.iter_cross_pairs(np.array([x], dtype=np.intp), space.all_ids, r):
        ids.extend(J.tolist())
    return SubsetRef(space, ids)


def gap(A: SubsetRef, B: SubsetRef):
    """
    Infimum (attained) of ``d(a, b)`` over ``a`` in A and ``b`` in B.
    """
    A.check_same_space(B)
    if A.intersects(B):
        return 0.0 if not A.space.exact else Fraction(0)
    small, large = (A, B) if len(A) <= len(B) else (B, A)
    return nearest_distances(small, large).min()


def isolation(space: MetricSpace, x: int):
    """
    ``I(x) = d(x, X minus {x})`` on the sample.

    On a sampled continuum this is about ``resolution_h`` rather than 0.

    :raises ArgumentError: If the space has a single point.
    """
    if len(space) < 2:
        raise ArgumentError("isolation needs a space with at least two points")
    x = _check_point(space, x)
    return space.isolation_of(np.array([x], dtype=np.intp))[0]


def iter_neighbor_blocks(S: SubsetRef, r) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """
    Blocks of unordered neighbour pairs ``i < j`` in S with ``d(i, j) < r``.
    """
    _check_radius(r)
    for I, J in S.space.iter_cross_pairs(S.indices, S.indices, r):
        keep = I < J
        if keep.any():
            yield I[keep], J[keep]


def neighbor_pairs(S: SubsetRef, r) -> Iterator[tuple[int, int]]:
    """
    All unordered pairs ``{x, w}`` of S with ``d(x, w) < r``, each once as
    ``(x, w)`` with ``x < w``. The pair set equals the quadratic scan's.

    :param S: Subset to scan.
    :type S: SubsetRef
    :param r: Positive radius.
    :type r: Real
    :returns: Iterator of PointId pairs.
    """
    for I, J in iter_neighbor_blocks(S, r):
        yield from zip(I.tolist(), J.tolist())


def quadratic_pairs(S: SubsetRef, r) -> set[tuple[int, int]]:
    """
    Reference O(|S|^2) scan for :func:`neighbor_pairs`.
    """
    space = S.space
    return {
        (int(i), int(j))
        for i, j in combinations(S.indices, 2)
        if space.distance(i, j) < r
    }


def validate_metric_axioms(space: MetricSpace, limit: int = 500, rtol: float = 1e-12) -> None:
    """
    Exhaustively check the metric axioms on a sample of at most ``limit``
    points. Exact metrics are checked with tolerance 0, float metrics with a
    relative tolerance on the triangle inequality.

    :param space: Space to check.
    :type space: MetricSpace
    :param limit: Maximum sample size.
    :type limit: int
    :raises ArgumentError: If the space is larger than ``limit``.
    :raises InvariantViolation: Naming the first violating pair or triple.
    """
    n = len(space)
    if n > limit:
        raise ArgumentError(f"exhaustive axiom check is limited to {limit} points, space has {n}")
    ids = space.all_ids
    D = space._distance_block(ids, ids)
    tol = 0 if space.exact else rtol
    if (D < 0).any():
        raise InvariantViolation("negative distance")
    if any(D[i, i] != 0 for i in range(n)):
        raise InvariantViolation("nonzero self-distance")
    asym = np.argwhere(np.asarray(D != D.T, dtype=bool))
    if len(asym):
        i, j = asym[0]
        raise InvariantViolation(f"asymmetric distance between {i} and {j}")
    zero = np.argwhere(np.asarray(D == 0, dtype=bool))
    duplicates = [(i, j) for i, j in zero if i < j]
    if duplicates:
        logging.warning(f"{len(duplicates)} duplicated sample points (distance 0 between distinct ids)")
    for j in range(n):
        through = D[:, j][:, None] + D[j, :][None, :]
        bad = np.argwhere(np.asarray(D > through * (1 + tol), dtype=bool))
        if len(bad):
            i, k = bad[0]
            raise InvariantViolation(f"triangle inequality fails for ({i}, {j}, {k})")


class MetricTransform:
    """
    The metric ``d^(x, w) = d(x, w) + |f(x) - f(w)|`` for a real-valued f.

    :ivar base: Underlying space.
    :vartype base: MetricSpace
    :ivar f: Real-valued function on the base sample.
    :vartype f: FunctionOracle
    """

    def __init__(self, base: MetricSpace, f: "FunctionOracle"):
        if f.space is not base:
            raise StructuralError("transform function is defined on another space")
        if not f.is_real:
            raise ArgumentError("metric transform needs a real-valued function")
        if f.has_unbounded:
            raise ArgumentError("metric transform needs finite function values")
        self.base = base
        self.f = f

    def distance(self, i: int, j: int):
        return self.base.distance(i, j) + abs(self.f.values[i] - self.f.values[j])

    def matrix(self) -> np.ndarray:
        ids = self.base.all_ids
        vals = np.asarray(self.f.values, dtype=float)
        base = np.asarray(self.base._distance_block(ids, ids), dtype=float)
        return base + np.abs(vals[:, None] - vals[None, :])

    def materialize(self) -> MatrixSpace:
        """
        The transformed space as an explicit distance matrix over the same
        PointIds.
        """
        return MatrixSpace(self.matrix(), resolution_h=self.base.resolution_h)
