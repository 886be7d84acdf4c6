"""
hyperspace module
Distances and convergence certificates between subsets of one sampled space:
Hausdorff distance, the gap between distance functionals, Wijsman tables,
hit-and-miss membership, scale-explicit local-finiteness counts, and the
locally finite ball family built from a function with positive set
oscillation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from numbers import Real
from typing import Sequence

import numpy as np

from oscillation_lab.errors import ArgumentError, InvariantViolation, ResolutionError, StructuralError
from oscillation_lab.ext_real import ExtReal
from oscillation_lab.functions import FunctionOracle
from oscillation_lab.metric_core import (
    MetricSpace,
    SubsetRef,
    ball,
    enlargement,
    nearest_distances,
)
from oscillation_lab.oscillation import omega_n
from oscillation_lab.parallel import ordered_map

# Largest ball index tried when shrinking a ball below the threshold.
MAX_DEPTH = 2**40


@dataclass(frozen=True)
class OpenBall:
    """
    The open ball ``S(center, radius)``.
    """

    center: int
    radius: Real

    def to_descriptor(self) -> dict:
        return {"center": self.center, "radius": self.radius}


@dataclass(frozen=True)
class HitMissFamily:
    """
    A finite family of open balls of one space.

    :ivar space: The ambient space.
    :vartype space: MetricSpace
    :ivar opens: The balls; may be empty only as the output of a failed
        construction.
    :vartype opens: tuple[OpenBall, ...]
    """

    space: MetricSpace
    opens: tuple[OpenBall, ...]

    def __post_init__(self):
        for b in self.opens:
            if not b.radius > 0:
                raise ArgumentError(f"ball radius must be > 0, got {b.radius!r}")
            if not 0 <= b.center < len(self.space):
                raise StructuralError(f"ball center {b.center} out of range")

    def __len__(self) -> int:
        return len(self.opens)

    def members(self) -> list[SubsetRef]:
        return [ball(self.space, b.center, b.radius) for b in self.opens]

    def to_descriptor(self) -> list[dict]:
        return [b.to_descriptor() for b in self.opens]


@dataclass(frozen=True)
class SetSequence:
    """
    Terms ``A_1..A_L`` and a limit candidate, all in one space.
    """

    space: MetricSpace
    terms: tuple[SubsetRef, ...]
    limit_candidate: SubsetRef

    def __post_init__(self):
        if not self.terms:
            raise ArgumentError("set sequence needs at least one term")
        for t in (*self.terms, self.limit_candidate):
            if t.space is not self.space:
                raise StructuralError("set sequence terms belong to different spaces")

    def __len__(self) -> int:
        return len(self.terms)

    def term(self, lam: int) -> SubsetRef:
        if not 1 <= lam <= len(self.terms):
            raise ArgumentError(f"index {lam} outside 1..{len(self.terms)}")
        return self.terms[lam - 1]


def hausdorff(A: SubsetRef, B: SubsetRef) -> ExtReal:
    """
    ``H(A, B) = max(max_a d(a, B), max_b d(b, A))``.

    :param A: First subset.
    :type A: SubsetRef
    :param B: Second subset.
    :type B: SubsetRef
    :returns: The Hausdorff distance.
    :rtype: ExtReal
    """
    A.check_same_space(B)
    if A == B:
        return ExtReal(0)
    return ExtReal(max(nearest_distances(A, B).max(), nearest_distances(B, A).max()))


def distance_functional_gap(A: SubsetRef, B: SubsetRef, probe: SubsetRef):
    """
    ``max over p in probe of |d(p, A) - d(p, B)|``.
    """
    A.check_same_space(B)
    A.check_same_space(probe)
    return np.abs(nearest_distances(probe, A) - nearest_distances(probe, B)).max()


def enlargement_certificate(A: SubsetRef, B: SubsetRef, eps) -> bool:
    """
    Check that mutual containment in the eps-enlargements bounds the
    Hausdorff distance by eps.

    :returns: Whether the mutual containment holds.
    :raises InvariantViolation: If it holds but ``H(A, B) > eps``.
    """
    contained = B.issubset(enlargement(A, eps)) and A.issubset(enlargement(B, eps))
    if contained and hausdorff(A, B) > eps:
        raise InvariantViolation(f"H(A, B) = {hausdorff(A, B)} exceeds eps = {eps} under mutual containment")
    return contained


@dataclass(frozen=True)
class WijsmanReport:
    """
    Table of ``|d(p, A_n) - d(p, A)|`` per probe point and index.

    :ivar rows: ``(n, point_id, deviation)`` in (n, point_id) order.
    :vartype rows: tuple[tuple, ...]
    :ivar tail_max: Max deviation over the last quartile of n, per probe point.
    :vartype tail_max: dict[int, float]
    :ivar trends: ``nonincreasing`` or ``mixed`` per probe point.
    :vartype trends: dict[int, str]
    :ivar verdict: ``converging`` when every tail max is within tol,
        otherwise ``not_converging``.
    :vartype verdict: str
    """

    rows: tuple[tuple, ...]
    tail_max: dict
    trends: dict
    verdict: str
    tol: float


def tail_start(length: int) -> int:
    """
    First 0-based position of the last quartile of ``length`` indices.
    """
    return length - max(1, length // 4)


def wijsman_profile(seq: SetSequence, probe: SubsetRef, tol: float = 1e-9, jobs: int = 1) -> WijsmanReport:
    """
    Per-point deviations of the distance functionals along a set sequence.

    :param seq: Sequence with its limit candidate.
    :type seq: SetSequence
    :param probe: Points at which the functionals are compared.
    :type probe: SubsetRef
    :param tol: Tail tolerance for the verdict.
    :type tol: float
    :param jobs: Parallelism over n.
    :type jobs: int
    :returns: The table and verdict.
    :rtype: WijsmanReport
    """
    probe.check_same_space(seq.limit_candidate)
    base = nearest_distances(probe, seq.limit_candidate)
    table = np.array(
        ordered_map(lambda t: np.abs(nearest_distances(probe, t) - base), seq.terms, jobs), dtype=float
    )
    start = tail_start(len(seq))
    rows, tail_max, trends = [], {}, {}
    for n, devs in enumerate(table, start=1):
        rows.extend((n, int(p), float(d)) for p, d in zip(probe.indices, devs))
    for k, p in enumerate(probe.indices.tolist()):
        column = table[:, k]
        tail_max[p] = float(column[start:].max())
        trends[p] = "nonincreasing" if np.all(np.diff(column) <= 0) else "mixed"
    verdict = "converging" if all(v <= tol for v in tail_max.values()) else "not_converging"
    return WijsmanReport(tuple(rows), tail_max, trends, verdict, tol)


def contained(B: SubsetRef, E: OpenBall) -> bool:
    """
    Whether every point of B lies in the open ball E.
    """
    return bool(np.all(np.asarray(B.space.distances_from(E.center, B.indices) < E.radius, dtype=bool)))


def hits(B: SubsetRef, fam: HitMissFamily) -> bool:
    """
    Whether B meets every ball of ``fam``.
    """
    if B.space is not fam.space:
        raise StructuralError("subset and family belong to different spaces")
    return all(
        bool(np.any(np.asarray(B.space.distances_from(E.center, B.indices) < E.radius, dtype=bool)))
        for E in fam.opens
    )


@dataclass(frozen=True)
class LocalFinitenessReport:
    """
    Per-point counts of family members meeting ``S(x, scale_r)``.

    A finite-scale proxy: on a finite sample local finiteness itself holds
    trivially, so the report only certifies counts at the stated scale.
    """

    scale_r: Real
    bound: int
    counts: np.ndarray = field(repr=False)
    passed: bool

    @property
    def max_count(self) -> int:
        return int(self.counts.max()) if len(self.counts) else 0


def locally_finite_certificate(fam: HitMissFamily, scale_r, bound: int | None = None) -> LocalFinitenessReport:
    """
    Count, for each sample point x, the members of ``fam`` meeting
    ``S(x, scale_r)``.

    :param fam: Family of balls.
    :type fam: HitMissFamily
    :param scale_r: Probe radius.
    :type scale_r: Real
    :param bound: Declared count bound; defaults to ``len(fam)``.
    :type bound: int or None
    :returns: The counts and whether they stay within the bound.
    :rtype: LocalFinitenessReport
    """
    if not scale_r > 0:
        raise ArgumentError(f"scale_r must be > 0, got {scale_r!r}")
    bound = len(fam) if bound is None else bound
    counts = np.zeros(len(fam.space), dtype=np.int64)
    for member in fam.members():
        # a member meets S(x, r) iff x is in its r-enlargement
        counts[enlargement(member, scale_r).indices] += 1
    return LocalFinitenessReport(scale_r, bound, counts, bool(counts.max(initial=0) <= bound))


@dataclass(frozen=True)
class LFConstruction:
    """
    Result of :func:`construct_lf_family`.

    :ivar family: Balls ``S(a_k, 1/n_{k+1})``.
    :vartype family: HitMissFamily
    :ivar centers: Points ``a_1, a_2, ...``.
    :vartype centers: tuple[int, ...]
    :ivar ns: Even integers ``n_1 < n_2 < ...``, one more than the centers.
    :vartype ns: tuple[int, ...]
    :ivar diagnostic: Why the construction stopped, or None after N steps.
    :vartype diagnostic: str or None
    """

    family: HitMissFamily
    centers: tuple[int, ...]
    ns: tuple[int, ...]
    alpha: float
    beta: float
    diagnostic: str | None


def _first_center_above(f: FunctionOracle, A: SubsetRef, n: int, beta) -> int | None:
    """
    Lowest PointId a in A with ``omega_n(f, a) > beta``.
    """
    space = A.space
    for I, J in space.iter_cross_pairs(A.indices, space.all_ids, space.radius(n)):
        centers, diams, infinite = f.group_diams(I, J)
        above = infinite | np.asarray(diams > beta, dtype=bool)
        if above.any():
            return int(centers[np.argmax(above)])
    return None


def _next_even_below(f: FunctionOracle, a: int, n_prev: int, beta) -> int:
    """
    Smallest even n > n_prev with ``omega_n(f, a) < beta``; omega_n is
    nonincreasing in n, so exponential search then bisection.
    """
    space = f.space
    below = lambda m: omega_n(f, a, m) < beta
    lo, step = n_prev, 2
    hi = n_prev + step
    while not below(hi):
        if hi > MAX_DEPTH:
            raise ResolutionError(f"omega_n(f, {a}) stays above beta up to n={hi}", index=a)
        lo, step = hi, step * 2
        hi = n_prev + step
    while hi - lo > 2:
        mid = lo + 2 * ((hi - lo) // 4)
        if below(mid):
            hi = mid
        else:
            lo = mid
    return hi


def construct_lf_family(f: FunctionOracle, A: SubsetRef, alpha: float, beta: float, N: int) -> LFConstruction:
    """
    Greedy construction of points ``a_k`` of A and even integers
    ``2 = n_1 < n_2 < ...`` with

    - ``diam f(S(a_j, 1/n_j)) > beta``,
    - ``diam f(S(a_j, 1/n_{j+1})) < beta``,
    - ``S(x, 2/n_j)`` contains ``S(a_j, 1/n_j)`` for every x in ``S(a_j, 1/n_{j+1})``,

    each asserted as it is emitted. Any B meeting every ball
    ``S(a_k, 1/n_{k+1})`` then has ``Omega(f, B) >= beta`` at the depths covered.

    Ties between candidate points go to the lowest PointId.

    :param f: Function on A's space.
    :type f: FunctionOracle
    :param A: Subset with ``Omega(f, A) > beta``.
    :type A: SubsetRef
    :param alpha: Lower threshold, ``alpha < beta``.
    :type alpha: float
    :param beta: Selection threshold.
    :type beta: float
    :param N: Maximum number of balls.
    :type N: int
    :returns: The family and the construction trace.
    :rtype: LFConstruction
    :raises ArgumentError: If ``alpha >= beta`` or N < 1.
    :raises InvariantViolation: If an emitted index breaks a selection rule.
    """
    f.check_space(A.space)
    if not 0 < beta or not alpha < beta:
        raise ArgumentError(f"need 0 < beta and alpha < beta, got alpha={alpha}, beta={beta}")
    if N < 1:
        raise ArgumentError(f"N must be >= 1, got {N}")
    space = A.space
    ns = [2]
    centers: list[int] = []
    diagnostic = None
    a = _first_center_above(f, A, ns[0], beta)
    if a is None:
        diagnostic = f"no point of A has omega_2 above beta={beta}; Omega estimate does not exceed beta"
        logging.warning(f"locally finite construction: {diagnostic}")
        return LFConstruction(HitMissFamily(space, ()), (), tuple(ns), alpha, beta, diagnostic)
    while True:
        n_k = ns[-1]
        if a in centers:
            raise InvariantViolation(f"center {a} chosen twice")
        if not omega_n(f, a, n_k) > beta:
            raise InvariantViolation(f"omega_{n_k}(f, {a}) does not exceed beta")
        centers.append(a)
        n_next = _next_even_below(f, a, n_k, beta)
        ns.append(n_next)
        _assert_containment(space, a, n_k, n_next)
        if len(centers) >= N:
            break
        a = _first_center_above(f, A, n_next, beta)
        if a is None:
            diagnostic = f"no point of A has omega_{n_next} above beta={beta} on this sample"
            logging.info(f"locally finite construction stopped after {len(centers)} balls: {diagnostic}")
            break
    opens = tuple(OpenBall(c, space.radius(n)) for c, n in zip(centers, ns[1:]))
    return LFConstruction(HitMissFamily(space, opens), tuple(centers), tuple(ns), alpha, beta, diagnostic)


def _assert_containment(space: MetricSpace, a: int, n_k: int, n_next: int) -> None:
    outer = ball(space, a, space.radius(n_k))
    limit = 2 * space.radius(n_k)
    for x in ball(space, a, space.radius(n_next)):
        if not np.all(np.asarray(space.distances_from(x, outer.indices) < limit, dtype=bool)):
            raise InvariantViolation(f"S({x}, 2/{n_k}) does not contain S({a}, 1/{n_k})")


def default_thresholds(omega_estimate: ExtReal) -> tuple[float, float]:
    """
    ``(alpha, beta) = (estimate / 4, estimate / 2)`` for a finite positive
    Omega estimate.
    """
    if omega_estimate.is_inf:
        raise ArgumentError("thresholds need a finite Omega estimate")
    value = float(omega_estimate.value)
    if value <= 0:
        raise ArgumentError("thresholds need a positive Omega estimate")
    return value / 4, value / 2


def hits_table(seq: Sequence[SubsetRef], fam: HitMissFamily) -> list[bool]:
    return [hits(term, fam) for term in seq]
