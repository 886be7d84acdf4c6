"""
convergence module
Strong and very strong uniform convergence of function sequences on a
subset, the finite epsilon-lemma relating Omega of the terms to Omega of the
limit, the joint-continuity experiment, and the iterated-limit failure of the
product-indexed bump net.

Every verdict is relative to the finite index range 1..L and to the declared
delta grid {2^-j : j <= J}.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from oscillation_lab.errors import ArgumentError, InvariantViolation, StructuralError
from oscillation_lab.ext_real import ExtReal
from oscillation_lab.functions import FunctionOracle
from oscillation_lab.hyperspace import (
    HitMissFamily,
    SetSequence,
    construct_lf_family,
    default_thresholds,
    hausdorff,
    hits,
    tail_start,
)
from oscillation_lab.metric_core import MetricSpace, SubsetRef, enlargement
from oscillation_lab.oscillation import Omega_n
from oscillation_lab.parallel import ordered_map

DEFAULT_DELTA_DEPTH = 20


@dataclass(frozen=True)
class FunctionSequence:
    """
    Terms ``f_1..f_L`` and their limit, on one domain with one target.

    :ivar terms: ``terms[lam - 1]`` is ``f_lam``.
    :vartype terms: tuple[FunctionOracle, ...]
    :ivar limit: The limit function f.
    :vartype limit: FunctionOracle
    """

    terms: tuple[FunctionOracle, ...]
    limit: FunctionOracle

    def __post_init__(self):
        if not self.terms:
            raise ArgumentError("function sequence needs at least one term")
        for t in self.terms:
            t.check_space(self.limit.space)
            if t.target != self.limit.target:
                raise StructuralError(f"term {t.name!r} has a different target than the limit")

    @property
    def space(self) -> MetricSpace:
        return self.limit.space

    def __len__(self) -> int:
        return len(self.terms)

    def term(self, lam: int) -> FunctionOracle:
        if not 1 <= lam <= len(self.terms):
            raise ArgumentError(f"index {lam} outside 1..{len(self.terms)}")
        return self.terms[lam - 1]


@dataclass(frozen=True)
class ProductNet:
    """
    The net ``(k, n) -> f_{k,n}`` for k = 1..K, n = 1..Nmax, with selectors
    ``phi: k -> n`` standing in for the product-order tail.

    :ivar table: ``table[(k, n)]`` is ``f_{k,n}``.
    :vartype table: dict
    """

    K: int
    Nmax: int
    table: dict = field(repr=False)
    limit: FunctionOracle = field(repr=False)
    origin: int = 0

    def __post_init__(self):
        missing = [(k, n) for k in range(1, self.K + 1) for n in range(1, self.Nmax + 1) if (k, n) not in self.table]
        if missing:
            raise StructuralError(f"product net is missing terms {missing[:3]}")

    def row(self, k: int) -> FunctionSequence:
        return FunctionSequence(tuple(self.table[(k, n)] for n in range(1, self.Nmax + 1)), self.limit)

    def along(self, selector: Callable[[int], int]) -> FunctionSequence:
        """
        The sequence ``k -> f_{k, phi(k)}``.

        :raises ArgumentError: If phi leaves 1..Nmax.
        """
        picks = [selector(k) for k in range(1, self.K + 1)]
        if any(not 1 <= n <= self.Nmax for n in picks):
            raise ArgumentError(f"selector must map into 1..{self.Nmax}")
        return FunctionSequence(tuple(self.table[(k, n)] for k, n in zip(range(1, self.K + 1), picks)), self.limit)


def _check_eps(eps) -> None:
    if not eps > 0:
        raise ArgumentError(f"eps must be > 0, got {eps!r}")


def delta_grid(space: MetricSpace, J: int) -> tuple:
    """
    ``(1, 1/2, ..., 2^-J)`` in the space's number type.
    """
    if J < 0:
        raise ArgumentError(f"delta grid depth must be >= 0, got {J}")
    if space.exact:
        return tuple(Fraction(1, 2**j) for j in range(J + 1))
    return tuple(2.0**-j for j in range(J + 1))


def adequate_delta_depth(L: int) -> int:
    """
    Deepest J with ``2^-J >= 1/L``: finer deltas can be passed by the last
    terms alone.
    """
    if L < 1:
        raise ArgumentError(f"L must be >= 1, got {L}")
    return int(math.floor(math.log2(L)))


def _warn_depth(fs: FunctionSequence, J: int) -> None:
    adequate = adequate_delta_depth(len(fs))
    if J > adequate:
        logging.warning(f"delta grid depth {J} is finer than {len(fs)} terms resolve (adequate depth {adequate})")


def sup_dev(fs: FunctionSequence, lam: int, S: SubsetRef) -> ExtReal:
    """
    ``max over x in S of rho(f_lam(x), f(x))``.

    :param fs: Function sequence.
    :type fs: FunctionSequence
    :param lam: Index in 1..L.
    :type lam: int
    :param S: Subset to take the max over.
    :type S: SubsetRef
    :rtype: ExtReal
    """
    fs.limit.check_space(S.space)
    return fs.term(lam).deviation(fs.limit, S.indices)


def _first_tail(ok: Sequence[bool]) -> int | None:
    """
    Smallest 1-based lam0 with ``ok[lam - 1]`` for every lam >= lam0, or None.
    """
    lam0 = len(ok) + 1
    while lam0 > 1 and ok[lam0 - 2]:
        lam0 -= 1
    return lam0 if lam0 <= len(ok) else None


@dataclass(frozen=True)
class StrongVerdict:
    """
    Outcome of :func:`strong_uniform_check`.

    :ivar lambda0: Minimal lam0 of the passing tail, or None.
    :vartype lambda0: int or None
    :ivar failing_lambda: Last lam without an admissible delta, or None.
    :vartype failing_lambda: int or None
    :ivar deltas: Per-lam admissible delta (largest one in the grid), or None.
    :vartype deltas: tuple
    """

    passed: bool
    eps: float
    lambda0: int | None
    failing_lambda: int | None
    deltas: tuple
    within_grid: str


def strong_uniform_check(
    fs: FunctionSequence,
    A: SubsetRef,
    eps,
    delta_schedule: Callable[[int], float] | None = None,
    J: int = DEFAULT_DELTA_DEPTH,
    jobs: int = 1,
) -> StrongVerdict:
    """
    Strong uniform convergence on A: for lam >= lam0 some delta (possibly
    depending on lam) has ``sup_dev(fs, lam, S(A, delta)) < eps``.

    With a schedule, ``delta_schedule(lam)`` is the only delta tried;
    otherwise the geometric grid of depth J is searched per lam.

    :param fs: Function sequence.
    :type fs: FunctionSequence
    :param A: Subset.
    :type A: SubsetRef
    :param eps: Positive tolerance.
    :type eps: Real
    :param delta_schedule: Optional lam -> delta.
    :type delta_schedule: Callable or None
    :param J: Grid depth when no schedule is given.
    :type J: int
    :param jobs: Parallelism over lam.
    :type jobs: int
    :returns: The verdict.
    :rtype: StrongVerdict
    :raises ArgumentError: If eps <= 0 or a scheduled delta is not positive.
    """
    _check_eps(eps)
    fs.limit.check_space(A.space)
    grid = delta_grid(A.space, J)

    def admissible(lam: int):
        if delta_schedule is not None:
            delta = delta_schedule(lam)
            if not delta > 0:
                raise ArgumentError(f"delta schedule gave {delta!r} at lam={lam}")
            return delta if sup_dev(fs, lam, enlargement(A, delta)) < eps else None
        # sup_dev is monotone in delta, so the finest delta decides
        if not sup_dev(fs, lam, enlargement(A, grid[-1])) < eps:
            return None
        return next(d for d in grid if sup_dev(fs, lam, enlargement(A, d)) < eps)

    deltas = tuple(ordered_map(admissible, range(1, len(fs) + 1), jobs))
    lam0 = _first_tail([d is not None for d in deltas])
    failing = max((lam for lam, d in enumerate(deltas, start=1) if d is None), default=None)
    scope = "schedule" if delta_schedule is not None else f"within grid 2^-j, j <= {J}"
    return StrongVerdict(lam0 is not None, eps, lam0, failing, deltas, scope)


@dataclass(frozen=True)
class VeryStrongVerdict:
    """
    Outcome of :func:`very_strong_uniform_check`.

    :ivar lambda0: lam0 of the lexicographically least ``(lam0, j)`` witness.
    :vartype lambda0: int or None
    :ivar delta: delta of that witness.
    :ivar violations: Per delta of the grid, the last lam violating it
        (None where the delta admits a tail).
    :vartype violations: dict
    """

    passed: bool
    eps: float
    lambda0: int | None
    delta: object
    violations: dict
    deltas: tuple


def very_strong_uniform_check(
    fs: FunctionSequence, A: SubsetRef, eps, J: int = DEFAULT_DELTA_DEPTH, deltas: Sequence | None = None, jobs: int = 1
) -> VeryStrongVerdict:
    """
    Very strong uniform convergence on A: one delta serves every lam >= lam0,
    ``sup_dev(fs, lam, S(A, delta)) < eps``.

    :param fs: Function sequence.
    :type fs: FunctionSequence
    :param A: Subset.
    :type A: SubsetRef
    :param eps: Positive tolerance.
    :type eps: Real
    :param J: Depth of the geometric delta grid.
    :type J: int
    :param deltas: Explicit deltas replacing the grid.
    :type deltas: Sequence or None
    :param jobs: Parallelism over grid cells.
    :type jobs: int
    :returns: The verdict with its ``(lam0, delta)`` witness or per-delta
        violations.
    :rtype: VeryStrongVerdict
    :raises ArgumentError: If eps <= 0.
    """
    _check_eps(eps)
    fs.limit.check_space(A.space)
    if deltas is None:
        _warn_depth(fs, J)
        deltas = delta_grid(A.space, J)
    deltas = tuple(deltas)

    def cell(delta):
        S = enlargement(A, delta)
        return [sup_dev(fs, lam, S) < eps for lam in range(1, len(fs) + 1)]

    table = ordered_map(cell, deltas, jobs)
    violations, witness = {}, None
    for j, (delta, ok) in enumerate(zip(deltas, table)):
        lam0 = _first_tail(ok)
        violations[delta] = None if lam0 is not None else max(lam for lam, good in enumerate(ok, start=1) if not good)
        if lam0 is not None and (witness is None or (lam0, j) < witness[:2]):
            witness = (lam0, j, delta)
    if witness is None:
        return VeryStrongVerdict(False, eps, None, None, violations, deltas)
    return VeryStrongVerdict(True, eps, witness[0], witness[2], violations, deltas)


def pointwise_singleton_check(fs: FunctionSequence, x: int, eps, J: int = DEFAULT_DELTA_DEPTH) -> StrongVerdict:
    """
    Strong uniform convergence on ``{x}``.
    """
    return strong_uniform_check(fs, SubsetRef(fs.space, [x]), eps, J=J)


def epsilon_net(K: SubsetRef, radius) -> list[int]:
    """
    Greedy net of K in PointId order: every point of K lies within
    ``radius`` of a net point.
    """
    space = K.space
    net: list[int] = []
    covered = np.zeros(len(K), dtype=bool)
    for pos, x in enumerate(K.indices):
        if covered[pos]:
            continue
        net.append(int(x))
        covered |= np.asarray(space.distances_from(int(x), K.indices) < radius, dtype=bool)
    return net


@dataclass(frozen=True)
class CompactUpgradeReport:
    net: tuple[int, ...]
    singleton_passed: tuple[bool, ...]
    set_verdict: VeryStrongVerdict

    @property
    def passed(self) -> bool:
        return self.set_verdict.passed


def vsu_compact_upgrade_check(
    fs: FunctionSequence, K: SubsetRef, eps, net_radius=None, J: int = DEFAULT_DELTA_DEPTH, jobs: int = 1
) -> CompactUpgradeReport:
    """
    Singleton very-strong checks on an eps-net of K, then the check on K.

    :param fs: Function sequence.
    :type fs: FunctionSequence
    :param K: Compact-sample subset.
    :type K: SubsetRef
    :param eps: Positive tolerance.
    :type eps: Real
    :param net_radius: Net spacing; defaults to eps.
    :type net_radius: Real or None
    :returns: Singleton outcomes and the set verdict.
    :rtype: CompactUpgradeReport
    """
    _check_eps(eps)
    net = epsilon_net(K, eps if net_radius is None else net_radius)
    singles = tuple(
        ordered_map(lambda x: very_strong_uniform_check(fs, SubsetRef(K.space, [x]), eps, J=J).passed, net, jobs)
    )
    set_verdict = very_strong_uniform_check(fs, K, eps, J=J, jobs=jobs)
    if set_verdict.passed and not all(singles):
        raise InvariantViolation("set check passes while a singleton of its net fails")
    return CompactUpgradeReport(tuple(net), singles, set_verdict)


def usc_epsilon_lemma(
    fs: FunctionSequence, lam: int, A: SubsetRef, A_lam: SubsetRef, n: int, eps
) -> tuple[ExtReal, ExtReal]:
    """
    Under ``sup_dev(fs, lam, S(A, 1/n)) < eps`` and ``A_lam`` inside
    ``S(A, 1/(2n))``, check ``Omega_2n(f_lam, A_lam) <= Omega_n(f, A) + 2 eps``.

    :returns: ``(Omega_2n(f_lam, A_lam), Omega_n(f, A) + 2 eps)``.
    :raises ArgumentError: If a precondition fails.
    :raises InvariantViolation: If the inequality fails.
    """
    _check_eps(eps)
    A.check_same_space(A_lam)
    space = A.space
    if not sup_dev(fs, lam, enlargement(A, space.radius(n))) < eps:
        raise ArgumentError(f"f_{lam} is not eps-close to f on S(A, 1/{n})")
    if not A_lam.issubset(enlargement(A, space.radius(2 * n))):
        raise ArgumentError(f"A_{lam} is not inside S(A, 1/{2 * n})")
    lhs = Omega_n(fs.term(lam), A_lam, 2 * n)
    rhs = Omega_n(fs.limit, A, n) + 2 * eps
    if lhs > rhs:
        raise InvariantViolation(f"Omega_{2 * n}(f_{lam}, A_{lam}) = {lhs} exceeds {rhs}")
    return lhs, rhs


@dataclass(frozen=True)
class JointContinuityReport:
    """
    Table ``lam -> (Omega_N(f_lam, A_lam), H(A_lam, A), sup_dev(lam, X), hits)``.

    :ivar reference: ``Omega_N(f, A)``.
    :vartype reference: ExtReal
    :ivar tail_deviation: Max of ``|Omega_N(f_lam, A_lam) - Omega_N(f, A)|``
        over the last quartile of lam.
    :vartype tail_deviation: float
    :ivar certificate: ``passed``, ``failed`` or ``not_required`` (reference 0).
    :vartype certificate: str
    :ivar verdict: ``converged``, ``certificate_failed`` or ``not_converged``.
    :vartype verdict: str
    """

    depth: int
    reference: ExtReal
    rows: tuple[tuple, ...]
    tail_from: int
    tail_deviation: float
    certificate: str
    family: HitMissFamily | None = field(repr=False)
    verdict: str = ""
    tol: float = 0.0


def joint_continuity_experiment(
    fs: FunctionSequence, seq: SetSequence, N: int, tol: float = 0.05, family_steps: int = 8, jobs: int = 1
) -> JointContinuityReport:
    """
    Track ``Omega(f_lam, A_lam)`` against ``Omega(f, A)`` at depth N along
    uniformly converging functions and converging sets.

    Omega profiles are nonincreasing in n, so their recorded inf is the value
    at N. When ``Omega_N(f, A) > 0`` the tail sets must also hit the ball
    family built by :func:`construct_lf_family`; that certificate is reported
    alongside the deviations.

    :param fs: Functions with limit f.
    :type fs: FunctionSequence
    :param seq: Sets with limit candidate A, same length as fs.
    :type seq: SetSequence
    :param N: Depth.
    :type N: int
    :param tol: Tail tolerance.
    :type tol: float
    :param family_steps: Maximum number of certificate balls.
    :type family_steps: int
    :param jobs: Parallelism over lam.
    :type jobs: int
    :returns: The table and verdicts.
    :rtype: JointContinuityReport
    """
    if len(fs) != len(seq):
        raise ArgumentError(f"{len(fs)} functions for {len(seq)} sets")
    fs.limit.check_space(seq.space)
    A = seq.limit_candidate
    whole = SubsetRef.whole(seq.space)
    reference = Omega_n(fs.limit, A, N)
    family = None
    if reference == 0:
        certificate = "not_required"
    elif reference.is_inf:
        certificate = "failed"
    else:
        alpha, beta = default_thresholds(reference)
        family = construct_lf_family(fs.limit, A, alpha, beta, family_steps).family
        certificate = "pending"

    def row(lam: int):
        term_set = seq.term(lam)
        omega = Omega_n(fs.term(lam), term_set, N)
        hit = hits(term_set, family) if family is not None else None
        return (lam, omega, hausdorff(term_set, A), sup_dev(fs, lam, whole), hit)

    rows = tuple(ordered_map(row, range(1, len(fs) + 1), jobs))
    start = tail_start(len(rows))
    tail = rows[start:]
    if reference.is_inf:
        deviation = 0.0 if all(r[1].is_inf for r in tail) else math.inf
    else:
        ref = reference.to_float()
        deviation = max(abs(r[1].to_float() - ref) for r in tail)
    if certificate == "pending":
        certificate = "passed" if family is not None and len(family) and all(r[4] for r in tail) else "failed"
    if deviation <= tol:
        verdict = "converged"
    elif certificate == "failed":
        verdict = "certificate_failed"
    else:
        verdict = "not_converged"
    logging.info(f"joint continuity at depth {N}: tail deviation {deviation}, certificate {certificate}, {verdict}")
    return JointContinuityReport(N, reference, rows, start + 1, deviation, certificate, family, verdict, tol)


@dataclass(frozen=True)
class IteratedLimitReport:
    """
    Row checks and the diagonal check of a product net at one point.

    :ivar row_deltas: ``delta_k = 1/k - 3^-k`` per row.
    :vartype row_deltas: tuple
    :ivar rows_passed: Very-strong verdict per row at ``delta_k``.
    :vartype rows_passed: tuple[bool, ...]
    :ivar diagonal: Per grid delta, the first k with
        ``sup f_{k,k} = 1`` on ``S(origin, delta)``, or ``"unresolved"`` where
        ``delta <= 1/K``.
    :vartype diagonal: dict
    """

    K: int
    eps: object
    row_deltas: tuple
    rows_passed: tuple[bool, ...]
    diagonal: dict
    diagonal_verdict: VeryStrongVerdict

    @property
    def rows_ok(self) -> bool:
        return all(self.rows_passed)

    @property
    def diagonal_fails(self) -> bool:
        resolved = [v for v in self.diagonal.values() if v != "unresolved"]
        return bool(resolved) and all(v is not None for v in resolved) and not self.diagonal_verdict.passed

    @property
    def resolving_K(self) -> int | None:
        """
        Smallest number of rows that resolves every delta of the grid, or
        ``None`` when none is unresolved.
        """
        unresolved = [d for d, v in self.diagonal.items() if v == "unresolved"]
        if not unresolved:
            return None
        return math.floor(1 / min(unresolved)) + 1


def iterated_limit_failure_demo(pn: ProductNet, eps=Fraction(1, 2), J: int = 10) -> IteratedLimitReport:
    """
    Each row ``n -> f_{k,n}`` converges very strongly at the origin with
    ``delta_k = 1/k - 3^-k``, while along the diagonal selector ``phi(k) = k``
    every resolved delta of the grid is violated by some k.

    :param pn: The bump net.
    :type pn: ProductNet
    :param eps: Tolerance, at most 1.
    :type eps: Real
    :param J: Depth of the delta grid probed on the diagonal.
    :type J: int
    :returns: Row and diagonal outcomes.
    :rtype: IteratedLimitReport
    """
    _check_eps(eps)
    space = pn.limit.space
    origin = SubsetRef(space, [pn.origin])
    row_deltas = tuple(Fraction(1, k) - Fraction(1, 3**k) for k in range(1, pn.K + 1))
    rows_passed = tuple(
        very_strong_uniform_check(pn.row(k), origin, eps, deltas=[row_deltas[k - 1]]).passed
        for k in range(1, pn.K + 1)
    )
    diagonal_fs = pn.along(lambda k: k)
    diagonal = {}
    for delta in delta_grid(space, J):
        if delta <= Fraction(1, pn.K):
            diagonal[delta] = "unresolved"
            continue
        S = enlargement(origin, delta)
        diagonal[delta] = next((k for k in range(1, pn.K + 1) if sup_dev(diagonal_fs, k, S) == 1), None)
    resolved = [d for d, v in diagonal.items() if v != "unresolved"]
    verdict = very_strong_uniform_check(diagonal_fs, origin, eps, deltas=resolved)
    report = IteratedLimitReport(pn.K, eps, row_deltas, rows_passed, diagonal, verdict)
    logging.info(f"product net K={pn.K}: rows pass={report.rows_ok}, diagonal fails={report.diagonal_fails}")
    if report.resolving_K is not None:
        logging.warning(f"deltas <= 1/{pn.K} are unresolved; the full grid needs K >= {report.resolving_K}")
    return report
