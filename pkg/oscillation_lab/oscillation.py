"""
oscillation module
Pointwise and set oscillation of a function at finite depth n: the ball
diameters omega_n(f, x), the pair suprema Omega_n(f, A) over the 1/n-enlargement,
Omega*_n(f, A) = max over a in A of omega_n(f, a), their profiles over
n = 1..N, and the exact finite inequalities that relate them.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from oscillation_lab.errors import ArgumentError, InvariantViolation
from oscillation_lab.ext_real import ZERO, ExtReal
from oscillation_lab.functions import FunctionOracle
from oscillation_lab.metric_core import SubsetRef, ball, enlargement
from oscillation_lab.parallel import ordered_map

TOL_ZERO = 1e-9

OMEGA_POINT = "omega_point"
OMEGA_SET = "Omega_set"
OMEGA_STAR_SET = "Omega_star_set"

CONVERGED = "converged_to_zero"
STABILIZED = "stabilized_positive"
DIVERGING = "diverging"
INFINITE = "infinite"


@dataclass(frozen=True)
class OscProfile:
    """
    Values n -> omega_n / Omega_n / Omega*_n for n = 1..N with a verdict.

    :ivar kind: One of ``omega_point``, ``Omega_set``, ``Omega_star_set``.
    :vartype kind: str
    :ivar values: ``values[n - 1]`` is the value at depth n.
    :vartype values: tuple[ExtReal, ...]
    :ivar verdict: Convergence verdict at the recorded depth.
    :vartype verdict: str
    :ivar resolution_h: Sampling pitch of the space the profile was computed on.
    :vartype resolution_h: float
    """

    kind: str
    values: tuple[ExtReal, ...]
    verdict: str
    resolution_h: float = 0.0
    subject: str = ""

    @property
    def depth(self) -> int:
        return len(self.values)

    @property
    def inf_value(self) -> ExtReal:
        return min(self.values)

    def value(self, n: int) -> ExtReal:
        return self.values[n - 1]

    def rows(self) -> list[list]:
        return [[self.kind, n, v] for n, v in enumerate(self.values, start=1)]


def classify(values: Sequence[ExtReal], tol_zero: float = TOL_ZERO, cap: float | None = None) -> str:
    """
    Verdict for a recorded profile.

    :param values: Profile values in n order.
    :type values: Sequence[ExtReal]
    :param tol_zero: Threshold under which the last value counts as zero.
    :type tol_zero: float
    :param cap: Optional bound; a last value above it is ``diverging``.
    :type cap: float or None
    :returns: ``infinite``, ``converged_to_zero``, ``diverging`` or
        ``stabilized_positive``.
    :rtype: str
    """
    last = values[-1]
    if last.is_inf:
        return INFINITE
    if last <= tol_zero:
        return CONVERGED
    if cap is not None and last > cap:
        return DIVERGING
    return STABILIZED


def _check_depth(n: int) -> None:
    if int(n) != n or n < 1:
        raise ArgumentError(f"depth must be an integer >= 1, got {n!r}")


def _scan_order(f: FunctionOracle, ids: np.ndarray) -> np.ndarray:
    """
    ``ids`` reordered so that points with extreme values come first; any order
    gives the same suprema, this one reaches them sooner.
    """
    if len(ids) <= 1:
        return ids
    if f.is_real:
        vals = np.asarray(f.values[ids], dtype=float)
        key = np.maximum(vals - vals.min(), vals.max() - vals)
    else:
        vals = f.values[ids]
        key = np.sqrt(((vals - vals.mean(axis=0)) ** 2).sum(axis=1))
    key = np.where(f.unbounded[ids], np.inf, key)
    return ids[np.argsort(-key, kind="stable")]


def omega_n(f: FunctionOracle, x: int, n: int) -> ExtReal:
    """
    ``omega_n(f, x) = diam_rho f(S(x, 1/n))`` over the sample.

    :param f: Function on the space.
    :type f: FunctionOracle
    :param x: PointId.
    :type x: int
    :param n: Depth, n >= 1.
    :type n: int
    :rtype: ExtReal
    """
    _check_depth(n)
    return f.diam(ball(f.space, x, f.space.radius(n)).indices)


def Omega_n(f: FunctionOracle, A: SubsetRef, n: int) -> ExtReal:
    """
    ``Omega_n(f, A)``: sup of ``rho(f(x), f(w))`` over x, w in ``S(A, 1/n)``
    with ``d(x, w) < 1/n``; 0 when no pair qualifies.

    The scan stops as soon as it reaches ``diam_rho f(S(A, 1/n))``, which
    bounds every pair.

    :param f: Function on A's space.
    :type f: FunctionOracle
    :param A: Subset.
    :type A: SubsetRef
    :param n: Depth, n >= 1.
    :type n: int
    :returns: The pair supremum.
    :rtype: ExtReal
    """
    _check_depth(n)
    f.check_space(A.space)
    r = A.space.radius(n)
    E = enlargement(A, r)
    bound = f.diam(E.indices)
    best = ZERO
    if bound == ZERO:
        return best
    for I, J in A.space.iter_cross_pairs(_scan_order(f, E.indices), E.indices, r):
        best = max(best, f.pair_sup(I, J))
        if best >= bound:
            break
    return best


def Omega_star_n(f: FunctionOracle, A: SubsetRef, n: int) -> ExtReal:
    """
    ``Omega*_n(f, A) = max over a in A of omega_n(f, a)``.

    :param f: Function on A's space.
    :type f: FunctionOracle
    :param A: Subset.
    :type A: SubsetRef
    :param n: Depth, n >= 1.
    :type n: int
    :rtype: ExtReal
    """
    _check_depth(n)
    f.check_space(A.space)
    space = A.space
    r = space.radius(n)
    bound = f.diam(enlargement(A, r).indices)
    best = ZERO
    if bound == ZERO:
        return best
    for I, J in space.iter_cross_pairs(_scan_order(f, A.indices), space.all_ids, r):
        best = max(best, f.max_group_diam(I, J))
        if best >= bound:
            break
    return best


def _profile(kind: str, compute, N: int, f: FunctionOracle, tol_zero: float, cap, jobs: int, subject: str) -> OscProfile:
    _check_depth(N)
    values = tuple(ordered_map(compute, range(1, N + 1), jobs))
    for n in range(1, N):
        if values[n] > values[n - 1]:
            raise InvariantViolation(f"{kind} profile of {f.name} increases from n={n} to n={n + 1}")
    profile = OscProfile(kind, values, classify(values, tol_zero, cap), f.space.resolution_h, subject)
    logging.info(f"{kind} profile of {f.name} at depth {N}: inf={profile.inf_value} ({profile.verdict})")
    return profile


def omega_profile(
    f: FunctionOracle, x: int, N: int, tol_zero: float = TOL_ZERO, cap: float | None = None, jobs: int = 1
) -> OscProfile:
    """
    Profile of omega_n(f, x) for n = 1..N.
    """
    return _profile(OMEGA_POINT, lambda n: omega_n(f, x, n), N, f, tol_zero, cap, jobs, f"point {x}")


def Omega_profile(
    f: FunctionOracle, A: SubsetRef, N: int, tol_zero: float = TOL_ZERO, cap: float | None = None, jobs: int = 1
) -> OscProfile:
    """
    Profile of Omega_n(f, A) for n = 1..N.

    :param f: Function.
    :type f: FunctionOracle
    :param A: Subset.
    :type A: SubsetRef
    :param N: Depth.
    :type N: int
    :param tol_zero: Zero threshold for the verdict.
    :type tol_zero: float
    :param cap: Optional divergence cap.
    :type cap: float or None
    :param jobs: Parallelism over n.
    :type jobs: int
    :returns: The profile.
    :rtype: OscProfile
    :raises InvariantViolation: If the values are not nonincreasing in n.
    """
    return _profile(OMEGA_SET, lambda n: Omega_n(f, A, n), N, f, tol_zero, cap, jobs, f"{len(A)} points")


def Omega_star_profile(
    f: FunctionOracle, A: SubsetRef, N: int, tol_zero: float = TOL_ZERO, cap: float | None = None, jobs: int = 1
) -> OscProfile:
    """
    Profile of Omega*_n(f, A) for n = 1..N.
    """
    return _profile(OMEGA_STAR_SET, lambda n: Omega_star_n(f, A, n), N, f, tol_zero, cap, jobs, f"{len(A)} points")


@dataclass(frozen=True)
class ContinuityVerdict:
    """
    Outcome of a strong-uniform-continuity test at depth N.

    :ivar passed: Whether ``Omega_N(f, A) <= tol``.
    :vartype passed: bool
    :ivar residual: ``Omega_N(f, A)``.
    :vartype residual: ExtReal
    :ivar profile: The full Omega profile.
    :vartype profile: OscProfile
    """

    passed: bool
    residual: ExtReal
    tol: float
    profile: OscProfile = field(repr=False)


def strong_uniform_continuity_test(
    f: FunctionOracle, A: SubsetRef, N: int, tol: float, jobs: int = 1
) -> ContinuityVerdict:
    """
    Pass iff ``Omega_N(f, A) <= tol``; the whole profile is reported.

    :raises ArgumentError: If tol < 0.
    """
    if tol < 0:
        raise ArgumentError(f"tol must be >= 0, got {tol}")
    profile = Omega_profile(f, A, N, tol_zero=tol, jobs=jobs)
    residual = profile.value(N)
    return ContinuityVerdict(residual <= tol, residual, tol, profile)


def usc_bound_check(f: FunctionOracle, A: SubsetRef, B: SubsetRef, n: int) -> tuple[ExtReal, ExtReal]:
    """
    For B inside the 1/(2n)-enlargement of A, check
    ``Omega_2n(f, B) <= Omega_n(f, A)``.

    :param f: Function.
    :type f: FunctionOracle
    :param A: Reference subset.
    :type A: SubsetRef
    :param B: Subset inside the half-enlargement of A.
    :type B: SubsetRef
    :param n: Depth.
    :type n: int
    :returns: ``(Omega_2n(f, B), Omega_n(f, A))``.
    :rtype: tuple[ExtReal, ExtReal]
    :raises ArgumentError: If B is not inside ``S(A, 1/(2n))``.
    :raises InvariantViolation: If the inequality fails.
    """
    _check_depth(n)
    A.check_same_space(B)
    if not B.issubset(enlargement(A, A.space.radius(2 * n))):
        raise ArgumentError(f"B is not inside the 1/{2 * n}-enlargement of A")
    lhs, rhs = Omega_n(f, B, 2 * n), Omega_n(f, A, n)
    if lhs > rhs:
        raise InvariantViolation(f"Omega_{2 * n}(f, B) = {lhs} exceeds Omega_{n}(f, A) = {rhs}")
    return lhs, rhs


def sandwich_check(f: FunctionOracle, A: SubsetRef, n: int) -> tuple[ExtReal, ExtReal, ExtReal, ExtReal]:
    """
    Check ``Omega_2n <= Omega*_n`` and ``Omega*_2n <= Omega_n`` at A.

    :returns: ``(Omega_n, Omega*_n, Omega_2n, Omega*_2n)``.
    :raises InvariantViolation: If either inequality fails.
    """
    _check_depth(n)
    on, osn = Omega_n(f, A, n), Omega_star_n(f, A, n)
    o2n, os2n = Omega_n(f, A, 2 * n), Omega_star_n(f, A, 2 * n)
    if o2n > osn:
        raise InvariantViolation(f"Omega_{2 * n} = {o2n} exceeds Omega*_{n} = {osn}")
    if os2n > on:
        raise InvariantViolation(f"Omega*_{2 * n} = {os2n} exceeds Omega_{n} = {on}")
    return on, osn, o2n, os2n


def singleton_check(f: FunctionOracle, x: int, n: int) -> tuple[ExtReal, ExtReal, ExtReal]:
    """
    Check ``omega_2n(f, x) <= Omega_n(f, {x}) <= omega_n(f, x)``.

    :returns: ``(omega_2n, Omega_n({x}), omega_n)``.
    :raises InvariantViolation: If the chain breaks.
    """
    single = SubsetRef(f.space, [x])
    low, mid, high = omega_n(f, x, 2 * n), Omega_n(f, single, n), omega_n(f, x, n)
    if not low <= mid <= high:
        raise InvariantViolation(f"singleton chain fails at {x}, n={n}: {low}, {mid}, {high}")
    return low, mid, high


def global_modulus(f: FunctionOracle, n: int) -> ExtReal:
    """
    ``sup over x of omega_n(f, x)`` on the whole sample.
    """
    return Omega_star_n(f, SubsetRef.whole(f.space), n)


def uniform_continuity_bound_check(f: FunctionOracle, A: SubsetRef, n: int) -> tuple[ExtReal, ExtReal]:
    """
    Check ``Omega_2n(f, A) <= global_modulus(f, n)``: a global modulus bound
    at n controls the set oscillation of every subset at 2n.

    :returns: ``(global_modulus(f, n), Omega_2n(f, A))``.
    :raises InvariantViolation: If the bound fails.
    """
    modulus, value = global_modulus(f, n), Omega_n(f, A, 2 * n)
    if value > modulus:
        raise InvariantViolation(f"Omega_{2 * n}(f, A) = {value} exceeds the global modulus {modulus}")
    return modulus, value


@dataclass(frozen=True)
class SweepReport:
    """
    Omega_n over a growing-domain sweep.

    :ivar labels: One label per case.
    :vartype labels: tuple[str, ...]
    :ivar values: Omega_n per case.
    :vartype values: tuple[ExtReal, ...]
    :ivar verdict: ``diverging`` when a value exceeds the cap, else ``bounded``.
    :vartype verdict: str
    """

    n: int
    cap: float
    labels: tuple[str, ...]
    values: tuple[ExtReal, ...]
    verdict: str


def Omega_sweep(cases: Sequence[tuple[str, FunctionOracle, SubsetRef]], n: int, cap: float, jobs: int = 1) -> SweepReport:
    """
    Omega_n over ``(label, f, A)`` cases, typically one catalog instance per
    domain size.

    :param cases: Cases to evaluate, in sweep order.
    :type cases: Sequence[tuple[str, FunctionOracle, SubsetRef]]
    :param n: Depth.
    :type n: int
    :param cap: Divergence cap.
    :type cap: float
    :returns: The sweep report.
    :rtype: SweepReport
    """
    values = tuple(ordered_map(lambda case: Omega_n(case[1], case[2], n), cases, jobs))
    verdict = DIVERGING if any(v > cap for v in values) else "bounded"
    return SweepReport(n, cap, tuple(c[0] for c in cases), values, verdict)
