"""
ucset module
Finite-scale UC-subset diagnostics: the pseudo-isolated non-clustering scan,
asymptotic pairs built from its witness (limit-point and isolated-point
constructions), the witness function with unbounded set oscillation, and the
probe tying them together.

A scan can only exhibit defects; "no asymptotic pair found at scale" is never
a certificate that A is a UC-subset.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from oscillation_lab.errors import ArgumentError, InvariantViolation, ResolutionError, StructuralError
from oscillation_lab.ext_real import ExtReal
from oscillation_lab.functions import FunctionOracle
from oscillation_lab.metric_core import SubsetRef, dist_point_set, isolation
from oscillation_lab.oscillation import DIVERGING, Omega_n, Omega_profile, OscProfile
from oscillation_lab.parallel import ordered_map

DEFECT = "defect_witness"
NO_DEFECT = "no_defect_at_scale"

DELTA_FACTOR = 4
SEPARATION_FACTOR = 100
DEFAULT_K_MIN = 8
DEFAULT_K_MAX = 64


@dataclass(frozen=True)
class UCReport:
    """
    Outcome of :func:`uc_defect_scan`.

    :ivar witness: Points of A with isolation <= delta and pairwise distance
        >= s, in PointId order.
    :vartype witness: tuple[int, ...]
    :ivar verdict: ``defect_witness`` or ``no_defect_at_scale``.
    :vartype verdict: str
    :ivar flags: Fidelity warnings, e.g. ``delta_below_resolution``.
    :vartype flags: tuple[str, ...]
    """

    A: SubsetRef = field(repr=False)
    delta: float
    s: float
    k_min: int
    k_max: int
    witness: tuple[int, ...]
    verdict: str
    flags: tuple[str, ...]
    resolution_h: float

    def to_descriptor(self) -> dict:
        return {
            "delta": self.delta,
            "s": self.s,
            "k_min": self.k_min,
            "k_max": self.k_max,
            "resolution_h": self.resolution_h,
            "witness": list(self.witness),
            "verdict": self.verdict,
            "flags": list(self.flags),
        }


def default_scan_scale(A: SubsetRef) -> tuple[float, float]:
    """
    ``(delta, s) = (4h, 100h)`` for the space's resolution h.

    :raises ArgumentError: When h = 0; such spaces need explicit scales.
    """
    h = A.space.resolution_h
    if h <= 0:
        raise ArgumentError("resolution_h is 0; pass delta and s explicitly")
    return DELTA_FACTOR * h, SEPARATION_FACTOR * h


def uc_defect_scan(
    A: SubsetRef, delta: float, s: float, k_min: int = DEFAULT_K_MIN, k_max: int = DEFAULT_K_MAX
) -> UCReport:
    """
    Greedy search, in PointId order, for points of A with
    ``isolation <= delta`` that stay at least ``s`` apart.

    At least ``k_min`` such points make a defect witness: a pseudo-isolated
    sequence that does not cluster at scale ``(delta, s)``. The search stops
    at ``k_max`` points.

    :param A: Subset to scan.
    :type A: SubsetRef
    :param delta: Isolation threshold, > 0.
    :type delta: float
    :param s: Separation, > 0.
    :type s: float
    :param k_min: Witness size for a defect, >= 2.
    :type k_min: int
    :param k_max: Largest witness collected.
    :type k_max: int
    :returns: The report; ``delta < 2h`` is flagged, not rejected.
    :rtype: UCReport
    :raises ArgumentError: On invalid scales.
    """
    if not delta > 0 or not s > 0:
        raise ArgumentError(f"delta and s must be > 0, got delta={delta}, s={s}")
    if k_min < 2 or k_max < k_min:
        raise ArgumentError(f"need 2 <= k_min <= k_max, got k_min={k_min}, k_max={k_max}")
    space = A.space
    flags = []
    if delta < 2 * space.resolution_h:
        flags.append("delta_below_resolution")
        logging.warning(f"delta={delta} is below 2*resolution_h={2 * space.resolution_h}; every point looks isolated")
    iso = space.isolation_of(A.indices)
    candidates = A.indices[np.asarray(iso <= delta, dtype=bool)]
    witness: list[int] = []
    for c in candidates:
        c = int(c)
        if witness and not np.all(np.asarray(space.distances_from(c, witness) >= s, dtype=bool)):
            continue
        witness.append(c)
        if len(witness) >= k_max:
            break
    verdict = DEFECT if len(witness) >= k_min else NO_DEFECT
    logging.info(f"UC scan at delta={delta}, s={s}: {len(witness)} separated pseudo-isolated points ({verdict})")
    return UCReport(A, delta, s, k_min, k_max, tuple(witness), verdict, tuple(flags), space.resolution_h)


@dataclass(frozen=True)
class AsymptoticPair:
    """
    Disjoint sets C (inside A) and E with pairing distances shrinking.

    :ivar pairing: ``(c_k, e_k)`` sorted by nonincreasing ``d(c_k, e_k)``.
    :vartype pairing: tuple[tuple[int, int], ...]
    :ivar separation_s: Min pairwise distance within C and within E.
    :vartype separation_s: float
    :ivar case: ``a`` (limit points) or ``b`` (isolated points).
    :vartype case: str
    :ivar diagnostic: Stall or degeneracy note, if any.
    :vartype diagnostic: str or None
    """

    C: SubsetRef
    E: SubsetRef
    pairing: tuple[tuple[int, int], ...]
    separation_s: float
    case: str
    diagnostic: str | None = None
    radii: tuple = ()

    @property
    def degenerate(self) -> bool:
        return len(self.pairing) < 2

    @property
    def distances(self) -> list:
        space = self.C.space
        return [space.distance(c, e) for c, e in self.pairing]

    def to_descriptor(self) -> dict:
        return {
            "case": self.case,
            "C": self.C.to_descriptor(),
            "E": self.E.to_descriptor(),
            "pairing": [list(p) for p in self.pairing],
            "distances": self.distances,
            "separation_s": self.separation_s,
            "diagnostic": self.diagnostic,
        }


def _min_pairwise(space, ids: Sequence[int]) -> float:
    if len(ids) < 2:
        return math.inf
    ids = np.asarray(ids, dtype=np.intp)
    return min(space.distances_from(int(x), np.delete(ids, k)).min() for k, x in enumerate(ids))


def _nearest_other(space, x: int) -> tuple[int, object]:
    """
    Nearest sample point distinct from x; lowest PointId on ties.
    """
    d = np.array(space.distances_from(x, space.all_ids), dtype=object if space.exact else float)
    d[x] = None if space.exact else np.inf
    if space.exact:
        best = min(v for k, v in enumerate(d) if k != x)
        j = next(k for k, v in enumerate(d) if k != x and v == best)
        return j, best
    j = int(np.argmin(d))
    return j, d[j]


def _finish(space, A: SubsetRef | None, pairs: list[tuple[int, int]], case: str, diagnostic, radii=()) -> AsymptoticPair:
    if not pairs:
        raise ResolutionError("no pair could be built from the witness")
    pairs = sorted(pairs, key=lambda p: space.distance(*p), reverse=True)
    C = SubsetRef(space, [c for c, _ in pairs])
    E = SubsetRef(space, [e for _, e in pairs])
    if C.intersects(E):
        raise InvariantViolation("asymptotic pair sides intersect")
    if A is not None and not C.issubset(A):
        raise InvariantViolation("C is not inside A")
    if any(not space.distance(c, e) > 0 for c, e in pairs):
        raise InvariantViolation("pairing distance is not positive")
    separation = min(_min_pairwise(space, [c for c, _ in pairs]), _min_pairwise(space, [e for _, e in pairs]))
    if len(pairs) < 2:
        diagnostic = diagnostic or "degenerate pair of size 1"
    return AsymptoticPair(C, E, tuple(pairs), float(separation), case, diagnostic, tuple(radii))


def build_pair_case_a(A: SubsetRef, witness: Sequence[int]) -> AsymptoticPair:
    """
    Limit-point construction: radii ``r_n = 1/k_n`` with ``k_n`` strictly
    increasing and ``r_n`` below a third of the distance from ``a_n`` to the
    other witness points, and ``e_n`` the nearest distinct sample point, which
    must fall inside ``S(a_n, r_n)``.

    :param A: Subset containing the witness.
    :type A: SubsetRef
    :param witness: Pairwise separated points of A.
    :type witness: Sequence[int]
    :returns: The pair, with pairwise disjoint balls ``S(a_n, r_n)`` checked.
    :rtype: AsymptoticPair
    :raises ResolutionError: When no distinct sample point lies inside
        ``r_n``; ``index`` names the witness position.
    """
    space = A.space
    witness = [int(w) for w in witness]
    if not witness:
        raise ArgumentError("empty witness")
    if len(set(witness)) != len(witness):
        raise ArgumentError("witness points must be distinct")
    pairs, radii = [], []
    k_prev = 0
    for pos, a in enumerate(witness):
        others = [w for w in witness if w != a]
        gap = space.distances_from(a, others).min() if others else None
        k = k_prev + 1 if gap is None else max(k_prev + 1, math.floor(3 / gap) + 1)
        r = space.radius(k)
        e, d = _nearest_other(space, a)
        if not d < r:
            raise ResolutionError(
                f"witness {pos} (point {a}): nearest distinct point at {d} is not inside radius 1/{k}", index=pos
            )
        pairs.append((a, e))
        radii.append(r)
        k_prev = k
    for i in range(len(witness)):
        for j in range(i + 1, len(witness)):
            if space.distance(witness[i], witness[j]) < radii[i] + radii[j]:
                raise InvariantViolation(f"balls around witness {i} and {j} overlap")
    return _finish(space, A, pairs, "a", None, radii)


def build_pair_case_b(A: SubsetRef, isolated_witness: Sequence[int]) -> AsymptoticPair:
    """
    Isolated-point construction. Starting from ``n_1 = 1``, each step takes

    ``delta = min(I(a_{n_j}), I(x_{n_j}) for isolated x_{n_j})``

    over the points chosen so far, then the next witness index n with
    ``I(a_n) + 1/n < delta`` and the nearest distinct point ``x_n`` of
    ``a_n``; the chosen a's and x's stay disjoint at every step.

    Witness indices n are 1-based positions in ``isolated_witness``.

    :param A: Subset containing the witness.
    :type A: SubsetRef
    :param isolated_witness: Isolated points with strictly decreasing isolation.
    :type isolated_witness: Sequence[int]
    :returns: The pair; a stall before the witness is used up is recorded in
        ``diagnostic``.
    :rtype: AsymptoticPair
    :raises ArgumentError: If isolation is not strictly decreasing.
    """
    space = A.space
    witness = [int(w) for w in isolated_witness]
    if not witness:
        raise ArgumentError("empty witness")
    iso = [isolation(space, a) for a in witness]
    if any(not iso[i + 1] < iso[i] for i in range(len(iso) - 1)):
        raise ArgumentError("isolation values must be strictly decreasing along the witness")
    threshold = 2 * space.resolution_h

    def inv(n: int):
        return space.radius(n)

    chosen_a, chosen_x, pairs = [], [], []
    n = 1
    diagnostic = None
    while True:
        a = witness[n - 1]
        x, d = _nearest_other(space, a)
        if not 0 < d < iso[n - 1] + inv(n):
            raise InvariantViolation(f"pairing distance {d} at witness {n} violates 0 < d < I + 1/n")
        if a in chosen_x or x in chosen_a or x == a:
            raise InvariantViolation(f"step {n} breaks disjointness of the two sides")
        chosen_a.append(a)
        chosen_x.append(x)
        pairs.append((a, x))
        bound = min(
            [isolation(space, c) for c in chosen_a]
            + [i for i in (isolation(space, y) for y in chosen_x) if i > threshold]
        )
        nxt = next((m for m in range(n + 1, len(witness) + 1) if iso[m - 1] + inv(m) < bound), None)
        if nxt is None:
            if n < len(witness):
                diagnostic = f"stalled after {len(pairs)} pairs: no witness index beyond {n} has I + 1/n < {bound}"
                logging.warning(f"isolated-point construction {diagnostic}")
            break
        n = nxt
    return _finish(space, A, pairs, "b", diagnostic)


def classify_witness(A: SubsetRef, witness: Sequence[int]) -> tuple[list[int], list[int]]:
    """
    Split a witness into limit points (isolation <= 2h) and isolated points.
    """
    space = A.space
    limit, isolated = [], []
    for w in witness:
        (limit if isolation(space, int(w)) <= 2 * space.resolution_h else isolated).append(int(w))
    return limit, isolated


def build_asymptotic_pair(A: SubsetRef, report: UCReport) -> AsymptoticPair:
    """
    Build a pair from a defect witness, using the larger of its limit-point
    and isolated-point classes (limit points on a tie). Isolated points are
    ordered by decreasing isolation, keeping one point per isolation value.

    :raises ArgumentError: If the report holds no witness.
    """
    if report.A is not A and report.A != A:
        raise StructuralError("report was computed for another subset")
    if not report.witness:
        raise ArgumentError("report has no witness points")
    limit, isolated = classify_witness(A, report.witness)
    if len(limit) >= len(isolated):
        try:
            return build_pair_case_a(A, limit)
        except ResolutionError as exc:
            if exc.index is None or exc.index < 2:
                raise
            logging.warning(f"limit-point construction cut to the first {exc.index} witness points: {exc}")
            pair = build_pair_case_a(A, limit[: exc.index])
            return AsymptoticPair(
                pair.C, pair.E, pair.pairing, pair.separation_s, pair.case,
                f"cut at witness {exc.index} by sample resolution", pair.radii,
            )
    space = A.space
    ordered, last = [], None
    for w in sorted(isolated, key=lambda w: (-float(isolation(space, w)), w)):
        i = isolation(space, w)
        if last is None or i < last:
            ordered.append(w)
            last = i
    return build_pair_case_b(A, ordered)


def pair_depth(pair: AsymptoticPair) -> int:
    """
    Largest n with ``n < 1 / min pairing distance``.
    """
    d = min(pair.distances)
    return math.ceil(1 / d) - 1


def witness_function(pair: AsymptoticPair, name: str = "witness") -> FunctionOracle:
    """
    Real function equal to 0 on C and ``1/d(e, C)`` on E, extended to the
    rest of the sample by the infimal Lipschitz extension

    ``F(x) = max(0, min over y in C+E of h(y) + K d(x, y))``

    with K the Lipschitz constant of the prescription h on C+E.

    :param pair: Asymptotic pair.
    :type pair: AsymptoticPair
    :returns: The witness function; exact on C+E.
    :rtype: FunctionOracle
    :raises ArgumentError: If some e has ``d(e, C) = 0``.
    """
    space = pair.C.space
    support = list(pair.C) + list(pair.E)
    prescribed = {c: 0.0 for c in pair.C}
    for e in pair.E:
        d = dist_point_set(e, pair.C)
        if not d > 0:
            raise ArgumentError(f"point {e} of E lies at distance 0 from C")
        prescribed[e] = 1.0 / float(d)
    ids = np.array(support, dtype=np.intp)
    h = np.array([prescribed[y] for y in support])
    lipschitz = 0.0
    for k, y in enumerate(support):
        dist = np.asarray(space.distances_from(y, ids), dtype=float)
        mask = dist > 0
        if mask.any():
            lipschitz = max(lipschitz, float((np.abs(h[mask] - h[k]) / dist[mask]).max()))
    values = np.empty(len(space))
    for start in range(0, len(space), 4096):
        rows = space.all_ids[start : start + 4096]
        dist = np.asarray(space._distance_block(rows, ids), dtype=float)
        values[start : start + 4096] = np.maximum(0.0, (h[None, :] + lipschitz * dist).min(axis=1))
    for y, v in prescribed.items():
        values[y] = v
    return FunctionOracle(space, values, name=name)


def round_trip_check(f: FunctionOracle, A: SubsetRef, depth: int, jobs: int = 1) -> tuple[ExtReal, ...]:
    """
    Check ``Omega_n(f, A) >= n`` for n = 1..depth.

    :returns: The values Omega_1..Omega_depth.
    :raises InvariantViolation: At the first n where the bound fails.
    """
    values = tuple(ordered_map(lambda n: Omega_n(f, A, n), range(1, depth + 1), jobs))
    for n, v in enumerate(values, start=1):
        if v < n:
            raise InvariantViolation(f"Omega_{n}(witness, A) = {v} is below {n}")
    return values


@dataclass(frozen=True)
class EquivalenceProbe:
    """
    Omega profiles of supplied functions at A, plus the scan -> pair -> witness
    round trip when the scan found a defect.
    """

    profiles: tuple[OscProfile, ...]
    scan: UCReport | None
    pair: AsymptoticPair | None
    witness_profile: OscProfile | None
    witness_verdict: str | None
    consistent: bool


def growth_verdict(profile: OscProfile) -> str:
    """
    ``diverging`` when ``values[n] >= n`` throughout the profile, the finite
    signature of infinite set oscillation; the profile verdict otherwise.
    """
    if all(v >= n for n, v in enumerate(profile.values, start=1)):
        return DIVERGING
    return profile.verdict


def uc_equivalence_probe(
    A: SubsetRef,
    f_list: Sequence[FunctionOracle],
    N: int,
    scan: UCReport | None = None,
    cap: float | None = None,
    jobs: int = 1,
) -> EquivalenceProbe:
    """
    Omega-profile verdicts for each supplied function at A. With a defect
    scan, also build the asymptotic pair and its witness function and expect
    a diverging witness profile; without a defect, expect every supplied
    profile to stay bounded at depth N.

    :param A: Subset.
    :type A: SubsetRef
    :param f_list: Nonempty list of real functions.
    :type f_list: Sequence[FunctionOracle]
    :param N: Depth.
    :type N: int
    :param scan: Optional defect scan of A.
    :type scan: UCReport or None
    :param cap: Divergence cap for the supplied profiles.
    :type cap: float or None
    :returns: The probe table.
    :rtype: EquivalenceProbe
    """
    if not f_list:
        raise ArgumentError("f_list must be nonempty")
    profiles = tuple(Omega_profile(f, A, N, cap=cap, jobs=jobs) for f in f_list)
    pair = witness_profile = verdict = None
    consistent = True
    if scan is not None and scan.verdict == DEFECT:
        pair = build_asymptotic_pair(A, scan)
        depth = min(N, pair_depth(pair))
        witness_profile = Omega_profile(witness_function(pair), A, depth, jobs=jobs)
        verdict = growth_verdict(witness_profile)
        consistent = verdict == DIVERGING
    elif scan is not None:
        consistent = all(not p.inf_value.is_inf for p in profiles)
    return EquivalenceProbe(profiles, scan, pair, witness_profile, verdict, consistent)
