"""
test_convergence module
=======================

Tests for ``oscillation_lab.convergence``.

Covers:
- Function sequences, product nets and delta grids
- Strong and very strong uniform convergence on the tents
- The compact upgrade from singleton checks
- The finite epsilon-lemma on random exact instances
- The joint-continuity experiment and its control case
- The iterated-limit failure of the bump net
"""

import logging
from fractions import Fraction

import numpy as np
import pytest

from oscillation_lab.catalog import build_comb, build_real_line
from oscillation_lab.convergence import (
    FunctionSequence,
    ProductNet,
    adequate_delta_depth,
    delta_grid,
    epsilon_net,
    iterated_limit_failure_demo,
    joint_continuity_experiment,
    pointwise_singleton_check,
    strong_uniform_check,
    sup_dev,
    usc_epsilon_lemma,
    very_strong_uniform_check,
    vsu_compact_upgrade_check,
)
from oscillation_lab.errors import ArgumentError, StructuralError
from oscillation_lab.functions import FunctionOracle
from oscillation_lab.hyperspace import SetSequence
from oscillation_lab.metric_core import SubsetRef, enlargement
from tests.conftest import dyadic_instance


@pytest.fixture(scope="module")
def comb32():
    return build_comb(32)


def test_function_sequence_validation(line5):
    space, f = line5
    with pytest.raises(ArgumentError):
        FunctionSequence((), f)
    fs = FunctionSequence((f, f), f)
    assert len(fs) == 2
    assert fs.space is space
    with pytest.raises(ArgumentError):
        fs.term(3)
    vector = FunctionOracle(space, np.zeros((5, 2)))
    with pytest.raises(StructuralError):
        FunctionSequence((vector,), f)


@pytest.mark.parametrize("L,J", [(1, 0), (2, 1), (64, 6), (100, 6)], ids=["1", "2", "64", "100"])
def test_adequate_delta_depth(L, J):
    assert adequate_delta_depth(L) == J


def test_delta_grid_types(line5, bumps12):
    space, _ = line5
    assert delta_grid(space, 3) == (1.0, 0.5, 0.25, 0.125)
    assert delta_grid(bumps12.space, 2) == (Fraction(1), Fraction(1, 2), Fraction(1, 4))
    with pytest.raises(ArgumentError):
        delta_grid(space, -1)
    with pytest.raises(ArgumentError):
        adequate_delta_depth(0)


def test_constant_sequence_passes_both_checks(line5):
    space, f = line5
    fs = FunctionSequence((f,) * 5, f)
    A = SubsetRef(space, [0, 1])
    strong = strong_uniform_check(fs, A, 0.1, J=4)
    assert strong.passed and strong.lambda0 == 1
    assert strong.deltas == (1.0,) * 5
    very = very_strong_uniform_check(fs, A, 0.1, J=4)
    assert very.passed
    assert (very.lambda0, very.delta) == (1, 1.0)


def test_shifted_sequence_never_converges(line5):
    space, f = line5
    fs = FunctionSequence(tuple(f.shifted(1.0, name=f"g{k}") for k in range(4)), f)
    verdict = strong_uniform_check(fs, SubsetRef(space, [0]), 0.5, J=3)
    assert not verdict.passed
    assert verdict.lambda0 is None
    assert verdict.failing_lambda == 4
    assert verdict.deltas == (None,) * 4
    with pytest.raises(ArgumentError):
        strong_uniform_check(fs, SubsetRef(space, [0]), 0)


@pytest.mark.parametrize("eps", [0.5, 0.125], ids=["half", "eighth"])
def test_tents_converge_strongly_with_a_shrinking_delta(tents64, eps):
    fs, origin = tents64.sequences["tents"], tents64.subset("origin")
    verdict = strong_uniform_check(fs, origin, eps, delta_schedule=lambda lam: eps / (2 * lam))
    assert verdict.passed
    assert verdict.lambda0 == 1
    assert verdict.within_grid == "schedule"


def test_tents_grid_search_finds_the_largest_delta(tents64):
    fs, origin = tents64.sequences["tents"], tents64.subset("origin")
    verdict = strong_uniform_check(fs, origin, 0.5)
    assert verdict.passed
    assert verdict.deltas[0] == 0.25
    assert "j <= 20" in verdict.within_grid
    assert pointwise_singleton_check(fs, 0, 0.5).passed


def test_tents_do_not_converge_very_strongly(tents64):
    fs, origin = tents64.sequences["tents"], tents64.subset("origin")
    verdict = very_strong_uniform_check(fs, origin, 0.5, J=6)
    assert not verdict.passed
    assert verdict.lambda0 is None
    assert set(verdict.violations.values()) == {64}
    assert tents64.parameters["delta_depth"] == 6


def test_too_fine_grid_is_reported(tents64, caplog):
    fs, origin = tents64.sequences["tents"], tents64.subset("origin")
    with caplog.at_level(logging.WARNING):
        very_strong_uniform_check(fs, origin, 0.5, J=8)
    assert "finer than 64 terms resolve" in caplog.text


def test_scheduled_delta_must_be_positive(tents64):
    fs, origin = tents64.sequences["tents"], tents64.subset("origin")
    with pytest.raises(ArgumentError):
        strong_uniform_check(fs, origin, 0.5, delta_schedule=lambda lam: 0.0)


def test_epsilon_net_covers(unit_interval):
    A = unit_interval.subset("A")
    net = epsilon_net(A, 0.1)
    assert net[0] == 0
    space = unit_interval.space
    for x in A:
        assert min(space.distance(x, c) for c in net) < 0.1


def test_compact_upgrade(unit_interval):
    f, A = unit_interval.function("f"), unit_interval.subset("A")
    fs = FunctionSequence(tuple(f.shifted(1 / (4 * lam), name=f"f_{lam}") for lam in range(1, 9)), f)
    report = vsu_compact_upgrade_check(fs, A, 0.1, J=4, jobs=2)
    assert report.passed
    assert all(report.singleton_passed)
    assert report.set_verdict.lambda0 == 3
    assert report.set_verdict.delta == 1.0


def test_epsilon_lemma_on_random_instances():
    rng = np.random.default_rng(99)
    for _ in range(1000):
        space, f = dyadic_instance(rng, int(rng.integers(2, 30)))
        offsets = [rng.integers(-4, 5, size=len(space)) / 8 for _ in range(3)]
        fs = FunctionSequence(tuple(f.shifted(o, name=f"g{k}") for k, o in enumerate(offsets)), f)
        lam = int(rng.integers(1, 4))
        eps = float(np.abs(offsets[lam - 1]).max()) + 1 / 8
        n = int(rng.integers(1, 17))
        A = SubsetRef(space, rng.choice(len(space), size=int(rng.integers(1, min(5, len(space)) + 1)), replace=False))
        halo = enlargement(A, space.radius(2 * n))
        A_lam = SubsetRef(space, rng.choice(halo.indices, size=int(rng.integers(1, len(halo) + 1)), replace=False))
        lhs, rhs = usc_epsilon_lemma(fs, lam, A, A_lam, n, eps)
        assert lhs <= rhs


def test_epsilon_lemma_preconditions(line5):
    space, f = line5
    fs = FunctionSequence((f.shifted(1.0),), f)
    A = SubsetRef(space, [0])
    with pytest.raises(ArgumentError):
        usc_epsilon_lemma(fs, 1, A, A, 1, 0.5)
    with pytest.raises(ArgumentError):
        usc_epsilon_lemma(fs, 1, A, SubsetRef(space, [4]), 1, 2.0)


def test_sup_dev(line5):
    space, f = line5
    fs = FunctionSequence((f.shifted(np.array([0.0, 0.0, 0.0, 0.0, 3.0])),), f)
    assert sup_dev(fs, 1, SubsetRef(space, [0, 1])) == 0
    assert sup_dev(fs, 1, SubsetRef.whole(space)) == 3.0


def test_joint_continuity_on_the_comb(comb32):
    report = joint_continuity_experiment(
        comb32.sequences["perturbed"], comb32.set_sequences["axis_truncations"], 16, jobs=4
    )
    assert report.reference == 1
    assert report.tail_from == 25
    for lam, omega, H, dev, _ in report.rows:
        if lam >= 17:
            assert abs(omega.to_float() - 1) <= 0.05
        assert dev.to_float() <= 1 / lam + 1e-12
    assert report.verdict == "converged"


def test_joint_continuity_control_fails_the_certificate():
    inst = build_real_line(20, 0.05, terms=16)
    report = joint_continuity_experiment(inst.sequences["square"], inst.set_sequences["exhaustion"], 16)
    assert report.certificate == "failed"
    assert report.verdict == "certificate_failed"
    assert report.family is not None
    assert report.family.opens[0].center == 0
    assert report.tail_deviation > report.tol


def test_joint_continuity_lengths_must_match(line5):
    space, f = line5
    fs = FunctionSequence((f, f), f)
    seq = SetSequence(space, (SubsetRef(space, [0]),), SubsetRef(space, [0]))
    with pytest.raises(ArgumentError):
        joint_continuity_experiment(fs, seq, 4)


def test_bump_net_rows_converge_but_the_diagonal_does_not(bumps12):
    report = iterated_limit_failure_demo(bumps12.product_net)
    assert report.rows_ok
    assert report.diagonal_fails
    assert report.row_deltas[1] == Fraction(1, 2) - Fraction(1, 9)
    assert {d: report.diagonal[d] for d in (Fraction(1), Fraction(1, 2), Fraction(1, 4), Fraction(1, 8))} == {
        Fraction(1): 2,
        Fraction(1, 2): 3,
        Fraction(1, 4): 5,
        Fraction(1, 8): 9,
    }
    assert report.diagonal[Fraction(1, 16)] == "unresolved"
    assert report.resolving_K == 2**10 + 1
    assert iterated_limit_failure_demo(bumps12.product_net, J=3).resolving_K is None
    assert not report.diagonal_verdict.passed


def test_bump_values(bumps12):
    net = bumps12.product_net
    f = net.table[(3, 2)]
    center = 1 + 3 * ((3 - 1) * 12 + (2 - 1))
    assert f(center) == 1
    assert f(0) == 0
    assert f(center + 1) == Fraction(1, 2)
    other = 1 + 3 * ((3 - 1) * 12 + (5 - 1))
    assert f(other) == 0
    assert len(bumps12.space) == 433


def test_product_net_validation(bumps12):
    net = bumps12.product_net
    with pytest.raises(ArgumentError):
        net.along(lambda k: k + 1)
    with pytest.raises(StructuralError):
        ProductNet(2, 2, {(1, 1): net.limit}, net.limit)
    assert len(net.row(4)) == 12
