"""Pseudo-multiplicative unitary checks on groupoid fixtures."""
import numpy as np
import pytest

from qgw.fixtures import FiniteGroupoid, groupoid_pentagon_unitary
from qgw.linalg import unitary_residual
from qgw.pmu import (
    check_pmu_cstar,
    check_pmu_state,
    groupoid_pmu,
    phase_perturbed_candidate,
    pmu_equivalence,
    swap_matrix,
    swapped_candidate,
)


def test_swap_matrix_exchanges_legs():
    rng = np.random.default_rng(3)
    a = rng.normal(size=2) + 1j * rng.normal(size=2)
    b = rng.normal(size=3) + 1j * rng.normal(size=3)
    sw = swap_matrix(2, 3)
    assert np.allclose(sw @ np.kron(a, b), np.kron(b, a))
    assert unitary_residual(swap_matrix(4, 4)) < 1e-14


def test_plain_pentagon_identity_of_composition():
    # both ways around the pentagon agree already on the plain cube for a
    # groupoid operator, because each path zeroes exactly the
    # non-composable triples
    for gpd in [FiniteGroupoid.pair(2), FiniteGroupoid.cyclic(3)]:
        n = gpd.n_arrows
        v = groupoid_pentagon_unitary(gpd)
        eye = np.eye(n)
        sw23 = np.kron(eye, swap_matrix(n, n))
        v12 = np.kron(v, eye)
        v23 = np.kron(eye, v)
        top = v23 @ v12
        bottom = v12 @ sw23 @ v12 @ sw23 @ v23
        assert np.allclose(top, bottom)


def test_groupoid_candidate_descends_to_unitary():
    pmu = groupoid_pmu(FiniteGroupoid.pair(2))
    cand = pmu["candidate"]
    assert cand.source_space.dim == 8
    assert cand.target_space.dim == 8
    assert cand.v_residual < 1e-10
    assert unitary_residual(cand.v_matrix) < 1e-10


@pytest.mark.parametrize("make", [
    lambda: FiniteGroupoid.cyclic(2),
    lambda: FiniteGroupoid.cyclic(3),
    lambda: FiniteGroupoid.pair(2),
])
def test_state_flavor_passes(make):
    pmu = groupoid_pmu(make())
    report = check_pmu_state(pmu["candidate"])
    assert report.verdict
    assert report.residuals["pentagon"] < 1e-7
    others = {k: v for k, v in report.residuals.items() if k != "pentagon"}
    assert max(others.values()) < 1e-8


def test_exchange_relations_tight():
    pmu = groupoid_pmu(FiniteGroupoid.pair(2))
    report = check_pmu_state(pmu["candidate"])
    for name in [
        "moves_right_range_action",
        "fixes_first_leg_range_action",
        "turns_second_range_into_source",
        "fixes_second_leg_source_action",
    ]:
        assert report.residuals[name] < 1e-10


@pytest.mark.parametrize("make", [
    lambda: FiniteGroupoid.cyclic(2),
    lambda: FiniteGroupoid.pair(2),
])
def test_operator_flavor_passes_and_agrees(make):
    pmu = groupoid_pmu(make())
    eq = pmu_equivalence(
        pmu["candidate"], pmu["beta_hat"], pmu["alpha_flipped"],
        pmu["alpha"], pmu["beta"],
    )
    assert eq.state_report.verdict
    assert eq.cstar_report.verdict
    assert eq.verdicts_agree and eq.ok
    assert eq.cstar_report.residuals["pentagon"] < 1e-7


def test_operator_flavor_transport_relations():
    pmu = groupoid_pmu(FiniteGroupoid.pair(2))
    report = check_pmu_cstar(
        pmu["candidate"], pmu["beta_hat"], pmu["alpha_flipped"],
        pmu["alpha"], pmu["beta"],
    )
    for name in [
        "swaps_left_insertions",
        "moves_hat_insertions_across",
        "turns_hat_pairs_into_left",
        "fixes_right_insertions",
    ]:
        assert report.residuals[name] < 1e-8
    assert report.residuals["operator_transport_consistent"] < 1e-8


def test_swapped_operator_fails_pentagon_on_group():
    # trivial base, so the swap still descends and stays unitary; only the
    # pentagon tells it apart from the composition operator
    pmu = groupoid_pmu(FiniteGroupoid.cyclic(2))
    report = check_pmu_state(swapped_candidate(pmu))
    assert report.residuals["descends_to_quotients"] < 1e-10
    assert report.residuals["unitary"] < 1e-10
    assert report.residuals["pentagon"] >= 1e-4
    assert not report.verdict


def test_swapped_operator_fails_on_groupoid():
    pmu = groupoid_pmu(FiniteGroupoid.pair(2))
    report = check_pmu_state(swapped_candidate(pmu))
    assert not report.verdict


def test_phase_perturbation_detected_by_both_flavors():
    pmu = groupoid_pmu(FiniteGroupoid.pair(2))
    cand = phase_perturbed_candidate(pmu, angle=1e-3)
    eq = pmu_equivalence(
        cand, pmu["beta_hat"], pmu["alpha_flipped"],
        pmu["alpha"], pmu["beta"],
    )
    assert not eq.state_report.verdict
    assert not eq.cstar_report.verdict
    assert eq.verdicts_agree and eq.ok
    assert eq.state_report.residuals["pentagon"] >= 1e-4
    assert eq.cstar_report.residuals["pentagon"] >= 1e-4


def test_phase_perturbation_keeps_exchange_relations():
    # the phase commutes with the diagonal leg actions, so every axiom
    # except the pentagon still passes; the failure is localized
    pmu = groupoid_pmu(FiniteGroupoid.pair(2))
    report = check_pmu_state(phase_perturbed_candidate(pmu, angle=1e-3))
    others = {k: v for k, v in report.residuals.items() if k != "pentagon"}
    assert max(others.values()) < 1e-8
    assert report.residuals["pentagon"] >= 1e-4
