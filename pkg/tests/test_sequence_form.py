import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from efgpath.normal_form import build_reduced_normal_form, mixed_payoff
from efgpath.sequence_form import (EMPTY, best_response_value, dual_bounds, epsilon_gap, expected_payoffs,
                                   flow_violation, mixed_to_realization, ne_residual, payoff_vector,
                                   random_interior_plan, realization_to_mixed, recover_duals, uniform_plan)
from efgpath.tracer import polish

TYPE_B = ([0, 1 / 3, 2 / 3], [0, 0, 2 / 3, 1 / 3])


def test_fig1_labels_and_sizes(sfs):
    sf = sfs["fig1"]
    assert sf.sequence_labels(1) == (EMPTY, "L", "R", "R,S", "R,T")
    assert sf.sequence_labels(2) == (EMPTY, "a", "b", "d", "f")
    assert list(sf.seq[1].in_d) == [False, True, False, True, True]
    assert all(sf.seq[2].in_d[1:])
    assert (sf.n0, sf.m0, sf.unknown_dimension) == (8, 4, 13)


def test_fig1_sequence_form_table(sfs):
    # chance-weighted payoff entries of the sequence-form table
    sf = sfs["fig1"]
    cells = {}
    for z in range(len(sf.term_seq)):
        key = (sf.sequence_labels(1)[sf.term_seq[z, 1]], sf.sequence_labels(2)[sf.term_seq[z, 2]])
        cells[key] = cells.get(key, 0) + sf.term_pay[z] * sf.term_chance[z]
    assert tuple(cells[("L", "a")]) == (11, 3)
    assert tuple(cells[("L", "b")]) == (3, 0)
    assert tuple(cells[("R,S", "b")]) == (0, 5)
    assert tuple(cells[("R,S", "d")]) == (0, 2)
    assert tuple(cells[("R,S", "f")]) == (12, 0)
    assert tuple(cells[("R,T", "d")]) == (6, 0)
    assert tuple(cells[("R,T", "f")]) == (0, 1)


def test_type_b_is_equilibrium(sfs):
    sf = sfs["fig1"]
    gamma = mixed_to_realization(sf, TYPE_B)
    rep = epsilon_gap(sf, gamma)
    np.testing.assert_allclose(rep.payoffs, [4, 7 / 3])
    assert rep.max_gap <= 1e-12
    cert = recover_duals(sf, gamma)
    assert np.max(np.abs(ne_residual(sf, gamma, cert))) <= 1e-12


def test_uniform_profile_has_positive_gap(sfs):
    rep = epsilon_gap(sfs["fig1"], uniform_plan(sfs["fig1"]))
    assert rep.max_gap > 0.1


def test_pure_profile_gap(sfs):
    sf = sfs["fig1"]
    gamma = mixed_to_realization(sf, ([1, 0, 0], [0, 0, 0, 1]))
    np.testing.assert_allclose(epsilon_gap(sf, gamma).gaps, [9, 3])


def test_best_response_value_of_empty_sequence(sfs):
    sf = sfs["fig1"]
    gamma = mixed_to_realization(sf, TYPE_B)
    assert best_response_value(sf, 1, EMPTY, gamma) == pytest.approx(4)


@pytest.mark.parametrize("name", ["fig1", "fig2", "fig3"])
@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_payoff_matches_normal_form(sfs, games, name, seed):
    sf = sfs[name]
    nf = build_reduced_normal_form(games[name])
    rng = np.random.default_rng(seed)
    sigma = [rng.dirichlet(np.ones(k)) for k in nf.shape]
    gamma = mixed_to_realization(sf, sigma)
    np.testing.assert_allclose(expected_payoffs(sf, gamma), mixed_payoff(nf, sigma), rtol=0, atol=1e-10)


@pytest.mark.parametrize("name", ["fig1", "fig2", "fig3"])
@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_realization_roundtrip(sfs, name, seed):
    sf = sfs[name]
    gamma = random_interior_plan(sf, np.random.default_rng(seed))
    assert flow_violation(sf, gamma) <= 1e-12
    back = mixed_to_realization(sf, realization_to_mixed(sf, gamma))
    for a, b in zip(gamma, back):
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-10)


def test_realization_to_mixed_rejects_boundary(sfs):
    sf = sfs["fig1"]
    with pytest.raises(ValueError):
        realization_to_mixed(sf, mixed_to_realization(sf, TYPE_B))


def test_payoff_vector_shape(sfs):
    sf = sfs["fig2"]
    g = payoff_vector(sf, 1, uniform_plan(sf))
    assert g.shape == (sf.seq[1].size,)


def test_dual_bounds_fig1(sfs):
    b = dual_bounds(sfs["fig1"])
    np.testing.assert_array_equal(b.payoff_max, [24, 10])
    assert b.nu_upper > 0
    assert np.all(b.lam_upper > b.nu_upper)


def test_polish_restores_flow(sfs):
    sf = sfs["fig1"]
    gamma = mixed_to_realization(sf, TYPE_B)
    drifted = [g + 1e-6 * np.arange(len(g)) for g in gamma]
    out = polish(sf, drifted)
    assert flow_violation(sf, out) <= 1e-14
    same = polish(sf, gamma)
    for a, b in zip(same, gamma):
        np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("name", ["fig1", "fig2", "fig3"])
def test_gap_equals_normal_form_slack(sfs, games, name):
    from efgpath.normal_form import is_nash

    sf = sfs[name]
    nf = build_reduced_normal_form(games[name])
    rng = np.random.default_rng(9)
    for _ in range(100):
        # sparse supports so that some profiles are equilibria or close to them
        sigma = []
        for k in nf.shape:
            w = rng.dirichlet(np.ones(k)) * (rng.random(k) < 0.6)
            w = w if w.sum() > 0 else np.eye(k)[rng.integers(k)]
            sigma.append(w / w.sum())
        check = is_nash(nf, sigma, 1e-8)
        rep = epsilon_gap(sf, mixed_to_realization(sf, sigma))
        np.testing.assert_allclose(rep.gaps, check.slack, atol=1e-10)
        assert rep.is_equilibrium(1e-8) == bool(check)


def test_type_c_recovered_from_plan(sfs):
    sf = sfs["fig1"]
    type_c = ([5 / 14, 3 / 14, 3 / 7], [1 / 12, 1 / 24, 7 / 12, 7 / 24])
    back = realization_to_mixed(sf, mixed_to_realization(sf, type_c))
    for a, b in zip(back, type_c):
        np.testing.assert_allclose(a, b, atol=1e-12)


def test_uniform_behavior_full_strategies(sfs):
    sf = sfs["fig1"]
    full = realization_to_mixed(sf, uniform_plan(sf), full=True)
    np.testing.assert_allclose(full[0], [0.25] * 4)


def test_plan_to_mixed_on_boundary(sfs):
    from efgpath.sequence_form import plan_to_mixed

    sf = sfs["fig1"]
    gamma = mixed_to_realization(sf, TYPE_B)
    sigma = plan_to_mixed(sf, gamma)
    for a, b in zip(mixed_to_realization(sf, sigma), gamma):
        np.testing.assert_allclose(a, b, atol=1e-12)
    interior = uniform_plan(sf)
    for a, b in zip(plan_to_mixed(sf, interior), realization_to_mixed(sf, interior)):
        np.testing.assert_allclose(a, b, atol=1e-12)
