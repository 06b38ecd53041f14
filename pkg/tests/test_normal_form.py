import numpy as np
import pytest

from efgpath.normal_form import (OracleSizeError, build_reduced_normal_form, enumerate_equilibria_small, is_nash,
                                 mixed_payoff)

from helpers import TABLE_FIG1, TABLE_FIG2, TABLE_FIG3


def test_fig1_table(games):
    nf = build_reduced_normal_form(games["fig1"])
    assert nf.labels(1) == ["{L}", "{R,S}", "{R,T}"]
    assert nf.labels(2) == ["{a,d}", "{a,f}", "{b,d}", "{b,f}"]
    np.testing.assert_array_equal(nf.payoffs, np.array(TABLE_FIG1, dtype=float))


def test_fig2_table(games):
    nf = build_reduced_normal_form(games["fig2"])
    assert nf.labels(1) == ["{X1,X2}", "{X1,C2}", "{C1,X2}", "{C1,C2}"]
    np.testing.assert_allclose(nf.payoffs, np.array(TABLE_FIG2), rtol=0, atol=1e-12)


def test_fig3_table(games):
    nf = build_reduced_normal_form(games["fig3"])
    assert nf.shape == (4, 2, 2)
    np.testing.assert_array_equal(nf.payoffs, np.array(TABLE_FIG3, dtype=float))


def test_cap(games):
    with pytest.raises(OracleSizeError):
        build_reduced_normal_form(games["fig1"], cap=5)


def test_fig1_equilibrium_types(games):
    nf = build_reduced_normal_form(games["fig1"])
    eqs = enumerate_equilibria_small(nf)
    payoffs = {tuple(np.round(e.payoff, 6)) for e in eqs}
    assert payoffs == {(11.0, 3.0), (4.0, round(7 / 3, 6)), (4.0, 1.5)}
    for e in eqs:
        assert is_nash(nf, e.sigma, 1e-8)


def test_type_a_boundary_is_nash(games):
    nf = build_reduced_normal_form(games["fig1"])
    sigma = (np.array([1.0, 0, 0]), np.array([1 / 12, 11 / 12, 0, 0]))
    assert is_nash(nf, sigma)
    np.testing.assert_allclose(mixed_payoff(nf, sigma), [11, 3])
    below = (sigma[0], np.array([0.05, 0.95, 0, 0]))
    assert not is_nash(nf, below)


def test_type_c_from_text(games):
    nf = build_reduced_normal_form(games["fig1"])
    sigma = (np.array([5 / 14, 3 / 14, 3 / 7]), np.array([1 / 12, 1 / 24, 7 / 12, 7 / 24]))
    assert is_nash(nf, sigma, 1e-12)
    np.testing.assert_allclose(mixed_payoff(nf, sigma), [4, 1.5])


def test_three_player_oracle(games):
    nf = build_reduced_normal_form(games["fig3"])
    eqs = enumerate_equilibria_small(nf, seed=1)
    assert eqs
    assert all(is_nash(nf, e.sigma, 1e-8) for e in eqs)
    assert any(np.allclose(e.payoff, [4, 4, 0]) for e in eqs)
