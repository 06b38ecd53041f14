import numpy as np
import pytest
from scipy import stats

from efgpath.game_model import CHANCE, enumerate_infosets, structurally_equal, validate_perfect_recall
from efgpath.gamegen import TABLE_ROWS, GameSizeError, GenSpec, generate, generate_type1, generate_type2
from efgpath.sequence_form import build_sequence_form


@pytest.mark.parametrize("row", TABLE_ROWS, ids=lambda r: f"type{r[0]}-{r[1]}-{r[2]}-{r[3]}")
def test_dimension_column(row):
    t, n, L, A, dim = row
    g = generate(GenSpec(t, n, L, A, seed=0))
    assert build_sequence_form(g).unknown_dimension == dim
    assert validate_perfect_recall(g)


def test_determinism():
    for t in (1, 2):
        a = generate(GenSpec(t, 3, 4, 2, seed=11))
        b = generate(GenSpec(t, 3, 4, 2, seed=11))
        c = generate(GenSpec(t, 3, 4, 2, seed=12))
        assert structurally_equal(a, b)
        assert [z.payoffs for z in a.terminals] == [z.payoffs for z in b.terminals]
        assert [z.payoffs for z in a.terminals] != [z.payoffs for z in c.terminals]


def test_type1_shape():
    g = generate_type1(GenSpec(1, 3, 4, 2, seed=0))
    assert len(g.terminals) == 16
    assert {z.depth for z in g.terminals} == {4}
    for node in g:
        if not node.is_terminal:
            assert node.owner == node.depth % 3 + 1
    # siblings share an information set, cousins do not
    sets = enumerate_infosets(g)
    assert sum(len(v) for v in sets.values()) == 1 + 1 + 2 + 4


def test_type2_shape():
    g = generate_type2(GenSpec(2, 4, 6, 3, seed=0))
    root = g.nodes[g.root]
    assert root.owner == CHANCE
    np.testing.assert_allclose(root.chance_probs, [1 / 3] * 3)
    sets = enumerate_infosets(g)
    # odd players see the chance move, even players do not
    assert all(len(I.members) == 1 for p in (1, 3) for I in sets[p])
    assert all(len(I.members) == 3 for p in (2, 4) for I in sets[p])
    assert len(g.terminals) == 3 * (6 * 2 + 1)


def test_spec_validation():
    with pytest.raises(ValueError):
        GenSpec(1, 1, 4, 2)
    with pytest.raises(ValueError):
        GenSpec(1, 3, 2, 2)
    with pytest.raises(ValueError):
        GenSpec(1, 3, 4, 1)
    with pytest.raises(ValueError):
        GenSpec(3, 3, 4, 2)


def test_size_guard():
    with pytest.raises(GameSizeError):
        generate(GenSpec(1, 3, 12, 4), max_nodes=10_000)


def test_payoffs_uniform():
    draws = np.concatenate([
        np.array([z.payoffs for z in generate(GenSpec(1, 3, 6, 2, seed=s)).terminals]).ravel()
        for s in range(40)])
    assert draws.min() >= -10 and draws.max() <= 10
    assert np.all(draws == np.round(draws))
    counts = np.bincount((draws + 10).astype(int), minlength=21)
    assert stats.chisquare(counts).pvalue > 0.001
