import json

import pytest

from efgpath.game_model import (CHANCE, GameFormatError, dump_game, enumerate_infosets, game_from_dict, parse_game,
                                structurally_equal, validate_perfect_recall)


def tiny(**over):
    doc = {
        "players": 2,
        "infosets": [{"id": "A", "owner": 1, "actions": ["l", "r"]}],
        "root": {"kind": "decision", "infoset": "A", "children": {
            "l": {"kind": "terminal", "payoffs": [1, 0]},
            "r": {"kind": "terminal", "payoffs": [0, 1]}}},
    }
    doc.update(over)
    return doc


def test_fixture_shapes(games):
    g = games["fig1"]
    assert g.players == 2
    assert len(g.terminals) == 8
    sets = enumerate_infosets(g)
    assert [I.id for I in sets[1]] == ["P1.1", "P1.2"]
    assert [I.id for I in sets[2]] == ["P2.1", "P2.2"]
    assert len(sets[CHANCE]) == 1
    assert len(games["fig3"].terminals) == 8


@pytest.mark.parametrize("name", ["fig1", "fig2", "fig3"])
def test_fixtures_have_perfect_recall(games, name):
    assert validate_perfect_recall(games[name])


@pytest.mark.parametrize("name", ["fig1", "fig2", "fig3"])
def test_roundtrip(games, name):
    g = games[name]
    again = parse_game(dump_game(g))
    assert structurally_equal(g, again)


def test_payoff_arity_error():
    doc = tiny()
    doc["root"]["children"]["l"]["payoffs"] = [1]
    with pytest.raises(GameFormatError, match="exactly 2 payoffs"):
        game_from_dict(doc)


def test_chance_probabilities_must_sum_to_one():
    doc = tiny(root={"kind": "chance", "probs": {"a": 0.5, "b": 0.4}, "children": {
        "a": {"kind": "terminal", "payoffs": [0, 0]}, "b": {"kind": "terminal", "payoffs": [0, 0]}}})
    with pytest.raises(GameFormatError, match="sum to"):
        game_from_dict(doc)


def test_unknown_infoset():
    doc = tiny()
    doc["root"]["infoset"] = "nope"
    with pytest.raises(GameFormatError, match="unknown infoset"):
        game_from_dict(doc)


def test_child_labels_must_match_actions():
    doc = tiny()
    doc["root"]["children"]["m"] = doc["root"]["children"].pop("r")
    with pytest.raises(GameFormatError, match="differ"):
        game_from_dict(doc)


def test_syntax_error_reports_position():
    with pytest.raises(GameFormatError, match="line 2"):
        parse_game('{"players": 2,\n  oops}')


def test_imperfect_recall_detected():
    # player 1 forgets its own first move
    doc = {
        "players": 1,
        "infosets": [{"id": "A", "owner": 1, "actions": ["l", "r"]},
                     {"id": "B", "owner": 1, "actions": ["x", "y"]}],
        "root": {"kind": "decision", "infoset": "A", "children": {
            a: {"kind": "decision", "infoset": "B", "children": {
                b: {"kind": "terminal", "payoffs": [0]} for b in "xy"}} for a in "lr"}},
    }
    rep = validate_perfect_recall(game_from_dict(doc))
    assert not rep
    assert rep.infoset == "B"


def test_dump_is_json(games):
    doc = json.loads(dump_game(games["fig2"]))
    assert doc["players"] == 2
