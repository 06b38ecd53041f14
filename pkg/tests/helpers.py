from efgpath.game_model import game_from_dict


def constant_game(value=1.0):
    """Two players, one information set each, every leaf paying ``value`` to both."""
    return game_from_dict({
        "players": 2,
        "infosets": [{"id": "I", "owner": 1, "actions": ["x", "y", "z"]},
                     {"id": "J", "owner": 2, "actions": ["u", "v"]}],
        "root": {"kind": "decision", "infoset": "I", "children": {
            a: {"kind": "decision", "infoset": "J", "children": {
                b: {"kind": "terminal", "payoffs": [value, value]} for b in "uv"}}
            for a in "xyz"}},
    })


# rows: player 1 strategies, columns: player 2 strategies
TABLE_FIG1 = [
    [(11, 3), (11, 3), (3, 0), (3, 0)],
    [(0, 2), (12, 0), (0, 7), (12, 5)],
    [(6, 0), (0, 1), (6, 0), (0, 1)],
]
TABLE_FIG2 = [
    [(2.1, 0), (2.1, 0), (0.1, -0.8), (0.1, -0.8)],
    [(3, 0), (1.2, -0.9), (2.8, 0.1), (1, -0.8)],
    [(2, 0), (1.8, 0.1), (0.2, -0.9), (0, -0.8)],
    [(2.9, 0), (0.9, -0.8), (2.9, 0), (0.9, -0.8)],
]
# [player 1][player 2][player 3]
TABLE_FIG3 = [
    [[(0, 0, 3), (0, 0, 3)], [(0, 0, 3), (0, 0, 3)]],
    [[(-1, 0, 2), (2, 0, 1)], [(-1, 0, 2), (2, 0, 1)]],
    [[(1, 1, -2), (4, 4, 0)], [(-1, 0, 2), (2, 0, 1)]],
    [[(1, 1, -2), (4, 4, 0)], [(0, 0, 3), (0, 0, 3)]],
]
