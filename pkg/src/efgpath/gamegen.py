"""Seeded random game families used by the benchmarks.

Type 1
    A full A-ary tree of depth L. The player at depth d is ``(d mod n) + 1``.
    The root is its own information set; below it, all children of one node
    form one information set, so histories are only confused when they differ
    in the last action.

Type 2
    A chance move with 3 equiprobable branches, followed by L decision levels
    played cyclically as above. At every level the first action continues and
    the other A - 1 actions end the game; every action at the last level ends
    it. Odd-numbered players see the chance branch (singleton sets). Even
    numbered players do not, so their histories group exactly by own sequence.

Seeds are split with :class:`numpy.random.SeedSequence` into two child
streams: the first is reserved for structure, the second draws payoffs.
Both families are currently deterministic in shape, so only the payoff
stream is consumed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .game_model import GameTree, game_from_dict

PAYOFF_LOW, PAYOFF_HIGH = -10, 10
CHANCE_BRANCHES = 3
DEFAULT_MAX_NODES = 2_000_000


class GameSizeError(ValueError):
    pass


@dataclass(frozen=True)
class GenSpec:
    game_type: int
    n: int
    L: int
    A: int
    seed: int = 0
    payoff_low: int = PAYOFF_LOW
    payoff_high: int = PAYOFF_HIGH

    def __post_init__(self):
        if self.game_type not in (1, 2):
            raise ValueError(f"game_type must be 1 or 2, got {self.game_type}")
        if self.n < 2:
            raise ValueError("need at least 2 players")
        if self.L < self.n:
            raise ValueError(f"depth L={self.L} must be at least n={self.n}")
        if self.A < 2:
            raise ValueError("need at least 2 actions")
        if self.payoff_low > self.payoff_high:
            raise ValueError("empty payoff range")

    @property
    def label(self) -> str:
        return f"type{self.game_type}({self.n},{self.L},{self.A})"


def _streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    structure, payoff = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(structure), np.random.default_rng(payoff)


def _mover(depth: int, n: int) -> int:
    return depth % n + 1


def node_count(spec: GenSpec) -> int:
    if spec.game_type == 1:
        return sum(spec.A**d for d in range(spec.L + 1))
    return 1 + CHANCE_BRANCHES * (spec.L * spec.A + 1)


def _guard(spec: GenSpec, max_nodes: int):
    count = node_count(spec)
    if count > max_nodes:
        raise GameSizeError(f"{spec.label} has {count} nodes, limit is {max_nodes}")


def _payoffs(rng: np.random.Generator, spec: GenSpec, count: int) -> np.ndarray:
    return rng.integers(spec.payoff_low, spec.payoff_high + 1, size=(count, spec.n))


def generate_type1(spec: GenSpec, max_nodes: int = DEFAULT_MAX_NODES) -> GameTree:
    if spec.game_type != 1:
        raise ValueError("spec is not type 1")
    _guard(spec, max_nodes)
    _, pay_rng = _streams(spec.seed)
    n, L, A = spec.n, spec.L, spec.A
    actions = [f"a{k}" for k in range(A)]
    pay = _payoffs(pay_rng, spec, A**L)

    infosets = []
    # level d holds A^d nodes indexed in lexicographic action order
    levels: list[list[dict]] = []
    for d in range(L):
        owner = _mover(d, n)
        level = []
        for k in range(A**d):
            iid = "root" if d == 0 else f"d{d}.{k // A}"
            if d == 0 or k % A == 0:
                infosets.append({"id": iid, "owner": owner, "actions": actions})
            level.append({"kind": "decision", "infoset": iid, "children": {}})
        levels.append(level)
    leaves = [{"kind": "terminal", "payoffs": [int(v) for v in row]} for row in pay]
    below = leaves
    for d in range(L - 1, -1, -1):
        for k, node in enumerate(levels[d]):
            node["children"] = {a: below[k * A + c] for c, a in enumerate(actions)}
        below = levels[d]
    doc = {"players": n, "infosets": infosets, "root": levels[0][0],
           "meta": {"generator": "type1", "n": n, "L": L, "A": A, "seed": spec.seed}}
    return game_from_dict(doc)


def generate_type2(spec: GenSpec, max_nodes: int = DEFAULT_MAX_NODES) -> GameTree:
    if spec.game_type != 2:
        raise ValueError("spec is not type 2")
    _guard(spec, max_nodes)
    _, pay_rng = _streams(spec.seed)
    n, L, A = spec.n, spec.L, spec.A
    actions = [f"a{k}" for k in range(A)]
    branches = [f"c{b}" for b in range(CHANCE_BRANCHES)]
    pay = _payoffs(pay_rng, spec, CHANCE_BRANCHES * (L * (A - 1) + 1))
    leaf_iter = iter(pay)

    def leaf():
        return {"kind": "terminal", "payoffs": [int(v) for v in next(leaf_iter)]}

    infosets = {}

    def infoset_for(d: int, b: int) -> str:
        owner = _mover(d, n)
        iid = f"P{owner}.L{d}" if owner % 2 == 0 else f"P{owner}.L{d}.{branches[b]}"
        infosets.setdefault(iid, {"id": iid, "owner": owner, "actions": actions})
        return iid

    children = {}
    for b, c in enumerate(branches):
        # built bottom-up along the continuation spine
        node = None
        for d in range(L - 1, -1, -1):
            kids = {}
            for k, a in enumerate(actions):
                kids[a] = node if (k == 0 and node is not None) else None
            node = {"kind": "decision", "infoset": infoset_for(d, b), "children": kids}
        children[c] = node

    # leaves are filled top-down so payoff draws follow branch, level, action order
    for c in branches:
        node = children[c]
        while node is not None:
            nxt = node["children"]["a0"]
            for a in actions:
                if node["children"][a] is None:
                    node["children"][a] = leaf()
            node = nxt if isinstance(nxt, dict) and nxt.get("kind") == "decision" else None

    root = {"kind": "chance", "probs": {c: 1.0 / CHANCE_BRANCHES for c in branches}, "children": children}
    doc = {"players": n, "infosets": sorted(infosets.values(), key=lambda s: s["id"]), "root": root,
           "meta": {"generator": "type2", "n": n, "L": L, "A": A, "seed": spec.seed}}
    return game_from_dict(doc)


def generate(spec: GenSpec, max_nodes: int = DEFAULT_MAX_NODES) -> GameTree:
    return (generate_type1 if spec.game_type == 1 else generate_type2)(spec, max_nodes)


# rows of the benchmark tables as (type, n, L, A, Dim)
TABLE_ROWS = (
    (1, 3, 5, 2, 49), (1, 3, 6, 2, 97), (1, 3, 7, 2, 193), (1, 3, 8, 2, 385),
    (1, 3, 4, 3, 57), (1, 3, 4, 4, 111), (1, 3, 4, 5, 193),
    (2, 4, 10, 2, 61), (2, 4, 20, 2, 121), (2, 4, 30, 2, 181), (2, 4, 40, 2, 241),
    (2, 4, 10, 4, 101), (2, 4, 10, 6, 141), (2, 4, 10, 8, 181), (2, 4, 10, 10, 221),
)
