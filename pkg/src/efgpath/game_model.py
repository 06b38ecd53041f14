"""Extensive-form game trees: parsing, serialization and structural checks.

A game file is a JSON document::

    {"players": 2,
     "infosets": [{"id": "P1", "owner": 1, "actions": ["L", "R"]}, ...],
     "root": NodeSpec}

where a ``NodeSpec`` is one of::

    {"kind": "decision", "infoset": "P1", "children": {"L": NodeSpec, ...}}
    {"kind": "chance", "probs": {"l": 0.5, "r": 0.5}, "children": {...}}
    {"kind": "terminal", "payoffs": [3, 0]}

Chance nodes may name an infoset whose owner is ``"c"``; otherwise each
chance node forms its own singleton chance information set.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterator

CHANCE = 0
"""Owner id of the chance player. Real players are numbered 1..n."""

DECISION = "decision"
CHANCE_NODE = "chance"
TERMINAL = "terminal"

PROB_TOL = 1e-12


class GameFormatError(ValueError):
    """Raised when a game document is malformed or structurally invalid."""


@dataclass(frozen=True)
class Node:
    id: int
    kind: str
    actions: tuple[str, ...] = ()
    children: tuple[int, ...] = ()
    owner: int | None = None
    infoset: str | None = None
    chance_probs: tuple[float, ...] = ()
    payoffs: tuple[float, ...] = ()
    parent: int | None = None
    depth: int = 0

    @property
    def is_terminal(self) -> bool:
        return self.kind == TERMINAL

    def child(self, action: str) -> int:
        return self.children[self.actions.index(action)]


@dataclass(frozen=True)
class InformationSet:
    id: str
    owner: int
    actions: tuple[str, ...]
    members: tuple[int, ...]


@dataclass(frozen=True)
class GameTree:
    """Immutable finite game tree.

    ``nodes[k].id == k``; the root is node ``root`` (always 0 for trees built
    by :func:`game_from_dict`).
    """

    players: int
    nodes: tuple[Node, ...]
    infosets: dict[str, InformationSet]
    root: int = 0
    meta: dict[str, Any] = field(default_factory=dict, compare=False)

    def __iter__(self) -> Iterator[Node]:
        return iter(self.nodes)

    @property
    def terminals(self) -> list[Node]:
        return [nd for nd in self.nodes if nd.kind == TERMINAL]

    def path(self, node_id: int) -> list[tuple[Node, str]]:
        """(ancestor, action taken) pairs from the root down to ``node_id``."""
        out = []
        nd = self.nodes[node_id]
        while nd.parent is not None:
            par = self.nodes[nd.parent]
            out.append((par, par.actions[par.children.index(nd.id)]))
            nd = par
        out.reverse()
        return out

    def bfs(self) -> Iterator[Node]:
        queue = deque([self.root])
        while queue:
            nd = self.nodes[queue.popleft()]
            yield nd
            queue.extend(nd.children)


# --------------------------------------------------------------------------
# parsing


def _owner_from_json(raw: Any, where: str) -> int:
    if raw == "c":
        return CHANCE
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise GameFormatError(f"{where}: owner must be a player number or 'c', got {raw!r}")
    return raw


def game_from_dict(doc: dict[str, Any]) -> GameTree:
    """Build and validate a :class:`GameTree` from a decoded game document."""
    if not isinstance(doc, dict):
        raise GameFormatError("game document must be a JSON object")
    try:
        n = doc["players"]
        root_spec = doc["root"]
    except KeyError as exc:
        raise GameFormatError(f"missing top-level key {exc.args[0]!r}") from None
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise GameFormatError(f"'players' must be a positive integer, got {n!r}")

    declared: dict[str, tuple[int, tuple[str, ...]]] = {}
    for k, spec in enumerate(doc.get("infosets", [])):
        where = f"infosets[{k}]"
        try:
            iid, owner, actions = str(spec["id"]), spec["owner"], spec["actions"]
        except (KeyError, TypeError):
            raise GameFormatError(f"{where}: needs 'id', 'owner' and 'actions'") from None
        owner = _owner_from_json(owner, where)
        if owner != CHANCE and not 1 <= owner <= n:
            raise GameFormatError(f"{where}: owner {owner} outside 1..{n}")
        actions = tuple(str(a) for a in actions)
        if not actions or len(set(actions)) != len(actions):
            raise GameFormatError(f"{where}: actions must be non-empty and unique")
        if iid in declared:
            raise GameFormatError(f"{where}: duplicate infoset id {iid!r}")
        declared[iid] = (owner, actions)

    nodes: list[dict[str, Any]] = []
    members: dict[str, list[int]] = {}
    chance_count = 0

    # iterative DFS so that deep generated trees do not hit the recursion limit
    stack: list[tuple[Any, int | None, int, str]] = [(root_spec, None, 0, "root")]
    while stack:
        spec, parent, depth, where = stack.pop()
        if not isinstance(spec, dict) or "kind" not in spec:
            raise GameFormatError(f"{where}: node must be an object with a 'kind'")
        kind = spec["kind"]
        nid = len(nodes)
        rec: dict[str, Any] = {"id": nid, "kind": kind, "parent": parent, "depth": depth}
        nodes.append(rec)
        if parent is not None:
            nodes[parent]["_kids"].append(nid)

        if kind == TERMINAL:
            pay = spec.get("payoffs")
            if not isinstance(pay, list) or len(pay) != n:
                raise GameFormatError(f"{where}: terminal needs exactly {n} payoffs, got {pay!r}")
            try:
                rec["payoffs"] = tuple(float(v) for v in pay)
            except (TypeError, ValueError):
                raise GameFormatError(f"{where}: payoffs must be numbers") from None
            if not all(math.isfinite(v) for v in rec["payoffs"]):
                raise GameFormatError(f"{where}: payoffs must be finite")
            continue

        children = spec.get("children")
        if not isinstance(children, dict) or not children:
            raise GameFormatError(f"{where}: non-terminal node needs a non-empty 'children' map")
        labels = tuple(str(a) for a in children)

        if kind == DECISION:
            iid = spec.get("infoset")
            if iid is None or str(iid) not in declared:
                raise GameFormatError(f"{where}: unknown infoset {iid!r}")
            iid = str(iid)
            owner, actions = declared[iid]
            if owner == CHANCE:
                raise GameFormatError(f"{where}: decision node in chance infoset {iid!r}")
        elif kind == CHANCE_NODE:
            probs = spec.get("probs")
            if not isinstance(probs, dict) or set(map(str, probs)) != set(labels):
                raise GameFormatError(f"{where}: chance 'probs' must cover exactly the child labels")
            probs = {str(a): float(p) for a, p in probs.items()}
            if any(p < 0 for p in probs.values()):
                raise GameFormatError(f"{where}: negative chance probability")
            if abs(sum(probs.values()) - 1.0) > PROB_TOL:
                raise GameFormatError(
                    f"{where}: chance probabilities sum to {sum(probs.values())!r}, not 1")
            iid = spec.get("infoset")
            if iid is None:
                chance_count += 1
                iid = f"c{chance_count}"
                while iid in declared:
                    iid += "_"
                declared[iid] = (CHANCE, labels)
            else:
                iid = str(iid)
                if iid not in declared or declared[iid][0] != CHANCE:
                    raise GameFormatError(f"{where}: chance node names non-chance infoset {iid!r}")
            owner, actions = declared[iid]
            rec["chance_probs"] = tuple(probs[a] for a in actions if a in probs)
        else:
            raise GameFormatError(f"{where}: unknown node kind {kind!r}")

        if set(labels) != set(actions) or len(labels) != len(actions):
            raise GameFormatError(
                f"{where}: child labels {list(labels)} differ from infoset {iid!r} actions {list(actions)}")
        rec.update(owner=owner, infoset=iid, actions=actions, _kids=[])
        members.setdefault(iid, []).append(nid)
        # push in reverse so children are numbered in action order
        for a in reversed(actions):
            stack.append((children[a], nid, depth + 1, f"{where}/{a}"))

    frozen = []
    for rec in nodes:
        kids = tuple(rec.pop("_kids", ()))
        frozen.append(Node(children=kids, **rec))

    infosets = {}
    for iid, (owner, actions) in declared.items():
        if iid not in members:
            continue  # declared but unused: harmless, dropped
        infosets[iid] = InformationSet(iid, owner, actions, tuple(members[iid]))

    return GameTree(players=n, nodes=tuple(frozen), infosets=infosets, meta=dict(doc.get("meta", {})))


def parse_game(text: str) -> GameTree:
    """Parse a game document. Syntax errors report line and column."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GameFormatError(f"JSON syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return game_from_dict(doc)


def load_game(path) -> GameTree:
    with open(path, encoding="utf-8") as fh:
        return parse_game(fh.read())


def game_to_dict(g: GameTree) -> dict[str, Any]:
    def spec(nid: int) -> dict[str, Any]:
        nd = g.nodes[nid]
        if nd.kind == TERMINAL:
            return {"kind": TERMINAL, "payoffs": list(nd.payoffs)}
        kids = {a: spec(c) for a, c in zip(nd.actions, nd.children)}
        if nd.kind == CHANCE_NODE:
            return {"kind": CHANCE_NODE, "infoset": nd.infoset,
                    "probs": dict(zip(nd.actions, nd.chance_probs)), "children": kids}
        return {"kind": DECISION, "infoset": nd.infoset, "children": kids}

    infosets = [
        {"id": I.id, "owner": "c" if I.owner == CHANCE else I.owner, "actions": list(I.actions)}
        for I in g.infosets.values()
    ]
    doc = {"players": g.players, "infosets": infosets, "root": spec(g.root)}
    if g.meta:
        doc["meta"] = g.meta
    return doc


def dump_game(g: GameTree, indent: int | None = None) -> str:
    return json.dumps(game_to_dict(g), indent=indent)


def structurally_equal(a: GameTree, b: GameTree) -> bool:
    """Same shape, owners, labels, probabilities, payoffs and infoset partition."""
    if a.players != b.players or len(a.nodes) != len(b.nodes):
        return False
    for x, y in zip(a.nodes, b.nodes):
        if (x.kind, x.actions, x.children, x.owner, x.chance_probs, x.payoffs, x.parent) != (
                y.kind, y.actions, y.children, y.owner, y.chance_probs, y.payoffs, y.parent):
            return False
    part_a = sorted(I.members for I in a.infosets.values())
    part_b = sorted(I.members for I in b.infosets.values())
    return part_a == part_b


# --------------------------------------------------------------------------
# structure queries


def enumerate_infosets(g: GameTree) -> dict[int, list[InformationSet]]:
    """Information sets per owner (chance under ``CHANCE``).

    Order is breadth-first discovery order of each set's first member node.
    """
    out: dict[int, list[InformationSet]] = {p: [] for p in range(1, g.players + 1)}
    out[CHANCE] = []
    seen = set()
    for nd in g.bfs():
        if nd.kind == TERMINAL or nd.infoset in seen:
            continue
        seen.add(nd.infoset)
        out[nd.owner].append(g.infosets[nd.infoset])
    return out


def player_experience(g: GameTree, player: int) -> list[tuple[tuple[str, str], ...]]:
    """Per node, the (infoset, action) pairs ``player`` took on the path from the root."""
    rec: list[tuple[tuple[str, str], ...]] = [()] * len(g.nodes)
    for nd in g.bfs():
        for a, c in zip(nd.actions, nd.children):
            rec[c] = rec[nd.id] + ((nd.infoset, a),) if nd.owner == player else rec[nd.id]
    return rec


@dataclass(frozen=True)
class RecallReport:
    ok: bool
    infoset: str | None = None
    player: int | None = None
    nodes: tuple[int, int] | None = None

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "perfect recall: ok"
        return (f"perfect recall violated in infoset {self.infoset!r} (player {self.player}): "
                f"nodes {self.nodes[0]} and {self.nodes[1]} carry different own histories")


def validate_perfect_recall(g: GameTree) -> RecallReport:
    owners = sorted({I.owner for I in g.infosets.values()})
    for p in owners:
        rec = player_experience(g, p)
        for I in g.infosets.values():
            if I.owner != p:
                continue
            first = I.members[0]
            for other in I.members[1:]:
                if rec[other] != rec[first]:
                    return RecallReport(False, I.id, p, (first, other))
    return RecallReport(True)
