"""Sequence-form representation, payoffs, best responses and equilibrium checks.

Realization profiles are passed around as a list of 1-D arrays, one per
player (``gamma[i - 1]`` is player ``i``'s plan, indexed by that player's
sequences with index 0 the empty sequence). Mixed profiles use the same
convention over reduced pure strategies.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .game_model import CHANCE, CHANCE_NODE, TERMINAL, GameTree, InformationSet, enumerate_infosets, validate_perfect_recall
from .normal_form import Strategy, reduced_strategies

EMPTY = "∅"
TOL = 1e-9


class PerfectRecallError(ValueError):
    pass


@dataclass(frozen=True)
class PlayerSequences:
    """Sequence structure W^i of one player.

    ``seq_infoset[k]``/``seq_action[k]`` give the infoset index and action of
    the last move of sequence k (-1/None for the empty sequence).
    ``infoset_parent[j]`` is the sequence leading into infoset j and
    ``infoset_seqs[j]`` the sequences extending it, one per action.
    """

    player: int
    infosets: tuple[InformationSet, ...]
    labels: tuple[str, ...]
    seq_infoset: np.ndarray
    seq_action: tuple[str | None, ...]
    infoset_parent: np.ndarray
    infoset_seqs: tuple[np.ndarray, ...]
    followers: tuple[tuple[int, ...], ...]
    """followers[k]: infosets whose parent sequence is k, i.e. M_i(seq k)."""

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def m(self) -> int:
        return len(self.infosets)

    @cached_property
    def in_d(self) -> np.ndarray:
        """True for non-empty sequences not followed by another own infoset (the set D_i)."""
        d = np.array([len(f) == 0 for f in self.followers])
        d[0] = False
        return d

    @cached_property
    def seq_parent(self) -> np.ndarray:
        par = np.full(self.size, -1)
        for j, seqs in enumerate(self.infoset_seqs):
            par[seqs] = self.infoset_parent[j]
        return par

    def index(self, label: str) -> int:
        """Index of a sequence given its label or its qualified ``infoset:action`` form."""
        if label in self.labels:
            return self.labels.index(label)
        for k in range(1, self.size):
            if label == f"{self.infosets[self.seq_infoset[k]].id}:{self.seq_action[k]}":
                return k
        if label in ("", "empty", "()"):
            return 0
        raise KeyError(f"player {self.player} has no sequence {label!r}")


@dataclass(frozen=True)
class DualCertificate:
    """Multipliers for the equilibrium system; ``lam`` is zero off D_i."""

    lam: tuple[np.ndarray, ...]
    nu: tuple[np.ndarray, ...]

    def zeta(self, sf: "SequenceFormGame", player: int) -> np.ndarray:
        ps = sf.seq[player]
        nu = self.nu[player - 1]
        return np.array([nu[list(f)].sum() if f else 0.0 for f in ps.followers])


class SequenceFormGame:
    """Sequence form of a perfect-recall game; immutable once built.

    Terminal table: ``term_seq[z, p]`` is the index of player p's sequence at
    terminal z (column 0 is chance), ``term_pay[z, i-1]`` the payoff u_z^i and
    ``term_chance[z]`` the chance reach probability.
    """

    def __init__(self, game: GameTree, seq: dict[int, PlayerSequences], term_seq: np.ndarray,
                 term_pay: np.ndarray, term_chance: np.ndarray, chance_plan: np.ndarray):
        self.game = game
        self.n = game.players
        self.seq = seq
        self.term_seq = term_seq
        self.term_pay = term_pay
        self.term_chance = term_chance
        self.chance_plan = chance_plan
        self._strategies: dict[int, list[Strategy]] = {}
        for arr in (term_seq, term_pay, term_chance, chance_plan):
            arr.setflags(write=False)

    @property
    def players(self) -> range:
        return range(1, self.n + 1)

    @property
    def n0(self) -> int:
        """Number of (infoset, action) pairs over real players."""
        return sum(self.seq[i].size - 1 for i in self.players)

    @property
    def m0(self) -> int:
        return sum(self.seq[i].m for i in self.players)

    @property
    def unknown_dimension(self) -> int:
        """Length of the path vector (x, nu, t) traced by the solver."""
        return self.n0 + self.m0 + 1

    # ---- flat layouts used by the homotopy ----------------------------------

    @cached_property
    def x_offsets(self) -> np.ndarray:
        """x block of player i starts at x_offsets[i-1] (non-empty sequences only)."""
        return np.cumsum([0] + [self.seq[i].size - 1 for i in self.players])

    @cached_property
    def nu_offsets(self) -> np.ndarray:
        return np.cumsum([0] + [self.seq[i].m for i in self.players])

    def split_x(self, vec: np.ndarray) -> list[np.ndarray]:
        """Per-player full plans from a flat vector over non-empty sequences (empty = 1)."""
        off = self.x_offsets
        return [np.concatenate([[1.0], vec[off[i]:off[i + 1]]]) for i in range(self.n)]

    def join_x(self, gamma) -> np.ndarray:
        return np.concatenate([np.asarray(g, dtype=float)[1:] for g in gamma])

    def split_nu(self, vec: np.ndarray) -> list[np.ndarray]:
        off = self.nu_offsets
        return [vec[off[i]:off[i + 1]] for i in range(self.n)]

    # ---- labels ----------------------------------------------------------------

    def sequence_labels(self, player: int) -> tuple[str, ...]:
        return self.seq[player].labels

    def profile_to_dict(self, gamma) -> dict[str, dict[str, float]]:
        return {str(i): {lab: float(v) for lab, v in zip(self.seq[i].labels, gamma[i - 1])}
                for i in self.players}

    def profile_from_dict(self, doc: dict) -> list[np.ndarray]:
        """Realization profile from ``{player: {sequence label: value}}``; empty sequence defaults to 1."""
        out = []
        for i in self.players:
            entries = doc.get(str(i), doc.get(i))
            if entries is None:
                raise ValueError(f"profile lacks player {i}")
            ps = self.seq[i]
            vec = np.zeros(ps.size)
            vec[0] = 1.0
            for lab, v in entries.items():
                vec[ps.index(lab)] = float(v)
            out.append(vec)
        return out

    # ---- strategies ------------------------------------------------------------

    def strategies(self, player: int) -> list[Strategy]:
        if player not in self._strategies:
            self._strategies[player] = reduced_strategies(self.game, player)
        return self._strategies[player]

    def strategy_incidence(self, player: int, full: bool = False) -> np.ndarray:
        """Matrix S with S[s, k] = 1 iff pure strategy s plays every move of sequence k."""
        ps = self.seq[player]
        strats = self.full_strategies(player) if full else self.strategies(player)
        pos = {(ps.infosets[ps.seq_infoset[k]].id, ps.seq_action[k]): k for k in range(1, ps.size)}
        S = np.zeros((len(strats), ps.size))
        S[:, 0] = 1.0
        for r, s in enumerate(strats):
            chosen = {pos[mv] for mv in s}
            for k in range(1, ps.size):
                # k is played iff its last move is chosen and so is its parent sequence
                if k in chosen and (ps.seq_parent[k] == 0 or S[r, ps.seq_parent[k]]):
                    S[r, k] = 1.0
        return S

    def full_strategies(self, player: int) -> list[Strategy]:
        """Unreduced pure strategies: one action at every infoset of the player."""
        ps = self.seq[player]
        return [tuple(zip((I.id for I in ps.infosets), combo))
                for combo in itertools.product(*(I.actions for I in ps.infosets))]


def _labels_for(infosets, seq_infoset, seq_action, seq_parent_of) -> tuple[str, ...]:
    plain = [EMPTY]
    for k in range(1, len(seq_action)):
        path = []
        c = k
        while c > 0:
            path.append(seq_action[c])
            c = seq_parent_of[c]
        plain.append(",".join(reversed(path)))
    if len(set(plain)) == len(plain):
        return tuple(plain)
    return (EMPTY,) + tuple(f"{infosets[seq_infoset[k]].id}:{seq_action[k]}" for k in range(1, len(seq_action)))


def build_sequence_form(g: GameTree) -> SequenceFormGame:
    report = validate_perfect_recall(g)
    if not report:
        raise PerfectRecallError(str(report))

    by_owner = enumerate_infosets(g)
    seqs: dict[int, PlayerSequences] = {}
    node_seq = np.zeros((len(g.nodes), g.players + 1), dtype=int)  # own sequence index reaching each node

    for p in [CHANCE, *range(1, g.players + 1)]:
        infosets = tuple(by_owner[p])
        seq_infoset = [-1]
        seq_action: list[str | None] = [None]
        infoset_seqs = []
        pair_index: dict[tuple[str, str], int] = {}
        for j, I in enumerate(infosets):
            idx = []
            for a in I.actions:
                pair_index[(I.id, a)] = len(seq_action)
                idx.append(len(seq_action))
                seq_infoset.append(j)
                seq_action.append(a)
            infoset_seqs.append(np.array(idx))
        # walk the tree once: own sequence at every node
        for nd in g.bfs():
            for a, c in zip(nd.actions, nd.children):
                node_seq[c, p] = pair_index[(nd.infoset, a)] if nd.owner == p else node_seq[nd.id, p]
        infoset_parent = np.array([node_seq[I.members[0], p] for I in infosets], dtype=int)
        followers: list[list[int]] = [[] for _ in seq_action]
        for j in range(len(infosets)):
            followers[infoset_parent[j]].append(j)
        parent_of = np.full(len(seq_action), -1)
        for j, idx in enumerate(infoset_seqs):
            parent_of[idx] = infoset_parent[j]
        labels = _labels_for(infosets, seq_infoset, seq_action, parent_of)
        seqs[p] = PlayerSequences(
            player=p, infosets=infosets, labels=labels, seq_infoset=np.array(seq_infoset),
            seq_action=tuple(seq_action), infoset_parent=infoset_parent,
            infoset_seqs=tuple(infoset_seqs), followers=tuple(tuple(f) for f in followers))

    terms = [nd for nd in g.nodes if nd.kind == TERMINAL]
    term_seq = np.array([node_seq[z.id] for z in terms], dtype=int).reshape(len(terms), g.players + 1)
    term_pay = np.array([z.payoffs for z in terms], dtype=float).reshape(len(terms), g.players)

    # chance realization plan from the first member of each chance infoset
    cs = seqs[CHANCE]
    chance_plan = np.ones(cs.size)
    for j, I in enumerate(cs.infosets):
        nd = g.nodes[I.members[0]]
        for k, prob in zip(cs.infoset_seqs[j], nd.chance_probs):
            chance_plan[k] = chance_plan[cs.infoset_parent[j]] * prob
    term_chance = np.ones(len(terms))
    for zi, z in enumerate(terms):
        for nd, a in g.path(z.id):
            if nd.kind == CHANCE_NODE:
                term_chance[zi] *= nd.chance_probs[nd.actions.index(a)]

    return SequenceFormGame(g, seqs, term_seq, term_pay, term_chance, chance_plan)


# --------------------------------------------------------------------------
# payoffs


def _check_profile(sf: SequenceFormGame, gamma) -> list[np.ndarray]:
    if len(gamma) != sf.n:
        raise ValueError(f"expected plans for {sf.n} players, got {len(gamma)}")
    out = []
    for i, g in zip(sf.players, gamma):
        g = np.asarray(g, dtype=float)
        if g.shape != (sf.seq[i].size,):
            raise ValueError(f"player {i}: plan has shape {g.shape}, expected ({sf.seq[i].size},)")
        out.append(g)
    return out


def reach_weights(sf: SequenceFormGame, player: int, gamma) -> np.ndarray:
    """Per terminal: chance reach times every other real player's realization weight."""
    w = sf.term_chance.copy()
    for q in sf.players:
        if q != player:
            w = w * gamma[q - 1][sf.term_seq[:, q]]
    return w


def payoff_vector(sf: SequenceFormGame, player: int, gamma) -> np.ndarray:
    """g^i(seq, gamma^{-i}) for every sequence of ``player``."""
    gamma = _check_profile(sf, gamma)
    w = reach_weights(sf, player, gamma) * sf.term_pay[:, player - 1]
    return np.bincount(sf.term_seq[:, player], weights=w, minlength=sf.seq[player].size)


def expected_payoff(sf: SequenceFormGame, player: int, gamma) -> float:
    gamma = _check_profile(sf, gamma)
    return float(gamma[player - 1] @ payoff_vector(sf, player, gamma))


def expected_payoffs(sf: SequenceFormGame, gamma) -> np.ndarray:
    return np.array([expected_payoff(sf, i, gamma) for i in sf.players])


# --------------------------------------------------------------------------
# best responses


def sequence_values(sf: SequenceFormGame, player: int, gamma) -> np.ndarray:
    """Optimal continuation value of each own sequence.

    value(s) = g(s) + sum over infosets following s of the best action value.
    """
    ps = sf.seq[player]
    val = payoff_vector(sf, player, gamma).copy()
    # infosets are in topological order, so a reverse sweep sees children first
    for j in reversed(range(ps.m)):
        val[ps.infoset_parent[j]] += val[ps.infoset_seqs[j]].max()
    return val


def best_response_values(sf: SequenceFormGame, player: int, gamma) -> np.ndarray:
    """g^i_m for every sequence: the best payoff while committed to that sequence."""
    ps = sf.seq[player]
    val = sequence_values(sf, player, gamma)
    gm = np.empty(ps.size)
    gm[0] = val[0]
    for j in range(ps.m):
        kids = ps.infoset_seqs[j]
        gm[kids] = gm[ps.infoset_parent[j]] - val[kids].max() + val[kids]
    return gm


def best_response_value(sf: SequenceFormGame, player: int, sequence, gamma) -> float:
    k = sf.seq[player].index(sequence) if isinstance(sequence, str) else int(sequence)
    return float(best_response_values(sf, player, gamma)[k])


@dataclass(frozen=True)
class GapReport:
    gaps: np.ndarray
    payoffs: np.ndarray
    best: np.ndarray

    @property
    def max_gap(self) -> float:
        return float(self.gaps.max())

    def is_equilibrium(self, eps: float) -> bool:
        return self.max_gap <= eps


def epsilon_gap(sf: SequenceFormGame, gamma) -> GapReport:
    gamma = _check_profile(sf, gamma)
    pay = expected_payoffs(sf, gamma)
    best = np.array([sequence_values(sf, i, gamma)[0] for i in sf.players])
    return GapReport(best - pay, pay, best)


# --------------------------------------------------------------------------
# equilibrium system


def recover_duals(sf: SequenceFormGame, gamma) -> DualCertificate:
    """Multipliers that satisfy the stationarity rows whenever gamma is an equilibrium.

    nu takes the best action value at each infoset; unreached suboptimal
    branches push their shortfall into the first follower infoset so the
    equality rows of non-terminal sequences still hold.
    """
    gamma = _check_profile(sf, gamma)
    lams, nus = [], []
    for i in sf.players:
        ps = sf.seq[i]
        g = payoff_vector(sf, i, gamma)
        val = sequence_values(sf, i, gamma)
        nu = np.array([val[ps.infoset_seqs[j]].max() for j in range(ps.m)])
        for j in range(ps.m):
            for k in ps.infoset_seqs[j]:
                if ps.followers[k]:
                    short = nu[j] - g[k] - nu[list(ps.followers[k])].sum()
                    if short > 0:
                        nu[ps.followers[k][0]] += short
        lam = np.zeros(ps.size)
        for j in range(ps.m):
            for k in ps.infoset_seqs[j]:
                if ps.in_d[k]:
                    lam[k] = nu[j] - g[k]
        lams.append(lam)
        nus.append(nu)
    return DualCertificate(tuple(lams), tuple(nus))


def ne_residual(sf: SequenceFormGame, gamma, cert: DualCertificate) -> np.ndarray:
    """Residual of the equilibrium system: stationarity, flow, complementarity, sign."""
    gamma = _check_profile(sf, gamma)
    rows = []
    for i in sf.players:
        ps = sf.seq[i]
        g = payoff_vector(sf, i, gamma)
        lam, nu = cert.lam[i - 1], cert.nu[i - 1]
        if lam.shape != (ps.size,) or nu.shape != (ps.m,):
            raise ValueError(f"player {i}: certificate dimensions do not match the game")
        zeta = cert.zeta(sf, i)
        nu_of = nu[ps.seq_infoset[1:]]
        d = ps.in_d[1:]
        stat = np.where(d, g[1:] + lam[1:] - nu_of, g[1:] - nu_of + zeta[1:])
        flow = np.array([gamma[i - 1][ps.infoset_seqs[j]].sum() - gamma[i - 1][ps.infoset_parent[j]]
                         for j in range(ps.m)])
        gd, ld = gamma[i - 1][1:][d], lam[1:][d]
        rows += [stat, flow, gd * ld, np.minimum(gd, 0), np.minimum(ld, 0)]
    return np.concatenate(rows)


# --------------------------------------------------------------------------
# mixed strategies <-> realization plans


def mixed_to_realization(sf: SequenceFormGame, sigma, full: bool = False) -> list[np.ndarray]:
    out = []
    for i, s in zip(sf.players, sigma):
        S = sf.strategy_incidence(i, full)
        s = np.asarray(s, dtype=float)
        if s.shape != (S.shape[0],):
            raise ValueError(f"player {i}: expected {S.shape[0]} strategy weights, got {s.shape}")
        out.append(s @ S)
    return out


def realization_to_mixed(sf: SequenceFormGame, gamma, full: bool = False) -> list[np.ndarray]:
    """Product-of-conditionals mixed profile of a strictly positive realization profile."""
    gamma = _check_profile(sf, gamma)
    out = []
    for i in sf.players:
        gi = gamma[i - 1]
        if np.any(gi <= 0):
            raise ValueError(f"player {i}: realization plan must be strictly positive")
        ps = sf.seq[i]
        logb = np.zeros(ps.size)
        logb[1:] = np.log(gi[1:]) - np.log(gi[ps.seq_parent[1:]])
        strats = sf.full_strategies(i) if full else sf.strategies(i)
        pos = {(ps.infosets[ps.seq_infoset[k]].id, ps.seq_action[k]): k for k in range(1, ps.size)}
        out.append(np.array([np.exp(sum(logb[pos[mv]] for mv in s)) for s in strats]))
    return out


def plan_to_mixed(sf: SequenceFormGame, gamma) -> list[np.ndarray]:
    """Mixed profile for any realization profile, boundary plans included.

    Uses the behavior conditionals gamma(s a) / gamma(s), uniform where
    gamma(s) = 0, multiplied along each reduced strategy. Agrees with
    :func:`realization_to_mixed` on strictly positive plans.
    """
    gamma = _check_profile(sf, gamma)
    out = []
    for i in sf.players:
        ps, gi = sf.seq[i], np.clip(gamma[i - 1], 0.0, None)
        beh = np.ones(ps.size)
        for j in range(ps.m):
            kids = ps.infoset_seqs[j]
            tot = gi[kids].sum()
            beh[kids] = gi[kids] / tot if tot > 0 else 1.0 / len(kids)
        pos = {(ps.infosets[ps.seq_infoset[k]].id, ps.seq_action[k]): k for k in range(1, ps.size)}
        out.append(np.array([np.prod([beh[pos[mv]] for mv in s]) for s in sf.strategies(i)]))
    return out


def flow_violation(sf: SequenceFormGame, gamma) -> float:
    worst = 0.0
    for i in sf.players:
        ps, gi = sf.seq[i], gamma[i - 1]
        worst = max(worst, abs(gi[0] - 1.0))
        for j in range(ps.m):
            worst = max(worst, abs(gi[ps.infoset_seqs[j]].sum() - gi[ps.infoset_parent[j]]))
    return worst


def behavior_to_realization(sf: SequenceFormGame, behavior) -> list[np.ndarray]:
    """Realization profile from per-player arrays of local action probabilities.

    ``behavior[i-1][k]`` is the probability of the last move of sequence k at
    its infoset (entry 0 ignored).
    """
    out = []
    for i in sf.players:
        ps, b = sf.seq[i], np.asarray(behavior[i - 1], dtype=float)
        g = np.ones(ps.size)
        for k in range(1, ps.size):
            g[k] = g[ps.seq_parent[k]] * b[k]
        out.append(g)
    return out


def uniform_plan(sf: SequenceFormGame) -> list[np.ndarray]:
    """Every infoset splits its parent's mass equally among its actions."""
    beh = []
    for i in sf.players:
        ps = sf.seq[i]
        b = np.ones(ps.size)
        for idx in ps.infoset_seqs:
            b[idx] = 1.0 / len(idx)
        beh.append(b)
    return behavior_to_realization(sf, beh)


def random_interior_plan(sf: SequenceFormGame, rng: np.random.Generator, floor: float = 0.05) -> list[np.ndarray]:
    """Random strictly positive plan; local probabilities are Dirichlet(1) mixed with a uniform floor."""
    beh = []
    for i in sf.players:
        ps = sf.seq[i]
        b = np.ones(ps.size)
        for idx in ps.infoset_seqs:
            k = len(idx)
            b[idx] = (1 - floor) * rng.dirichlet(np.ones(k)) + floor / k
        beh.append(b)
    return behavior_to_realization(sf, beh)


# --------------------------------------------------------------------------
# dual bounds


@dataclass(frozen=True)
class DualBounds:
    payoff_min: np.ndarray
    payoff_max: np.ndarray
    nu_lower: np.ndarray
    nu_upper: float
    lam_upper: np.ndarray

    def nu_abs(self, player: int) -> float:
        return max(abs(self.nu_lower[player - 1]), abs(self.nu_upper))


def dual_bounds(sf: SequenceFormGame) -> DualBounds:
    """Closed-form a-priori bounds on the multipliers along the barrier path.

    Per player i with W = |W^i|, D = |D_i| and payoff range [lo, hi]:
    nu >= -W|lo| - D; root infosets start at W|hi| and each follower
    infoset adds (|M(s)| - 1)(W|lo| + D); lambda <= max nu + |lo| + 1.
    """
    n = sf.n
    lo = sf.term_pay.min(axis=0) if len(sf.term_pay) else np.zeros(n)
    hi = sf.term_pay.max(axis=0) if len(sf.term_pay) else np.zeros(n)
    nu_lower = np.empty(n)
    v_all = [0.0]
    for i in sf.players:
        ps = sf.seq[i]
        W, D = ps.size, int(ps.in_d.sum())
        nu_lower[i - 1] = -W * abs(lo[i - 1]) - D
        step = W * abs(lo[i - 1]) + D
        V = np.zeros(ps.m)
        for j in range(ps.m):
            par = ps.infoset_parent[j]
            if par == 0:
                V[j] = W * abs(hi[i - 1])
            else:
                V[j] = V[ps.seq_infoset[par]] + (len(ps.followers[par]) - 1) * step
        v_all.extend(V)
    vu = float(max(v_all))
    return DualBounds(lo, hi, nu_lower, vu, vu + np.abs(lo) + 1.0)
