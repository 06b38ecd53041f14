"""Reduced normal form of small games, used as an independent oracle.

Everything here walks the game tree directly and never touches the
sequence-form machinery, so results can be cross-checked against it.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .game_model import CHANCE_NODE, GameTree, enumerate_infosets, player_experience

log = logging.getLogger(__name__)

DEFAULT_CAP = 10**6

Strategy = tuple[tuple[str, str], ...]
"""A reduced pure strategy: ((infoset id, action), ...) over reachable infosets."""


class OracleSizeError(RuntimeError):
    pass


def own_infoset_children(g: GameTree, player: int) -> dict[tuple[str, str] | None, list[str]]:
    """Map (infoset, action) -> infosets of ``player`` entered right after it.

    The key ``None`` holds the infosets reached before the player has moved.
    """
    rec = player_experience(g, player)
    out: dict[tuple[str, str] | None, list[str]] = {None: []}
    for I in enumerate_infosets(g)[player]:
        r = rec[I.members[0]]
        out.setdefault(r[-1] if r else None, []).append(I.id)
    return out


def reduced_strategies(g: GameTree, player: int) -> list[Strategy]:
    """Reduced pure strategies, lexicographic with earlier infosets varying slowest."""
    kids = own_infoset_children(g, player)

    def expand(pending: list[str]):
        if not pending:
            yield ()
            return
        first, rest = pending[0], pending[1:]
        for a in g.infosets[first].actions:
            for below in expand(kids.get((first, a), [])):
                for after in expand(rest):
                    yield ((first, a),) + below + after

    return list(expand(kids[None]))


def strategy_label(s: Strategy) -> str:
    return "{" + ",".join(a for _, a in s) + "}"


@dataclass(frozen=True)
class ReducedNormalForm:
    """``payoffs[s1, ..., sn, i]`` is player i+1's expected payoff (chance folded in)."""

    players: int
    strategies: tuple[tuple[Strategy, ...], ...]
    payoffs: np.ndarray

    @property
    def shape(self) -> tuple[int, ...]:
        return self.payoffs.shape[:-1]

    def labels(self, player: int) -> list[str]:
        return [strategy_label(s) for s in self.strategies[player - 1]]


def build_reduced_normal_form(g: GameTree, cap: int = DEFAULT_CAP) -> ReducedNormalForm:
    n = g.players
    strats = [reduced_strategies(g, p) for p in range(1, n + 1)]
    shape = tuple(len(s) for s in strats)
    if math.prod(shape) > cap:
        raise OracleSizeError(f"normal form has {math.prod(shape)} profiles, cap is {cap}")

    # consistency[p][z, s] = 1 if strategy s of player p plays every own move on the path to z
    terms = g.terminals
    consistent = [np.zeros((len(terms), len(strats[p])), dtype=bool) for p in range(n)]
    chance_w = np.ones(len(terms))
    for zi, z in enumerate(terms):
        moves: dict[int, set[tuple[str, str]]] = {p: set() for p in range(1, n + 1)}
        for nd, a in g.path(z.id):
            if nd.kind == CHANCE_NODE:
                chance_w[zi] *= nd.chance_probs[nd.actions.index(a)]
            else:
                moves[nd.owner].add((nd.infoset, a))
        for p in range(n):
            for si, s in enumerate(strats[p]):
                consistent[p][zi, si] = moves[p + 1] <= set(s)

    pay = np.array([z.payoffs for z in terms]) * chance_w[:, None]
    letters = "abcdefghijklmnopqrstuvwxy"[:n]
    spec = ",".join(f"z{c}" for c in letters) + ",zp->" + letters + "p"
    tensor = np.einsum(spec, *[c.astype(float) for c in consistent], pay, optimize=True)
    return ReducedNormalForm(n, tuple(tuple(s) for s in strats), tensor)


def _check_sigma(nf: ReducedNormalForm, sigma) -> list[np.ndarray]:
    if len(sigma) != nf.players:
        raise ValueError(f"need {nf.players} mixed strategies, got {len(sigma)}")
    out = []
    for p, s in enumerate(sigma):
        s = np.asarray(s, dtype=float)
        if s.shape != (nf.shape[p],):
            raise ValueError(f"player {p + 1}: expected {nf.shape[p]} probabilities, got shape {s.shape}")
        out.append(s)
    return out


def mixed_payoff(nf: ReducedNormalForm, sigma) -> np.ndarray:
    """Expected payoff vector u(sigma) by multilinear contraction."""
    sigma = _check_sigma(nf, sigma)
    t = nf.payoffs
    for s in sigma:
        t = np.tensordot(s, t, axes=([0], [0]))
    return t


def deviation_payoffs(nf: ReducedNormalForm, sigma, player: int) -> np.ndarray:
    """u^i(s^i, sigma^{-i}) for every pure strategy of ``player`` (1-based)."""
    sigma = _check_sigma(nf, sigma)
    t = np.moveaxis(nf.payoffs[..., player - 1], player - 1, 0)
    others = [s for p, s in enumerate(sigma) if p != player - 1]
    for s in others:
        t = np.tensordot(t, s, axes=([1], [0]))
    return t


@dataclass(frozen=True)
class NashCheck:
    ok: bool
    slack: np.ndarray
    """Per player: best deviation payoff minus u^i(sigma)."""

    def __bool__(self) -> bool:
        return self.ok


def is_nash(nf: ReducedNormalForm, sigma, eps: float = 1e-9) -> NashCheck:
    sigma = _check_sigma(nf, sigma)
    slack = np.empty(nf.players)
    for p in range(nf.players):
        dev = deviation_payoffs(nf, sigma, p + 1)
        slack[p] = dev.max() - dev @ sigma[p]
    return NashCheck(bool(np.all(slack <= eps)), slack)


# --------------------------------------------------------------------------
# small-game equilibrium enumeration


@dataclass(frozen=True)
class Equilibrium:
    sigma: tuple[np.ndarray, ...]
    payoff: np.ndarray


def _dedupe(found: list[Equilibrium], tol: float) -> list[Equilibrium]:
    out: list[Equilibrium] = []
    for eq in found:
        if not any(all(np.max(np.abs(a - b)) <= tol for a, b in zip(eq.sigma, o.sigma)) for o in out):
            out.append(eq)
    return out


def _indifference_solve(block: np.ndarray) -> np.ndarray | None:
    """Mix the columns of ``block`` (rows: opponent's support) to equalise rows.

    Solves ``block @ y = v 1, sum(y) = 1``; returns y or None when the system
    has no unique solution.
    """
    k, m = block.shape
    A = np.zeros((k + 1, m + 1))
    A[:k, :m] = block
    A[:k, m] = -1.0
    A[k, :m] = 1.0
    b = np.zeros(k + 1)
    b[k] = 1.0
    if np.linalg.matrix_rank(A) < m + 1:
        return None
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    if np.max(np.abs(A @ sol - b)) > 1e-9:
        return None
    return sol[:m]


def _support_enumeration(nf: ReducedNormalForm, eps: float) -> list[Equilibrium]:
    A, B = nf.payoffs[..., 0], nf.payoffs[..., 1]
    m, k = A.shape
    found = []
    skipped = 0
    for r1 in range(1, m + 1):
        for r2 in range(1, k + 1):
            for I in itertools.combinations(range(m), r1):
                for J in itertools.combinations(range(k), r2):
                    # column mix y must make player 1 indifferent over I, and vice versa
                    y = _indifference_solve(A[np.ix_(I, J)])
                    x = _indifference_solve(B[np.ix_(I, J)].T)
                    if x is None or y is None:
                        skipped += 1
                        continue
                    if x.min() < -1e-12 or y.min() < -1e-12:
                        continue
                    s1 = np.zeros(m)
                    s2 = np.zeros(k)
                    s1[list(I)] = np.clip(x, 0, None)
                    s2[list(J)] = np.clip(y, 0, None)
                    s1 /= s1.sum()
                    s2 /= s2.sum()
                    if is_nash(nf, (s1, s2), eps):
                        found.append(Equilibrium((s1, s2), mixed_payoff(nf, (s1, s2))))
    if skipped:
        log.debug("support enumeration skipped %d singular support pairs", skipped)
    return found


def _simplex_from_free(free: np.ndarray) -> np.ndarray:
    return np.concatenate([free, [1.0 - free.sum()]])


def _grid_newton(nf: ReducedNormalForm, eps: float, grid: int, seed: int) -> list[Equilibrium]:
    n = nf.players
    rng = np.random.default_rng(seed)
    found = []
    supports_per_player = [
        [S for r in range(1, nf.shape[p] + 1) for S in itertools.combinations(range(nf.shape[p]), r)]
        for p in range(n)
    ]
    for supp in itertools.product(*supports_per_player):
        sizes = [len(S) for S in supp]
        nfree = sum(sizes) - n

        def unpack(z):
            sig, pos = [], 0
            for p, S in enumerate(supp):
                full = np.zeros(nf.shape[p])
                full[list(S)] = _simplex_from_free(z[pos:pos + sizes[p] - 1])
                pos += sizes[p] - 1
                sig.append(full)
            return sig

        def equations(z):
            sig = unpack(z)
            rows = []
            for p, S in enumerate(supp):
                dev = deviation_payoffs(nf, sig, p + 1)
                rows.extend(dev[list(S[1:])] - dev[S[0]])
            return np.array(rows)

        if nfree == 0:
            starts = [np.zeros(0)]
        else:
            # grid over each player's free simplex coordinates plus random jitter
            starts = []
            for _ in range(grid):
                z = []
                for sz in sizes:
                    w = rng.dirichlet(np.ones(sz))
                    z.extend(w[:-1])
                starts.append(np.array(z))
        for z0 in starts:
            if nfree:
                sol = optimize.root(equations, z0, method="hybr", options={"xtol": 1e-13})
                if not sol.success or np.max(np.abs(equations(sol.x))) > 1e-10:
                    continue
                z = sol.x
            else:
                z = z0
            sig = unpack(z)
            if any(s.min() < -1e-10 for s in sig):
                continue
            sig = [np.clip(s, 0, None) / np.clip(s, 0, None).sum() for s in sig]
            if is_nash(nf, sig, eps):
                found.append(Equilibrium(tuple(sig), mixed_payoff(nf, sig)))
    return found


def enumerate_equilibria_small(nf: ReducedNormalForm, eps: float = 1e-8, grid: int = 12,
                               seed: int = 0, max_strategies: int = 8) -> list[Equilibrium]:
    """Find equilibria of a small game; complete only for nondegenerate 2-player games.

    Two players use support enumeration; more players use seeded multistart
    Newton on the indifference conditions of every support profile.
    """
    if nf.players > 3 or max(nf.shape) > max_strategies:
        raise OracleSizeError(f"oracle limited to <= 3 players and <= {max_strategies} strategies each")
    if nf.players == 1:
        u = nf.payoffs[..., 0]
        found = [Equilibrium((np.eye(len(u))[k],), np.array([u[k]])) for k in np.flatnonzero(u >= u.max() - eps)]
    elif nf.players == 2:
        found = _support_enumeration(nf, eps)
    else:
        found = _grid_newton(nf, eps, grid, seed)
    return _dedupe(found, 1e-7)
