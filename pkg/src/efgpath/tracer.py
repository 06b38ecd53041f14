"""Predictor-corrector continuation of the barrier homotopy from t = 1 to t ~ 0."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field

import numpy as np

from .homotopy import BarrierHomotopy, HomotopyConfig, HomotopyPoint, build_homotopy
from .sequence_form import GapReport, SequenceFormGame, epsilon_gap

CONVERGED = "converged"
STEP_LIMIT = "step_limit"
TIME_LIMIT = "time_limit"
NUMERICAL_FAILURE = "numerical_failure"

START_TOL = 1e-10
RANK_RTOL = 1e-8
SINGULAR_RTOL = 1e-14


class NumericalFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class TracerParams:
    c_p: float = 0.05
    e_p: float = 0.3
    c_c: float = 0.5
    e_c: float = 0.3
    t_end: float = 1e-4
    max_steps: int = 100_000
    max_wall_time: float | None = None
    max_corrector_iters: int = 20
    min_corrector_iters: int = 1
    shrink: float = 0.5
    grow: float = 1.2
    fast_iters: int = 3
    min_step: float = 1e-12
    max_deviation: float = 0.5
    """Largest corrector displacement accepted, relative to the predictor step."""
    min_cos: float = 0.95
    """Smallest cosine accepted between consecutive tangents."""
    monotone_t: bool = False
    """Reject any step that does not decrease t. Off by default since paths may turn back in t."""
    final_tol: float = 1e-9
    """Sup-norm target of the fixed-t Newton refinement at the last point."""
    record_gamma: bool = True

    def __post_init__(self):
        if not (self.c_p > 0 and self.c_c > 0):
            raise ValueError("c_p and c_c must be positive")
        if not 0 < self.t_end < 1:
            raise ValueError("t_end must lie in (0, 1)")
        if not 0 < self.shrink < 1 or self.grow < 1:
            raise ValueError("need 0 < shrink < 1 <= grow")
        if self.max_corrector_iters < max(1, self.min_corrector_iters):
            raise ValueError("max_corrector_iters must be >= min_corrector_iters and >= 1")

    def step_cap(self, t: float) -> float:
        return self.c_p * max(t, 0.0) ** self.e_p

    def tolerance(self, t: float, scale: float) -> float:
        return self.c_c * max(t, 0.0) ** self.e_c * scale


@dataclass
class PathPoint:
    point: HomotopyPoint
    step: float
    corrector_iters: int
    residual: float
    gamma: np.ndarray | None = field(default=None, repr=False)

    @property
    def t(self) -> float:
        return self.point.t


@dataclass
class PathTrace:
    points: list[PathPoint] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @property
    def t(self) -> np.ndarray:
        return np.array([p.t for p in self.points])

    def to_csv(self, sf: SequenceFormGame, stream=None) -> str | None:
        """Write one row per accepted point; returns the text when no stream is given."""
        out = io.StringIO() if stream is None else stream
        w = csv.writer(out, lineterminator="\n")
        cols = [f"gamma:{i}:{lab}" for i in sf.players for lab in sf.sequence_labels(i)[1:]]
        w.writerow(["t", "step", "corrector_iters", "residual", *cols])
        for p in self.points:
            gam = p.gamma if p.gamma is not None else np.full(sf.n0, np.nan)
            w.writerow([repr(p.t), repr(p.step), p.corrector_iters, repr(p.residual), *map(repr, gam.tolist())])
        return out.getvalue() if stream is None else None


@dataclass
class SolveResult:
    status: str
    gamma: list[np.ndarray]
    gap: GapReport
    """Epsilon gap of the polished plan."""
    raw_gap: GapReport
    """Epsilon gap of the recovered plan before polishing."""
    trace: PathTrace
    steps: int
    final_t: float
    wall_time: float
    homotopy: BarrierHomotopy = field(repr=False)

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED

    @property
    def payoffs(self) -> np.ndarray:
        return self.gap.payoffs


def tol_scale(sf: SequenceFormGame) -> float:
    """1 + the widest per-player payoff range."""
    if not len(sf.term_pay):
        return 1.0
    return 1.0 + float(np.max(sf.term_pay.max(axis=0) - sf.term_pay.min(axis=0)))


def numerical_rank(J: np.ndarray, rtol: float = RANK_RTOL, equilibrate: bool = True) -> tuple[int, float]:
    """(rank, sigma_min / sigma_max) with singular values below rtol * sigma_max discarded.

    Columns are scaled to unit norm first by default. Row rank is unchanged by
    this, but near t = 0 the t column grows like t^(1/kappa0 - 1) and would
    otherwise dominate sigma_max.
    """
    J = np.asarray(J, dtype=float)
    if equilibrate and J.size:
        norms = np.linalg.norm(J, axis=0)
        J = J / np.where(norms > 0, norms, 1.0)
    sv = np.linalg.svd(J, compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return 0, 0.0
    return int(np.sum(sv > rtol * sv[0])), float(sv[-1] / sv[0])


def null_direction(J: np.ndarray, prev: np.ndarray | None = None) -> np.ndarray:
    """Unit vector spanning the kernel of an n x (n+1) matrix of full row rank.

    Without ``prev`` the direction is oriented so that t decreases; otherwise
    it has positive inner product with ``prev``.
    """
    n = J.shape[0]
    Q, R = np.linalg.qr(J.T, mode="complete")
    d = np.abs(np.diag(R)) if n else np.zeros(0)
    if n and d.min() <= SINGULAR_RTOL * max(d.max(), 1e-300):
        raise NumericalFailure("rank-deficient Jacobian")
    tau = Q[:, -1]
    sign = (tau[-1] < 0) if prev is None else (tau @ prev > 0)
    return tau if sign else -tau


def tangent(cfg: HomotopyConfig, sf: SequenceFormGame, p, prev: np.ndarray | None = None) -> np.ndarray:
    h = build_homotopy(sf, cfg)
    return null_direction(h.jacobian(p), prev)


def polish(sf: SequenceFormGame, gamma) -> list[np.ndarray]:
    """Clip negatives and renormalize each information set to its parent's mass, top-down."""
    out = []
    for i, g in zip(sf.players, gamma):
        ps = sf.seq[i]
        g = np.clip(np.asarray(g, dtype=float), 0.0, None).copy()
        g[0] = 1.0
        for j in range(ps.m):
            kids = ps.infoset_seqs[j]
            par = g[ps.infoset_parent[j]]
            s = g[kids].sum()
            if s > 0:
                if s != par:
                    g[kids] *= par / s
            else:
                g[kids] = par / len(kids)
        out.append(g)
    return out


@dataclass(frozen=True)
class RankReport:
    samples: list[tuple[float, int, float]]
    """(t, numerical rank, sigma_min / sigma_max) per sampled point."""
    expected_rank: int

    @property
    def full_rank(self) -> bool:
        return all(r == self.expected_rank for _, r, _ in self.samples)

    @property
    def min_ratio(self) -> float:
        return min((q for *_, q in self.samples), default=float("nan"))


def rank_diagnostic(h: BarrierHomotopy, trace: PathTrace, sample_count: int = 10) -> RankReport:
    if not len(trace):
        raise ValueError("empty trace")
    idx = np.unique(np.linspace(0, len(trace) - 1, min(sample_count, len(trace))).round().astype(int))
    samples = []
    for k in idx:
        p = trace.points[k]
        r, q = numerical_rank(h.jacobian(p.point))
        samples.append((p.t, r, q))
    return RankReport(samples, h.size)


class _Tracer:
    def __init__(self, h: BarrierHomotopy, params: TracerParams):
        self.h = h
        self.prm = params
        self.scale = tol_scale(h.sf)

    def _interior_ok(self, y: np.ndarray) -> bool:
        # direct (unsubstituted) coordinates carry gamma themselves and must stay positive
        x = y[:self.h.n0]
        return bool(np.all(x[~self.h.subst] > 0))

    def correct(self, y_pred: np.ndarray, tau: np.ndarray, t_prev: float):
        """Newton on [F; tau.(y - y_pred)] = 0. Returns (y, iters, residual) or None."""
        h, prm = self.h, self.prm
        y = y_pred.copy()
        F = h.residual(y)
        res = np.inf
        t_max = t_prev if prm.monotone_t else 1.0
        for it in range(1, prm.max_corrector_iters + 1):
            A = np.vstack([h.jacobian(y), tau])
            try:
                dy = np.linalg.solve(A, -np.append(F, tau @ (y - y_pred)))
            except np.linalg.LinAlgError:
                return None
            y = y + dy
            t = y[-1]
            if not np.all(np.isfinite(y)) or not 0 < t < t_max:
                return None
            F = h.residual(y)
            new_res = float(np.max(np.abs(F))) if h.size else 0.0
            if it > 1 and new_res > 2 * res:
                return None
            res = new_res
            if it >= prm.min_corrector_iters and res <= prm.tolerance(t, self.scale):
                return y, it, res
        return None

    def _attempt(self, y: np.ndarray, tau: np.ndarray, ds: float):
        """One predictor-corrector step; None if any safeguard rejects it.

        Besides corrector convergence, the step must keep direct coordinates
        positive, land within ``max_deviation * ds`` of the predicted point, and
        turn the tangent by less than ``arccos(min_cos)``. The last two stop the
        corrector from jumping to a nearby stretch of the path at sharp bends.
        """
        prm = self.prm
        y_pred = y + ds * tau
        out = self.correct(y_pred, tau, y[-1])
        if out is None:
            return None
        y_new, iters, res = out
        if not self._interior_ok(y_new):
            return None
        if np.linalg.norm(y_new - y_pred) > prm.max_deviation * ds:
            return None
        try:
            tau_new = null_direction(self.h.jacobian(y_new), tau)
        except NumericalFailure:
            return None
        if tau_new @ tau < prm.min_cos:
            return None
        return y_new, tau_new, iters, res

    def refine(self, y: np.ndarray) -> np.ndarray:
        """Newton in (x, nu) at fixed t until the residual meets final_tol."""
        h = self.h
        y = y.copy()
        best = y.copy()
        best_res = float(np.max(np.abs(h.residual(y)))) if h.size else 0.0
        for _ in range(self.prm.max_corrector_iters):
            if best_res <= self.prm.final_tol:
                break
            try:
                dy = np.linalg.solve(h.jacobian(y)[:, :-1], -h.residual(y))
            except np.linalg.LinAlgError:
                break
            y[:-1] += dy
            r = float(np.max(np.abs(h.residual(y))))
            if not np.isfinite(r):
                break
            if r < best_res:
                best, best_res = y.copy(), r
        return best

    def run(self) -> SolveResult:
        h, prm = self.h, self.prm
        started = time.monotonic()
        start = h.start_point()
        y = start.vector
        res0 = float(np.max(np.abs(h.residual(y)))) if h.size else 0.0
        if res0 > START_TOL:
            raise NumericalFailure(f"start point residual {res0:.3g} exceeds {START_TOL}")
        trace = PathTrace()
        self._record(trace, y, 0.0, 0, res0)

        status = CONVERGED
        step = prm.step_cap(1.0)
        try:
            tau = null_direction(h.jacobian(y))
        except NumericalFailure:
            tau = None
            status = NUMERICAL_FAILURE
        steps = 0
        while status == CONVERGED and y[-1] >= prm.t_end:
            if steps >= prm.max_steps:
                status = STEP_LIMIT
                break
            if prm.max_wall_time is not None and time.monotonic() - started > prm.max_wall_time:
                status = TIME_LIMIT
                break
            t = y[-1]
            cap = prm.step_cap(t)
            if tau[-1] < 0:
                # do not aim far past the stopping level
                cap = min(cap, (t - 0.5 * prm.t_end) / -tau[-1])
            ds = min(step, cap)
            accepted = None
            while ds >= prm.min_step:
                accepted = self._attempt(y, tau, ds)
                if accepted is not None:
                    break
                ds *= prm.shrink
            if accepted is None:
                status = NUMERICAL_FAILURE
                break
            y, tau, iters, res = accepted
            steps += 1
            self._record(trace, y, ds, iters, res)
            step = ds * prm.grow if iters <= prm.fast_iters else ds

        if status == CONVERGED:
            y = self.refine(y)
        rec = h.recover(y)
        raw = rec.gamma
        gamma = polish(h.sf, raw)
        return SolveResult(
            status=status,
            gamma=gamma,
            gap=epsilon_gap(h.sf, gamma),
            raw_gap=epsilon_gap(h.sf, raw),
            trace=trace,
            steps=steps,
            final_t=float(y[-1]),
            wall_time=time.monotonic() - started,
            homotopy=h,
        )

    def _record(self, trace: PathTrace, y, step, iters, res):
        gam = self.h.recover(y).gamma_flat.copy() if self.prm.record_gamma else None
        trace.points.append(PathPoint(self.h.point(y), float(step), int(iters), float(res), gam))


def trace(cfg: HomotopyConfig | BarrierHomotopy, sf: SequenceFormGame | None = None,
          params: TracerParams | None = None) -> SolveResult:
    """Follow the path of the configured homotopy down to t < t_end."""
    if isinstance(cfg, BarrierHomotopy):
        h = cfg
    else:
        if sf is None:
            raise ValueError("a sequence-form game is required with a HomotopyConfig")
        h = build_homotopy(sf, cfg)
    return _Tracer(h, params or TracerParams()).run()

