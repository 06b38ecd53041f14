"""Logarithmic-barrier homotopy systems over the sequence form.

Two variants share one code path:

``lgne``
    barrier on the terminal sequences D_i only; the other sequences are
    carried directly as unknowns.
``lbne``
    barrier on every sequence (behavioral-style log terms), with the
    multiplier of sequence s weighted by ``1 - |M_i(s)|``.

The unknowns are ``y = (x, nu, t)``. Each barrier coordinate is mapped
through the smooth pair (psi1, psi2) so that ``gamma * lam == t * gamma0``
holds identically and no complementarity rows are needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .sequence_form import SequenceFormGame, random_interior_plan, uniform_plan

LGNE = "lgne"
LBNE = "lbne"
VARIANTS = (LGNE, LBNE)


def psi(v, r, tau0, kappa0: float = 3.0):
    """Smooth complementarity pair and its partial derivatives.

    Returns ``(psi1, psi2, dpsi1_dv, dpsi2_dv, dpsi1_dr, dpsi2_dr)`` where
    ``psi1 = ((v + s)/2)**kappa0``, ``psi2 = ((-v + s)/2)**kappa0`` and
    ``s = sqrt(v**2 + 4 tau0 r)``, so ``psi1 * psi2 == (tau0 r)**kappa0``.
    """
    v, r, tau0 = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (v, r, tau0)))
    if kappa0 <= 2:
        raise ValueError(f"kappa0 must exceed 2, got {kappa0}")
    if np.any(r < 0) or np.any(tau0 <= 0):
        raise ValueError("psi needs r >= 0 and tau0 > 0")
    c = tau0 * r
    s = np.sqrt(v * v + 4.0 * c)
    # evaluate the larger root directly and the smaller one from p*q = tau0*r to avoid cancellation
    big = 0.5 * (np.abs(v) + s)
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.where(big > 0, c / big, 0.0)
    p = np.where(v >= 0, big, small)
    q = np.where(v >= 0, small, big)
    s = p + q
    psi1 = p**kappa0
    psi2 = q**kappa0
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_s = np.where(s > 0, 1.0 / s, 0.0)
    d1v = kappa0 * psi1 * inv_s
    d2v = -kappa0 * psi2 * inv_s
    d1r = kappa0 * p ** (kappa0 - 1) * tau0 * inv_s
    d2r = kappa0 * q ** (kappa0 - 1) * tau0 * inv_s
    return psi1, psi2, d1v, d2v, d1r, d2r


def sample_alpha(seed, bound: float, size: int) -> np.ndarray:
    """Uniform perturbation in [-bound, bound]^size, reproducible by seed."""
    if bound < 0:
        raise ValueError("alpha bound must be non-negative")
    if bound == 0:
        return np.zeros(size)
    return np.random.default_rng(seed).uniform(-bound, bound, size)


@dataclass(frozen=True)
class HomotopyConfig:
    variant: str = LGNE
    kappa0: float = 3.0
    alpha_bound: float = 0.01
    seed: int = 0
    gamma0: str | dict | list = "uniform"
    """"uniform", "random" (drawn from ``seed``), a ``{player: {label: value}}`` map or per-player arrays."""

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if not self.kappa0 > 2:
            raise ValueError(f"kappa0 must exceed 2, got {self.kappa0}")
        if self.alpha_bound < 0:
            raise ValueError("alpha_bound must be non-negative")


@dataclass
class HomotopyPoint:
    x: np.ndarray
    nu: np.ndarray
    t: float

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.x, self.nu, [self.t]])


@dataclass(frozen=True)
class RecoveredPrimalDual:
    gamma: list[np.ndarray]
    """Per-player realization plans (empty sequence included)."""
    lam: np.ndarray
    """Flat multipliers over non-empty sequences (zero where not substituted)."""
    gamma_flat: np.ndarray = field(repr=False)


class BarrierHomotopy:
    """Residual and Jacobian of one barrier homotopy on a fixed game."""

    def __init__(self, sf: SequenceFormGame, variant: str = LGNE, kappa0: float = 3.0,
                 gamma0=None, alpha=None):
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r}")
        if not kappa0 > 2:
            raise ValueError("kappa0 must exceed 2")
        self.sf = sf
        self.variant = variant
        self.kappa0 = float(kappa0)
        n0, m0 = sf.n0, sf.m0
        self.n0, self.m0 = n0, m0
        self.size = n0 + m0

        gamma0 = uniform_plan(sf) if gamma0 is None else [np.asarray(g, dtype=float) for g in gamma0]
        g0 = sf.join_x(gamma0)
        if np.any(g0 <= 0):
            raise ValueError("starting plan gamma0 must be strictly positive")
        self.gamma0 = gamma0
        self.gamma0_flat = g0
        self.alpha = np.zeros(n0) if alpha is None else np.asarray(alpha, dtype=float)
        if self.alpha.shape != (n0,):
            raise ValueError(f"alpha must have length {n0}")

        in_d = np.concatenate([sf.seq[i].in_d[1:] for i in sf.players]) if n0 else np.zeros(0, bool)
        n_follow = np.concatenate([[len(f) for f in sf.seq[i].followers[1:]] for i in sf.players]) \
            if n0 else np.zeros(0)
        self.in_d = in_d
        if variant == LGNE:
            self.subst = in_d.copy()
            self.lam_coef = in_d.astype(float)
            self.t_const = in_d.astype(float)
        else:
            self.subst = np.ones(n0, dtype=bool)
            self.lam_coef = 1.0 - n_follow
            self.t_const = np.zeros(n0)
        self.tau0 = np.where(self.subst, g0 ** (1.0 / self.kappa0), 1.0)

        # nu incidence: -1 on the row's own infoset, +1 on each follower infoset (zeta)
        nu_mat = np.zeros((n0, m0))
        flow = np.zeros((m0, n0))
        flow_rhs = np.zeros(m0)
        for i in sf.players:
            ps = sf.seq[i]
            xo, no = sf.x_offsets[i - 1], sf.nu_offsets[i - 1]
            for k in range(1, ps.size):
                nu_mat[xo + k - 1, no + ps.seq_infoset[k]] = -1.0
                for j in ps.followers[k]:
                    nu_mat[xo + k - 1, no + j] += 1.0
            for j in range(ps.m):
                flow[no + j, xo + ps.infoset_seqs[j] - 1] = 1.0
                par = ps.infoset_parent[j]
                if par == 0:
                    flow_rhs[no + j] = 1.0
                else:
                    flow[no + j, xo + par - 1] = -1.0
        self.nu_mat = nu_mat
        self.flow = flow
        self.flow_rhs = flow_rhs

        # terminal -> global x index per real player (n0 stands for the empty sequence)
        ts = sf.term_seq
        gidx = np.empty((len(ts), sf.n), dtype=int)
        for i in sf.players:
            col = ts[:, i]
            gidx[:, i - 1] = np.where(col > 0, sf.x_offsets[i - 1] + col - 1, n0)
        self.gidx = gidx
        self.upay = sf.term_pay * sf.term_chance[:, None]

    # ---- substitution -----------------------------------------------------------

    def _r(self, t: float) -> float:
        return max(t, 0.0) ** (1.0 / self.kappa0)

    def _dr_dt(self, t: float) -> float:
        if t <= 0:
            return np.inf
        return t ** (1.0 / self.kappa0 - 1.0) / self.kappa0

    def _subst(self, x: np.ndarray, t: float):
        r = self._r(t)
        p1, p2, d1v, d2v, d1r, d2r = psi(x, r, self.tau0, self.kappa0)
        s = self.subst
        gam = np.where(s, p1, x)
        lam = np.where(s, p2, 0.0)
        dgam_dx = np.where(s, d1v, 1.0)
        dlam_dx = np.where(s, d2v, 0.0)
        drdt = self._dr_dt(t) if t > 0 else 0.0
        dgam_dt = np.where(s, d1r * drdt, 0.0)
        dlam_dt = np.where(s, d2r * drdt, 0.0)
        return gam, lam, dgam_dx, dlam_dx, dgam_dt, dlam_dt

    def recover(self, y) -> RecoveredPrimalDual:
        x, _, t = self.split(y)
        gam, lam, *_ = self._subst(x, t)
        return RecoveredPrimalDual(self.sf.split_x(gam), lam, gam)

    # ---- layout -----------------------------------------------------------------

    def split(self, y) -> tuple[np.ndarray, np.ndarray, float]:
        if isinstance(y, HomotopyPoint):
            return y.x, y.nu, float(y.t)
        y = np.asarray(y, dtype=float)
        if y.shape != (self.size + 1,):
            raise ValueError(f"point must have length {self.size + 1}, got {y.shape}")
        return y[:self.n0], y[self.n0:self.size], float(y[-1])

    def point(self, y) -> HomotopyPoint:
        x, nu, t = self.split(y)
        return HomotopyPoint(x.copy(), nu.copy(), t)

    # ---- payoffs ----------------------------------------------------------------

    def _products(self, gam: np.ndarray) -> np.ndarray:
        ext = np.append(gam, 1.0)
        return ext[self.gidx]

    def payoffs(self, gam: np.ndarray) -> np.ndarray:
        """g^i(s, gamma^{-i}) for every non-empty sequence, flat."""
        P = self._products(gam)
        out = np.zeros(self.n0 + 1)
        n = self.sf.n
        for i in range(n):
            w = self.upay[:, i] * np.prod(np.delete(P, i, axis=1), axis=1)
            out += np.bincount(self.gidx[:, i], weights=w, minlength=self.n0 + 1)
        return out[:-1]

    def payoff_jacobian(self, gam: np.ndarray) -> np.ndarray:
        """d g(row sequence) / d gamma(column sequence), other players only."""
        P = self._products(gam)
        n = self.sf.n
        size = self.n0 + 1
        flat = np.zeros(size * size)
        for i in range(n):
            for q in range(n):
                if q == i:
                    continue
                rest = [r for r in range(n) if r not in (i, q)]
                w = self.upay[:, i] * (np.prod(P[:, rest], axis=1) if rest else 1.0)
                flat += np.bincount(self.gidx[:, i] * size + self.gidx[:, q], weights=w, minlength=size * size)
        return flat.reshape(size, size)[:-1, :-1]

    # ---- system -----------------------------------------------------------------

    def residual(self, y) -> np.ndarray:
        x, nu, t = self.split(y)
        gam, lam, *_ = self._subst(x, t)
        g = self.payoffs(gam)
        stat = (1 - t) * g + self.lam_coef * lam - t * self.t_const + self.nu_mat @ nu - t * (1 - t) * self.alpha
        flow = self.flow @ gam - self.flow_rhs
        return np.concatenate([stat, flow])

    def jacobian(self, y) -> np.ndarray:
        """Analytic Jacobian, shape (n0 + m0, n0 + m0 + 1); last column is d/dt."""
        x, nu, t = self.split(y)
        gam, lam, dgx, dlx, dgt, dlt = self._subst(x, t)
        n0, m0 = self.n0, self.m0
        G = self.payoff_jacobian(gam)
        g = self.payoffs(gam)
        J = np.zeros((n0 + m0, n0 + m0 + 1))
        J[:n0, :n0] = (1 - t) * G * dgx[None, :]
        J[:n0, :n0][np.diag_indices(n0)] += self.lam_coef * dlx
        J[:n0, n0:n0 + m0] = self.nu_mat
        J[:n0, -1] = -g + (1 - t) * (G @ dgt) + self.lam_coef * dlt - self.t_const - (1 - 2 * t) * self.alpha
        J[n0:, :n0] = self.flow * dgx[None, :]
        J[n0:, -1] = self.flow @ dgt
        return J

    def start_point(self) -> HomotopyPoint:
        """The unique solution at t = 1.

        x puts gamma = gamma0 and lam = 1 on barrier coordinates; nu then
        solves the remaining linear stationarity rows.
        """
        x = np.where(self.subst, self.tau0 - 1.0, self.gamma0_flat)
        rhs = self.t_const - self.lam_coef  # nu_mat @ nu = t_const - lam_coef * 1 at t = 1
        nu, *_ = np.linalg.lstsq(self.nu_mat, rhs, rcond=None) if self.m0 else (np.zeros(0),)
        return HomotopyPoint(x, nu, 1.0)


def build_homotopy(sf: SequenceFormGame, cfg: HomotopyConfig) -> BarrierHomotopy:
    """Instantiate the configured system; alpha and a random gamma0 use independent seed streams."""
    alpha_seed, gamma_seed = np.random.SeedSequence(cfg.seed).spawn(2)
    alpha = sample_alpha(alpha_seed, cfg.alpha_bound, sf.n0)
    if isinstance(cfg.gamma0, str):
        if cfg.gamma0 == "uniform":
            gamma0 = uniform_plan(sf)
        elif cfg.gamma0 == "random":
            gamma0 = random_interior_plan(sf, np.random.default_rng(gamma_seed))
        else:
            raise ValueError(f"gamma0 must be 'uniform', 'random' or a plan, got {cfg.gamma0!r}")
    elif isinstance(cfg.gamma0, dict):
        gamma0 = sf.profile_from_dict(cfg.gamma0)
    else:
        gamma0 = cfg.gamma0
    return BarrierHomotopy(sf, cfg.variant, cfg.kappa0, gamma0, alpha)


# module-level forms of the per-system operations


def recover_primal_dual(cfg: HomotopyConfig, sf: SequenceFormGame, p) -> RecoveredPrimalDual:
    return build_homotopy(sf, cfg).recover(p)


def residual(cfg: HomotopyConfig, sf: SequenceFormGame, p) -> np.ndarray:
    return build_homotopy(sf, cfg).residual(p)


def jacobian(cfg: HomotopyConfig, sf: SequenceFormGame, p) -> np.ndarray:
    return build_homotopy(sf, cfg).jacobian(p)


def start_point(cfg: HomotopyConfig, sf: SequenceFormGame) -> HomotopyPoint:
    return build_homotopy(sf, cfg).start_point()
