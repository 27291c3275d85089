"""Equilibrium computation and learning dynamics for zero-sum networked games.

Provides the exact LP solver, the regularized/optimistic multiplicative
update family, fictitious play, no-regret averaging with marginalization,
and the gap metrics used to score all of them.  Every dynamic works on a
stacked payoff operator (one matrix-vector product per iteration) and the
multiplicative updates run in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _simplex
from .games import JointMixture, PolymatrixGame, expected_payoffs

__all__ = [
    "OracleConfig",
    "GapReport",
    "PolicyTrajectory",
    "LPSolution",
    "MarginalizationResult",
    "AverageResult",
    "StackedPayoffs",
    "matrix_ne_gap",
    "matrix_qre_gap",
    "ne_lp",
    "marginalize",
    "mwu_fixed",
    "mwu_diminishing",
    "omwu",
    "omd",
    "fp_matrix",
    "smooth_fp_matrix",
    "no_regret_avg",
    "qre_reference",
    "solve_matrix_game",
]

ORACLE_KINDS = ("lp", "mwu_fixed", "mwu_diminishing", "omwu", "omd",
                "fp", "smooth_fp", "no_regret_avg")

# Gap evaluation cadence for early stopping on target_gap.
EARLY_STOP_STRIDE = 50


@dataclass(frozen=True)
class OracleConfig:
    """Configuration record for a stage-game solver.

    ``tau`` and ``eta`` default per algorithm when left ``None`` (for the
    optimistic update: tau = 1/(n max_i log|A_i|), eta = 1/(8 n max|r|)).
    """

    kind: str = "lp"
    tau: float | None = None
    eta: float | None = None
    max_iters: int = 1000
    seed: int = 0
    target_gap: float | None = None

    def __post_init__(self):
        if self.kind not in ORACLE_KINDS:
            raise ValueError(f"unknown oracle kind {self.kind!r}; expected one of {ORACLE_KINDS}")
        if self.tau is not None and self.tau < 0:
            raise ValueError("tau must be non-negative")
        if self.eta is not None and self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.max_iters < 0:
            raise ValueError("max_iters must be non-negative")


@dataclass(frozen=True)
class GapReport:
    ne_gap: float
    per_player_gaps: np.ndarray
    qre_gap: float | None = None
    iterations_used: int = 0


class StackedPayoffs:
    """Stacked block operator: q = R @ p gives every player's payoff vector.

    ``R`` places ``r_{i,j}`` at block (i, j); policies live as one stacked
    vector of length ``sum(A_i)``.
    """

    def __init__(self, game: PolymatrixGame):
        self.game = game
        counts = game.action_counts
        self.counts = np.asarray(counts)
        self.offsets = np.concatenate([[0], np.cumsum(counts)])
        self.total = int(self.offsets[-1])
        self.n = game.num_players
        self.matrix = np.zeros((self.total, self.total))
        for (i, j), t in game.payoffs.items():
            self.matrix[self.offsets[i]:self.offsets[i + 1],
                        self.offsets[j]:self.offsets[j + 1]] = t
        self.starts = self.offsets[:-1]
        self._rep = np.repeat(np.arange(self.n), counts)

    def stack(self, profile: Sequence[np.ndarray]) -> np.ndarray:
        return np.concatenate([np.asarray(p, dtype=float) for p in profile])

    def unstack(self, p: np.ndarray) -> list[np.ndarray]:
        return [p[self.offsets[i]:self.offsets[i + 1]] for i in range(self.n)]

    def payoff_vectors(self, p: np.ndarray) -> np.ndarray:
        return self.matrix @ p

    def log_normalize(self, logp: np.ndarray) -> np.ndarray:
        """Per-player log-space normalization (stable logsumexp)."""
        m = np.maximum.reduceat(logp, self.starts)
        z = np.add.reduceat(np.exp(logp - m[self._rep]), self.starts)
        return logp - (m + np.log(z))[self._rep]

    def seg_max(self, x: np.ndarray) -> np.ndarray:
        return np.maximum.reduceat(x, self.starts)

    def seg_sum(self, x: np.ndarray) -> np.ndarray:
        return np.add.reduceat(x, self.starts)

    def uniform(self) -> np.ndarray:
        return np.concatenate([np.full(a, 1.0 / a) for a in self.counts])


@dataclass
class PolicyTrajectory:
    """Iterates of a dynamic as stacked rows; ``profile(t)`` unstacks one."""

    stacked: np.ndarray
    ops: StackedPayoffs
    secondary: np.ndarray | None = None
    best_index: int | None = None
    gaps: np.ndarray | None = None

    def __len__(self) -> int:
        return self.stacked.shape[0]

    def profile(self, t: int) -> list[np.ndarray]:
        return self.ops.unstack(self.stacked[t])

    @property
    def last(self) -> list[np.ndarray]:
        return self.profile(len(self) - 1)

    @property
    def best(self) -> list[np.ndarray]:
        idx = self.best_index if self.best_index is not None else len(self) - 1
        return self.profile(idx)


def _entropy(p: np.ndarray) -> float:
    mask = p > 0
    return float(-(p[mask] * np.log(p[mask])).sum())


def _logsumexp(x: np.ndarray) -> float:
    m = float(np.max(x))
    return m + math.log(float(np.exp(x - m).sum()))


def matrix_ne_gap(game: PolymatrixGame, profile: Sequence[np.ndarray],
                  iterations_used: int = 0) -> GapReport:
    """Best unilateral improvement over the profile, per player and overall.

    The best deviation is always a pure action because each player's payoff
    is linear in its own policy.
    """
    ops = StackedPayoffs(game)
    q = ops.payoff_vectors(ops.stack(profile))
    gaps = np.empty(game.num_players)
    for i in range(game.num_players):
        qi = q[ops.offsets[i]:ops.offsets[i + 1]]
        gaps[i] = float(np.max(qi) - profile[i] @ qi)
    return GapReport(float(np.max(gaps)), gaps, None, iterations_used)


def matrix_qre_gap(game: PolymatrixGame, profile: Sequence[np.ndarray], tau: float) -> float:
    """Best entropy-regularized improvement at temperature ``tau``.

    The inner maximum has the closed form tau * logsumexp(q/tau); the
    cross-player entropy terms of the regularized payoff cancel in the
    difference, so only the player's own entropy appears.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    ops = StackedPayoffs(game)
    q = ops.payoff_vectors(ops.stack(profile))
    worst = -np.inf
    for i in range(game.num_players):
        qi = q[ops.offsets[i]:ops.offsets[i + 1]]
        best = tau * _logsumexp(qi / tau)
        have = float(profile[i] @ qi) + tau * _entropy(np.asarray(profile[i], dtype=float))
        worst = max(worst, best - have)
    return float(worst)


@dataclass(frozen=True)
class LPSolution:
    profile: list[np.ndarray]
    values: np.ndarray
    objective: float


def ne_lp(game: PolymatrixGame, solver_tol: float = 1e-9) -> LPSolution:
    """Exact Nash equilibrium of a zero-sum networked game by linear program.

    Minimizes sum_i v_i subject to v_i >= [sum_j r_{i,j} pi_j]_{a_i} and the
    simplex constraints; for a zero-sum game the optimum is 0 and the
    minimizer is an equilibrium.  An eps-optimal solution is an eps-NE with
    r_i(pi*) <= v_i* <= r_i(pi*) + eps.
    """
    ops = StackedPayoffs(game)
    n, m = game.num_players, ops.total
    ncols = 2 * m + 2 * n
    rows = []
    rhs = []
    for i in range(n):
        for a in range(game.action_counts[i]):
            row = np.zeros(ncols)
            for j in game.graph.neighbors(i):
                row[ops.offsets[j]:ops.offsets[j + 1]] = -game.table(i, j)[a]
            row[m + i] = 1.0        # v_i^+
            row[m + n + i] = -1.0   # v_i^-
            row[m + 2 * n + ops.offsets[i] + a] = -1.0  # slack
            rows.append(row)
            rhs.append(0.0)
    for i in range(n):
        row = np.zeros(ncols)
        row[ops.offsets[i]:ops.offsets[i + 1]] = 1.0
        rows.append(row)
        rhs.append(1.0)
    cost = np.zeros(ncols)
    cost[m:m + n] = 1.0
    cost[m + n:m + 2 * n] = -1.0

    try:
        x, obj = _simplex.solve_lp(cost, np.array(rows), np.array(rhs))
    except _simplex.LPError as err:
        raise _simplex.LPError(f"equilibrium LP failed ({err}); the game is "
                               "likely not a valid zero-sum instance") from err
    profile = []
    for i in range(n):
        p = np.clip(x[ops.offsets[i]:ops.offsets[i + 1]], 0.0, None)
        profile.append(p / p.sum())
    values = x[m:m + n] - x[m + n:m + 2 * n]
    if game.zero_sum and abs(obj) > max(solver_tol, 1e-7):
        raise _simplex.LPError(f"LP objective {obj:.3g} is far from 0 on a "
                               "declared zero-sum game")
    return LPSolution(profile, values, float(obj))


@dataclass(frozen=True)
class MarginalizationResult:
    profile: list[np.ndarray]
    eps_cce: float
    ne_bound: float
    joint_payoffs: np.ndarray
    marginal_payoffs: np.ndarray


def marginalize(joint: JointMixture, game: PolymatrixGame) -> MarginalizationResult:
    """Per-player marginals of a correlated mixture, with the NE certificate.

    If the mixture is an eps-CCE, the product of marginals is an n*eps NE
    and its payoffs sandwich between r_i(joint) and r_i(joint) - n*eps.
    """
    profile = [np.asarray(p, dtype=float) for p in joint.marginals()]
    n = game.num_players
    joint_payoffs = np.zeros(n)
    for (i, j), t in game.payoffs.items():
        joint_payoffs[i] += float(np.sum(joint.pair_marginal(i, j) * t))
    ops = StackedPayoffs(game)
    q = ops.payoff_vectors(ops.stack(profile))
    gaps = np.empty(n)
    for i in range(n):
        qi = q[ops.offsets[i]:ops.offsets[i + 1]]
        gaps[i] = float(np.max(qi)) - joint_payoffs[i]
    eps = max(float(np.max(gaps)), 0.0)
    return MarginalizationResult(profile, eps, n * eps, joint_payoffs,
                                 expected_payoffs(game, profile))


def _maybe_stop(ops: StackedPayoffs, game: PolymatrixGame, p: np.ndarray,
                target: float | None) -> bool:
    if target is None:
        return False
    return matrix_ne_gap(game, ops.unstack(p)).ne_gap <= target


def mwu_fixed(game: PolymatrixGame, tau: float, iters: int, seed: int = 0,
              target_gap: float | None = None) -> PolicyTrajectory:
    """Multiplicative weights on the tau-regularized game, fixed temperature.

    Steps eta_t = 1/(tau (t + K)) with K = ceil(2R/tau + log max|A_i|); the
    update pi^{t+1} ∝ (pi^t)^{1 - eta tau} exp(eta q^t) keeps every iterate
    inside the set {pi_i(a) >= exp(-R/tau)/|A_i|} when payoffs lie in
    [0, R].  The last row is the iterate to report.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    ops = StackedPayoffs(game)
    r_bound = float(game.reward_bound)
    k0 = math.ceil(2.0 * r_bound / tau + math.log(max(game.action_counts)))
    traj = np.empty((iters + 1, ops.total))
    logp = np.log(ops.uniform())
    traj[0] = np.exp(logp)
    for t in range(iters):
        eta = 1.0 / (tau * (t + k0))
        q = ops.payoff_vectors(np.exp(logp))
        logp = ops.log_normalize((1.0 - eta * tau) * logp + eta * q)
        traj[t + 1] = np.exp(logp)
        if target_gap is not None and (t + 1) % EARLY_STOP_STRIDE == 0 \
                and _maybe_stop(ops, game, traj[t + 1], target_gap):
            traj = traj[:t + 2]
            break
    return PolicyTrajectory(traj, ops)


def mwu_diminishing(game: PolymatrixGame, iters: int, seed: int = 0,
                    target_gap: float | None = None) -> PolicyTrajectory:
    """Multiplicative weights with a decaying temperature tau_t = (t+K)^{-1/6}.

    Each step is a KL-prox onto the shrinking clipped simplex
    {pi_i(a) >= 1/(|A_i| (t+K)^2)} with gain q^t - tau_t log pi^t and step
    eta_t = (t+K)^{-1/2}; K = (R + 2 max_i log|A_i|)^2.
    """
    ops = StackedPayoffs(game)
    r_bound = float(game.reward_bound)
    k0 = (r_bound + 2.0 * math.log(max(game.action_counts))) ** 2
    traj = np.empty((iters + 1, ops.total))
    logp = np.log(ops.uniform())
    traj[0] = np.exp(logp)
    for t in range(iters):
        tau_t = (t + k0) ** (-1.0 / 6.0)
        eta_t = (t + k0) ** (-0.5)
        p = np.exp(logp)
        g = ops.payoff_vectors(p) - tau_t * logp
        floor_scale = 1.0 / (t + k0) ** 2
        # per-player floor 1/(|A_i| (t+K)^2): apply per segment
        out = np.empty_like(logp)
        raw = logp + eta_t * g
        for i in range(ops.n):
            lo, hi = ops.offsets[i], ops.offsets[i + 1]
            seg_floor = floor_scale / game.action_counts[i]
            out[lo:hi] = _kl_prox_segment(raw[lo:hi], seg_floor)
        logp = out
        traj[t + 1] = np.exp(logp)
        if target_gap is not None and (t + 1) % EARLY_STOP_STRIDE == 0 \
                and _maybe_stop(ops, game, traj[t + 1], target_gap):
            traj = traj[:t + 2]
            break
    return PolicyTrajectory(traj, ops)


def _kl_prox_segment(raw: np.ndarray, floor: float) -> np.ndarray:
    """Floor-and-renormalize fixed point for one player's segment (log in/out)."""
    m = float(np.max(raw))
    w = np.exp(raw - m)
    clamped = np.zeros(len(raw), dtype=bool)
    for _ in range(len(raw) + 1):
        denom = float(w[~clamped].sum())
        if denom <= 0.0:
            return np.log(np.full(len(raw), 1.0 / len(raw)))
        scale = (1.0 - floor * clamped.sum()) / denom
        vals = w * scale
        vals[clamped] = floor
        newly = (~clamped) & (vals < floor)
        if not newly.any():
            return np.log(vals)
        clamped |= newly
    return np.log(np.full(len(raw), 1.0 / len(raw)))


def omwu(game: PolymatrixGame, tau: float | None = None, eta: float | None = None,
         iters: int = 1000, target_gap: float | None = None) -> PolicyTrajectory:
    """Optimistic MWU with entropy regularization, two-sequence form.

    Defaults: tau = 1/(n max_i log|A_i|), eta = 1/(8 n max|r|).  Both the
    primary and secondary sequences use the payoff gradient at the primary
    iterate; the primary sequence's last row is the output.
    """
    ops = StackedPayoffs(game)
    n = game.num_players
    if tau is None:
        tau = 1.0 / (n * max(math.log(a) for a in game.action_counts))
    if eta is None:
        eta = 1.0 / (8.0 * n * float(game.reward_bound))
    primary = np.empty((iters + 1, ops.total))
    secondary = np.empty((iters + 1, ops.total))
    logp = np.log(ops.uniform())
    logbar = logp.copy()
    primary[0] = np.exp(logp)
    secondary[0] = np.exp(logbar)
    for t in range(iters):
        q = ops.payoff_vectors(np.exp(logp))
        logbar = ops.log_normalize((1.0 - eta * tau) * logbar + eta * q)
        logp = ops.log_normalize((1.0 - eta * tau) * logbar + eta * q)
        primary[t + 1] = np.exp(logp)
        secondary[t + 1] = np.exp(logbar)
        if target_gap is not None and (t + 1) % EARLY_STOP_STRIDE == 0 \
                and _maybe_stop(ops, game, primary[t + 1], target_gap):
            primary = primary[:t + 2]
            secondary = secondary[:t + 2]
            break
    return PolicyTrajectory(primary, ops, secondary=secondary)


def omd(game: PolymatrixGame, eta: float | None = None, iters: int = 1000,
        gap_stride: int = 1) -> PolicyTrajectory:
    """Optimistic mirror descent with the KL generating function.

    Default eta = 1/(4 n max|r|).  The gap of each primary iterate is
    measured every ``gap_stride`` steps and the best one is flagged.
    """
    ops = StackedPayoffs(game)
    if eta is None:
        eta = 1.0 / (4.0 * game.num_players * float(game.reward_bound))
    primary = np.empty((iters + 1, ops.total))
    secondary = np.empty((iters + 1, ops.total))
    logp = np.log(ops.uniform())
    logbar = logp.copy()
    primary[0] = np.exp(logp)
    secondary[0] = np.exp(logbar)
    gaps = np.full(iters + 1, np.nan)
    gaps[0] = matrix_ne_gap(game, ops.unstack(primary[0])).ne_gap
    best_idx, best_gap = 0, gaps[0]
    for t in range(iters):
        q_now = ops.payoff_vectors(np.exp(logp))
        logp = ops.log_normalize(logbar + eta * q_now)
        q_next = ops.payoff_vectors(np.exp(logp))
        logbar = ops.log_normalize(logbar + eta * q_next)
        primary[t + 1] = np.exp(logp)
        secondary[t + 1] = np.exp(logbar)
        if (t + 1) % gap_stride == 0 or t + 1 == iters:
            g = matrix_ne_gap(game, ops.unstack(primary[t + 1])).ne_gap
            gaps[t + 1] = g
            if g < best_gap:
                best_gap, best_idx = g, t + 1
    return PolicyTrajectory(primary, ops, secondary=secondary,
                            best_index=best_idx, gaps=gaps)


@dataclass
class BeliefTrajectory:
    """Fictitious-play belief path plus the per-iteration diagnostic."""

    beliefs: np.ndarray           # (T+1, sum A)
    ops: StackedPayoffs
    diagnostics: np.ndarray       # per-iteration V (FP) or QRE gap (smooth FP)
    actions: np.ndarray           # (T, n) realized pure actions

    def profile(self, t: int) -> list[np.ndarray]:
        return self.ops.unstack(self.beliefs[t])

    @property
    def last(self) -> list[np.ndarray]:
        return self.profile(self.beliefs.shape[0] - 1)


def _steps(kind, iters: int) -> np.ndarray:
    """Step sizes alpha^(k) for k = 0..iters-1; default harmonic 1/(k+1)."""
    if kind is None:
        return 1.0 / (np.arange(iters) + 1.0)
    if callable(kind):
        return np.array([float(kind(k)) for k in range(iters)])
    arr = np.asarray(kind, dtype=float)
    if arr.shape != (iters,):
        raise ValueError("step schedule must have one entry per iteration")
    return arr


def fp_matrix(game: PolymatrixGame, iters: int, steps=None, seed: int = 0) -> BeliefTrajectory:
    """Fictitious play: best-respond to shared beliefs, average the play.

    Tie-breaks go to the lowest action index, so the trajectory is fully
    deterministic; ``seed`` is accepted for interface symmetry with the
    sampled variant.  The diagnostic is the summed per-player advantage
    sum_i (max_a q_i(a) - <pi_hat_i, q_i>), which tends to 0 when beliefs
    approach equilibrium.
    """
    ops = StackedPayoffs(game)
    alpha = _steps(steps, iters)
    beliefs = np.empty((iters + 1, ops.total))
    b = ops.uniform()
    beliefs[0] = b
    diag = np.empty(iters)
    actions = np.empty((iters, game.num_players), dtype=np.int64)
    for k in range(iters):
        q = ops.payoff_vectors(b)
        total = 0.0
        for i in range(game.num_players):
            lo, hi = ops.offsets[i], ops.offsets[i + 1]
            qi = q[lo:hi]
            a = int(np.argmax(qi))
            actions[k, i] = a
            total += float(qi[a] - b[lo:hi] @ qi)
        diag[k] = total
        for i in range(game.num_players):
            lo, hi = ops.offsets[i], ops.offsets[i + 1]
            b[lo:hi] *= 1.0 - alpha[k]
            b[lo + actions[k, i]] += alpha[k]
        beliefs[k + 1] = b
    return BeliefTrajectory(beliefs, ops, diag, actions)


def smooth_fp_matrix(game: PolymatrixGame, tau: float, iters: int,
                     steps=None, seed: int = 0) -> BeliefTrajectory:
    """Smooth fictitious play: sample from the softened best response.

    Actions are drawn from softmax(q_i / tau); beliefs average the realized
    play.  The diagnostic records the QRE gap of the belief profile, which
    converges to 0 at the game's unique quantal response equilibrium.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    ops = StackedPayoffs(game)
    rng = np.random.default_rng(seed)
    alpha = _steps(steps, iters)
    beliefs = np.empty((iters + 1, ops.total))
    b = ops.uniform()
    beliefs[0] = b
    diag = np.empty(iters)
    actions = np.empty((iters, game.num_players), dtype=np.int64)
    for k in range(iters):
        q = ops.payoff_vectors(b)
        diag[k] = matrix_qre_gap(game, ops.unstack(b), tau)
        for i in range(game.num_players):
            lo, hi = ops.offsets[i], ops.offsets[i + 1]
            z = q[lo:hi] / tau
            z = np.exp(z - np.max(z))
            z /= z.sum()
            actions[k, i] = int(rng.choice(hi - lo, p=z))
        for i in range(game.num_players):
            lo, hi = ops.offsets[i], ops.offsets[i + 1]
            b[lo:hi] *= 1.0 - alpha[k]
            b[lo + actions[k, i]] += alpha[k]
        beliefs[k + 1] = b
    return BeliefTrajectory(beliefs, ops, diag, actions)


@dataclass(frozen=True)
class AverageResult:
    mixture: JointMixture
    marginal: list[np.ndarray]
    eps_cce: float
    marginal_gap: GapReport


def no_regret_avg(game: PolymatrixGame, iters: int, seed: int = 0) -> AverageResult:
    """Unregularized MWU self-play; the empirical average is a CCE.

    Uses eta = sqrt(log max|A_i| / T) / max|r| and returns the round mixture
    together with its marginalized product profile; marginalizing an
    eps-CCE of a zero-sum networked game gives an (n*eps)-NE.
    """
    if iters < 1:
        raise ValueError("need at least one iteration")
    ops = StackedPayoffs(game)
    eta = math.sqrt(math.log(max(game.action_counts)) / iters) / float(game.reward_bound)
    logp = np.log(ops.uniform())
    rounds = np.empty((iters, ops.total))
    for t in range(iters):
        p = np.exp(logp)
        rounds[t] = p
        logp = ops.log_normalize(logp + eta * ops.payoff_vectors(p))
    weights = np.full(iters, 1.0 / iters)
    components = tuple(tuple(ops.unstack(rounds[t])) for t in range(iters))
    mixture = JointMixture(weights, components)
    result = marginalize(mixture, game)
    report = matrix_ne_gap(game, result.profile, iterations_used=iters)
    return AverageResult(mixture, result.profile, result.eps_cce, report)


def qre_reference(game: PolymatrixGame, tau: float, tol: float = 1e-10,
                  damping: float = 0.5, max_iters: int = 200000) -> list[np.ndarray]:
    """Quantal response equilibrium by damped softmax fixed-point iteration.

    Reference solution for tests; uniqueness holds for zero-sum networked
    games at fixed tau.
    """
    ops = StackedPayoffs(game)
    p = ops.uniform()
    for _ in range(max_iters):
        q = ops.payoff_vectors(p)
        target = np.empty_like(p)
        for i in range(ops.n):
            lo, hi = ops.offsets[i], ops.offsets[i + 1]
            z = q[lo:hi] / tau
            z = np.exp(z - np.max(z))
            target[lo:hi] = z / z.sum()
        new = (1.0 - damping) * p + damping * target
        if float(np.max(np.abs(new - p))) <= tol:
            return ops.unstack(new)
        p = new
    raise RuntimeError("QRE fixed-point iteration did not converge")


def solve_matrix_game(game: PolymatrixGame, config: OracleConfig) -> tuple[list[np.ndarray], GapReport]:
    """Uniform oracle interface: solve a stage game, return (profile, gap)."""
    kind = config.kind
    if kind == "lp":
        sol = ne_lp(game)
        profile = sol.profile
        iters = 0
    elif kind == "mwu_fixed":
        tau = config.tau if config.tau is not None else 0.05
        traj = mwu_fixed(game, tau, config.max_iters, config.seed, config.target_gap)
        profile = traj.last
        iters = len(traj) - 1
    elif kind == "mwu_diminishing":
        traj = mwu_diminishing(game, config.max_iters, config.seed, config.target_gap)
        profile = traj.last
        iters = len(traj) - 1
    elif kind == "omwu":
        traj = omwu(game, config.tau, config.eta, config.max_iters, config.target_gap)
        profile = traj.last
        iters = len(traj) - 1
    elif kind == "omd":
        traj = omd(game, config.eta, config.max_iters, gap_stride=EARLY_STOP_STRIDE)
        profile = traj.best
        iters = len(traj) - 1
    elif kind == "fp":
        traj = fp_matrix(game, config.max_iters, seed=config.seed)
        profile = traj.last
        iters = config.max_iters
    elif kind == "smooth_fp":
        tau = config.tau if config.tau is not None else 0.05
        traj = smooth_fp_matrix(game, tau, config.max_iters, seed=config.seed)
        profile = traj.last
        iters = config.max_iters
    elif kind == "no_regret_avg":
        res = no_regret_avg(game, max(config.max_iters, 1), config.seed)
        return res.marginal, res.marginal_gap
    else:  # pragma: no cover - guarded by OracleConfig
        raise ValueError(kind)
    report = matrix_ne_gap(game, profile, iterations_used=iters)
    if config.tau:
        report = GapReport(report.ne_gap, report.per_player_gaps,
                           matrix_qre_gap(game, profile, config.tau), iters)
    return profile, report
