"""Markov-game equilibrium machinery.

Backward-induction value iteration with pluggable stage-game oracles,
contracting maxmin value iteration and fictitious play for star-shaped
games with a single controller, horizon truncation, exact best-response
gap evaluation and per-state marginalization of correlated policies.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _fp_core, _simplex
from .decomposition import DecomposedQTable, canonical_q
from .games import (ConstantDynamics, Discounted, EnsembleDynamics, Finite,
                    MarkovJointPolicy, NetworkedMarkovGame, PolymatrixGame,
                    ProductPolicy)
from .polymatrix import OracleConfig, solve_matrix_game

__all__ = [
    "StepSchedule",
    "ValResult",
    "ValueIterationResult",
    "MarkovGapReport",
    "StarValueIterationResult",
    "FPResult",
    "MarkovMarginalization",
    "truncate_horizon",
    "value_iteration_ne",
    "markov_ne_gap",
    "markov_cce_gap",
    "marginalize_markov",
    "star_value_iteration",
    "fp_markov",
    "val_operators",
]


def truncate_horizon(gamma: float, eps: float, reward_bound: float) -> int:
    """Horizon length H = ceil(log(R/eps) / (1-gamma)).

    An eps-NE of the H-horizon game, continued arbitrarily, is a 2*eps-NE
    of the discounted game.  Returns 1 when eps >= R (nothing to truncate).
    """
    if not (0.0 < gamma < 1.0):
        raise ValueError("gamma must lie in (0, 1)")
    if eps <= 0 or reward_bound <= 0:
        raise ValueError("eps and reward bound must be positive")
    if eps >= reward_bound:
        return 1
    return max(1, math.ceil(math.log(reward_bound / eps) / (1.0 - gamma)))


@dataclass(frozen=True)
class StepSchedule:
    """Step sizes indexed by per-state visit count (starting at 1).

    ``power(p)`` gives k^-p, ``harmonic()`` gives 1/k (the empirical
    average), and ``custom(table)`` reads entries directly, clamping at the
    last one.  A (policy, value) pair must update values on the slower
    timescale: beta_k / alpha_k -> 0.
    """

    kind: str
    p: float = 0.0
    table: np.ndarray | None = None

    @classmethod
    def power(cls, p: float) -> "StepSchedule":
        if not (0.0 < p <= 1.0):
            raise ValueError("power exponent must lie in (0, 1] so steps sum to infinity")
        return cls("power", p)

    @classmethod
    def harmonic(cls) -> "StepSchedule":
        return cls("harmonic")

    @classmethod
    def custom(cls, table) -> "StepSchedule":
        arr = np.asarray(table, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("custom schedule needs a 1-D table")
        return cls("custom", table=arr)

    def __call__(self, k: int) -> float:
        if self.kind == "power":
            return float(k) ** (-self.p)
        if self.kind == "harmonic":
            return 1.0 / float(k)
        idx = min(k - 1, self.table.shape[0] - 1)
        return float(self.table[idx])

    def _core_args(self):
        if self.kind == "power":
            return _fp_core.SCHED_POWER, self.p, np.zeros(1)
        if self.kind == "harmonic":
            return _fp_core.SCHED_HARMONIC, 0.0, np.zeros(1)
        return _fp_core.SCHED_CUSTOM, 0.0, self.table


def _check_two_timescale(alpha: StepSchedule, beta: StepSchedule) -> None:
    if alpha.kind == "custom" or beta.kind == "custom":
        return  # caller's responsibility
    pa = 1.0 if alpha.kind == "harmonic" else alpha.p
    pb = 1.0 if beta.kind == "harmonic" else beta.p
    if pb <= pa:
        raise ValueError("value beliefs must update slower than policy "
                         f"beliefs (beta exponent {pb} <= alpha exponent {pa})")


# ---------------------------------------------------------------------------
# Maxmin operators for star-shaped stage games
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ValResult:
    value: float
    maximizer: list[np.ndarray]
    minimizer: list[np.ndarray]


def _val_center_primal(blocks: list[np.ndarray]) -> tuple[float, np.ndarray]:
    """Value and maximizer of max_{mu_1} sum_i min_{a_i} [block_i^T mu_1]_{a_i}."""
    a1 = blocks[0].shape[0]
    sizes = [b.shape[1] for b in blocks]
    k = len(blocks)
    total = sum(sizes)
    # vars [mu_1, u+, u-, slack(total)]
    ncols = a1 + 2 * k + total
    rows, rhs = [], []
    pos = 0
    for m, b in enumerate(blocks):
        for a in range(sizes[m]):
            row = np.zeros(ncols)
            row[:a1] = b[:, a]
            row[a1 + m] = -1.0
            row[a1 + k + m] = 1.0
            row[a1 + 2 * k + pos + a] = -1.0
            rows.append(row)
            rhs.append(0.0)
        pos += sizes[m]
    row = np.zeros(ncols)
    row[:a1] = 1.0
    rows.append(row)
    rhs.append(1.0)
    cost = np.zeros(ncols)
    cost[a1:a1 + k] = -1.0
    cost[a1 + k:a1 + 2 * k] = 1.0
    x, obj = _simplex.solve_lp(cost, np.array(rows), np.array(rhs))
    mu1 = np.clip(x[:a1], 0.0, None)
    mu1 /= mu1.sum()
    return -obj, mu1


def _val_center(blocks: list[np.ndarray]) -> ValResult:
    """max over mu_1 of sum_i min over a_i of [block_i^T mu_1]_{a_i}.

    ``blocks[m]`` has shape (A_1, A_m).  The minimizing leaf policies come
    from the dual-side LP so the returned pair is a stage-game saddle.
    """
    a1 = blocks[0].shape[0]
    sizes = [b.shape[1] for b in blocks]
    k = len(blocks)
    total = sum(sizes)
    value, mu1 = _val_center_primal(blocks)

    # Dual side: min over leaf policies of max over a_1.
    ncols = total + 2 + a1
    rows, rhs = [], []
    for a in range(a1):
        row = np.zeros(ncols)
        pos = 0
        for m, b in enumerate(blocks):
            row[pos:pos + sizes[m]] = -b[a, :]
            pos += sizes[m]
        row[total] = 1.0
        row[total + 1] = -1.0
        row[total + 2 + a] = -1.0
        rows.append(row)
        rhs.append(0.0)
    pos = 0
    for m in range(k):
        row = np.zeros(ncols)
        row[pos:pos + sizes[m]] = 1.0
        rows.append(row)
        rhs.append(1.0)
        pos += sizes[m]
    cost = np.zeros(ncols)
    cost[total] = 1.0
    cost[total + 1] = -1.0
    y, _ = _simplex.solve_lp(cost, np.array(rows), np.array(rhs))
    minimizer = []
    pos = 0
    for m in range(k):
        p = np.clip(y[pos:pos + sizes[m]], 0.0, None)
        minimizer.append(p / p.sum())
        pos += sizes[m]
    return ValResult(float(value), [mu1], minimizer)


def _val_team(blocks: list[np.ndarray]) -> ValResult:
    """max over leaf policies of min over a_1 of sum_i [mu_i^T block_i]_{a_1}.

    ``blocks[m]`` has shape (A_m, A_1).  The center's inner argmin is pure;
    ties break to the lowest action index.
    """
    a1 = blocks[0].shape[1]
    sizes = [b.shape[0] for b in blocks]
    k = len(blocks)
    total = sum(sizes)
    ncols = total + 2 + a1
    rows, rhs = [], []
    for a in range(a1):
        row = np.zeros(ncols)
        pos = 0
        for m, b in enumerate(blocks):
            row[pos:pos + sizes[m]] = b[:, a]
            pos += sizes[m]
        row[total] = -1.0
        row[total + 1] = 1.0
        row[total + 2 + a] = -1.0
        rows.append(row)
        rhs.append(0.0)
    pos = 0
    for m in range(k):
        row = np.zeros(ncols)
        row[pos:pos + sizes[m]] = 1.0
        rows.append(row)
        rhs.append(1.0)
        pos += sizes[m]
    cost = np.zeros(ncols)
    cost[total] = -1.0
    cost[total + 1] = 1.0
    y, obj = _simplex.solve_lp(cost, np.array(rows), np.array(rhs))
    maximizer = []
    pos = 0
    for m in range(k):
        p = np.clip(y[pos:pos + sizes[m]], 0.0, None)
        maximizer.append(p / p.sum())
        pos += sizes[m]
    value = -obj
    payoff = np.zeros(a1)
    for m, b in enumerate(blocks):
        payoff += maximizer[m] @ b
    inner = np.zeros(a1)
    inner[int(np.argmin(payoff))] = 1.0
    return ValResult(float(value), maximizer, [inner])


def val_operators(blocks: list[np.ndarray]) -> tuple[ValResult, ValResult]:
    """Center maxmin and leaf-team maxmin on a star stage game.

    ``blocks[m]`` holds the center-vs-leaf payoff (A_1, A_m).  The second
    result evaluates the leaf side on the induced two-sided pair (leaf
    blocks = -block^T), so the two values sum to zero.
    """
    center = _val_center(blocks)
    team = _val_team([-b.T for b in blocks])
    return center, team


# ---------------------------------------------------------------------------
# Finite-horizon value iteration with stage oracles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ValueIterationResult:
    policy: ProductPolicy
    q_table: DecomposedQTable
    values: np.ndarray        # (H+1, n, S)
    stage_gaps: np.ndarray    # (H, S) oracle eps per stage game
    gap_bound: float          # sum_h max_s eps_{h,s}


def value_iteration_ne(game: NetworkedMarkovGame, oracle: OracleConfig,
                       threads: int = 1) -> ValueIterationResult:
    """Backward induction: stage auxiliary games solved by the given oracle.

    Aggregating eps-approximate stage solutions gives a policy whose
    overall gap is at most sum_h max_s eps_{h,s}.
    """
    if not isinstance(game.horizon, Finite):
        raise ValueError("value_iteration_ne needs a finite-horizon game; "
                         "truncate a discounted game first")
    horizon = game.horizon.length
    n, num_states = game.num_players, game.num_states
    values = np.zeros((horizon + 1, n, num_states))
    stage_gaps = np.zeros((horizon, num_states))
    policy_stages: list[tuple] = [None] * horizon
    all_stage_tables: list[tuple] = [None] * horizon

    for h in range(horizon - 1, -1, -1):
        table = canonical_q(game, h, values[h + 1])
        all_stage_tables[h] = table.stage_tables[0]

        def solve_state(s: int):
            stage = PolymatrixGame(game.graph, game.action_counts,
                                   table.stage_tables[0][s], zero_sum=game.zero_sum)
            seed = int(np.random.SeedSequence(entropy=oracle.seed,
                                              spawn_key=(h, s)).generate_state(1)[0])
            cfg = OracleConfig(oracle.kind, oracle.tau, oracle.eta,
                               oracle.max_iters, seed, oracle.target_gap)
            try:
                return solve_matrix_game(stage, cfg)
            except Exception as err:
                raise RuntimeError(f"stage oracle failed at (h={h}, s={s}): {err}") from err

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                solved = list(pool.map(solve_state, range(num_states)))
        else:
            solved = [solve_state(s) for s in range(num_states)]

        per_state = []
        for s, (profile, report) in enumerate(solved):
            stage_gaps[h, s] = report.ne_gap
            per_state.append(tuple(profile))
            for i in range(n):
                v = 0.0
                for j in game.graph.neighbors(i):
                    v += profile[i] @ table.stage_tables[0][s][(i, j)] @ profile[j]
                values[h, i, s] = v
        policy_stages[h] = tuple(per_state)

    q_table = DecomposedQTable(tuple(all_stage_tables))
    bound = float(np.sum(np.max(stage_gaps, axis=1)))
    return ValueIterationResult(ProductPolicy(tuple(policy_stages)), q_table,
                                values, stage_gaps, bound)


# ---------------------------------------------------------------------------
# Exact gap evaluation
# ---------------------------------------------------------------------------

def _folded_reward(game: NetworkedMarkovGame, h: int, s: int, i: int,
                   profile) -> np.ndarray:
    """Player i's stage reward vector with opponents folded in, shape (A_i,)."""
    out = np.zeros(game.action_counts[i])
    rewards = game.stage_rewards(h)
    for j in game.graph.neighbors(i):
        out += rewards[(i, j)][s] @ profile[j]
    return out


def _folded_kernel(game: NetworkedMarkovGame, h: int, s: int, i: int,
                   profile) -> np.ndarray:
    """Transition rows for player i's actions with opponents folded, (A_i, S)."""
    dyn = game.stage_dynamics(h)
    a_i = game.action_counts[i]
    if isinstance(dyn, ConstantDynamics):
        return np.tile(dyn.table[s], (a_i, 1))
    out = np.zeros((a_i, game.num_states))
    for k, c in enumerate(dyn.controllers):
        w = dyn.weights[s, k]
        if w == 0.0:
            continue
        if c == i:
            out += w * dyn.kernels[c][s]
        else:
            out += w * np.tile(profile[c] @ dyn.kernels[c][s], (a_i, 1))
    return out


def _policy_values(game: NetworkedMarkovGame, policy: ProductPolicy,
                   pair_marginals=None) -> np.ndarray:
    """V^pi for all players/stages; finite-horizon backward induction.

    ``pair_marginals`` optionally overrides the on-policy pairwise action
    distributions (used to value correlated joints, whose state process
    under ensemble dynamics still only sees marginals).
    """
    horizon = game.horizon.length
    n, num_states = game.num_players, game.num_states
    values = np.zeros((horizon + 1, n, num_states))
    for h in range(horizon - 1, -1, -1):
        rewards = game.stage_rewards(h)
        dyn = game.stage_dynamics(h)
        for s in range(num_states):
            profile = policy.at(h, s)
            marg = {c: profile[c] for c in range(n)}
            p_next = dyn.folded(s, marg)
            for i in range(n):
                r = 0.0
                for j in game.graph.neighbors(i):
                    if pair_marginals is not None:
                        r += float(np.sum(pair_marginals(h, s, i, j) * rewards[(i, j)][s]))
                    else:
                        r += profile[i] @ rewards[(i, j)][s] @ profile[j]
                values[h, i, s] = r + p_next @ values[h + 1, i]
    return values


def _best_response_values(game: NetworkedMarkovGame, policy: ProductPolicy,
                          i: int) -> np.ndarray:
    """max over Markov deviations of player i's value, all stages/states."""
    horizon = game.horizon.length
    num_states = game.num_states
    best = np.zeros((horizon + 1, num_states))
    for h in range(horizon - 1, -1, -1):
        for s in range(num_states):
            profile = policy.at(h, s)
            r = _folded_reward(game, h, s, i, profile)
            kern = _folded_kernel(game, h, s, i, profile)
            best[h, s] = float(np.max(r + kern @ best[h + 1]))
    return best


@dataclass(frozen=True)
class MarkovGapReport:
    gap: float
    per_player_state: np.ndarray   # (n, S) deviation gain at the queried stage
    certified_error: float = 0.0


def _as_finite(game: NetworkedMarkovGame, horizon: int) -> NetworkedMarkovGame:
    """View a stationary discounted game as an H-stage game with the same
    stage data (discounting handled by the caller)."""
    return NetworkedMarkovGame(game.graph, game.num_states, game.action_counts,
                               Finite(horizon), tuple([game.rewards[0]] * horizon),
                               tuple([game.dynamics[0]] * horizon),
                               reward_bound=game.reward_bound, zero_sum=game.zero_sum)


def markov_ne_gap(game: NetworkedMarkovGame, policy: ProductPolicy,
                  h: int = 0, tol: float = 1e-10) -> MarkovGapReport:
    """Exact best-response gap of a product policy.

    Finite horizon: backward induction over the induced single-agent
    problem for every player (a deterministic Markov deviation attains the
    best response).  Discounted stationary: Bellman iteration to ``tol``
    with a certified error of residual/(1-gamma) reported.
    """
    n, num_states = game.num_players, game.num_states
    if isinstance(game.horizon, Finite):
        values = _policy_values(game, policy)
        per = np.zeros((n, num_states))
        for i in range(n):
            best = _best_response_values(game, policy, i)
            per[i] = best[h] - values[h, i]
        return MarkovGapReport(float(np.max(per)), per, 0.0)

    if not policy.is_stationary:
        raise ValueError("discounted games need a stationary policy")
    gamma = game.horizon.gamma
    v_pi = np.zeros((n, num_states))
    best = np.zeros((n, num_states))
    resid = np.inf
    rewards = game.stage_rewards(0)
    dyn = game.stage_dynamics(0)
    folded_r = np.zeros((n, num_states))
    folded_p = np.zeros((num_states, num_states))
    dev_r = {}
    dev_p = {}
    for s in range(num_states):
        profile = policy.at(0, s)
        folded_p[s] = dyn.folded(s, {c: profile[c] for c in range(n)})
        for i in range(n):
            folded_r[i, s] = sum(profile[i] @ rewards[(i, j)][s] @ profile[j]
                                 for j in game.graph.neighbors(i))
            dev_r[(i, s)] = _folded_reward(game, 0, s, i, profile)
            dev_p[(i, s)] = _folded_kernel(game, 0, s, i, profile)
    while resid > tol:
        v_new = folded_r + gamma * v_pi @ folded_p.T
        b_new = np.empty_like(best)
        for i in range(n):
            for s in range(num_states):
                b_new[i, s] = float(np.max(dev_r[(i, s)] + gamma * dev_p[(i, s)] @ best[i]))
        resid = max(float(np.max(np.abs(v_new - v_pi))),
                    float(np.max(np.abs(b_new - best))))
        v_pi, best = v_new, b_new
    certified = resid * gamma / (1.0 - gamma)
    per = best - v_pi
    return MarkovGapReport(float(np.max(per)), per, certified)


def markov_cce_gap(game: NetworkedMarkovGame, joint: MarkovJointPolicy) -> float:
    """Best fixed-deviation gain against a correlated Markov policy.

    Valid for ensemble or constant dynamics, where the state process under
    the joint policy depends on per-player marginals only and rewards need
    only pairwise marginals.
    """
    if any(not isinstance(d, (EnsembleDynamics, ConstantDynamics)) for d in game.dynamics):
        raise ValueError("CCE evaluation requires ensemble or constant dynamics")
    if not isinstance(game.horizon, Finite):
        raise ValueError("finite-horizon joints only")
    marginal = joint.marginal_policy()
    values = _policy_values(game, marginal,
                            pair_marginals=lambda h, s, i, j: joint.at(h, s).pair_marginal(i, j))
    worst = -np.inf
    for i in range(game.num_players):
        best = _best_response_values(game, marginal, i)
        worst = max(worst, float(np.max(best[0] - values[0, i])))
    return max(worst, 0.0)


@dataclass(frozen=True)
class MarkovMarginalization:
    policy: ProductPolicy
    eps_cce: float
    ne_bound: float
    visitation_error: float


def marginalize_markov(joint: MarkovJointPolicy, game: NetworkedMarkovGame) -> MarkovMarginalization:
    """Per-state marginalization of a correlated policy, with certificate.

    An eps-approximate Markov CCE marginalizes to a ((n+1) H eps)-
    approximate Markov NE (finite horizon; (n+1) eps/(1-gamma) when
    discounted).  The certificate also verifies that the joint and the
    marginalized product induce identical state kernels, which is what the
    ensemble structure guarantees.
    """
    for dyn in game.dynamics:
        if not isinstance(dyn, (EnsembleDynamics, ConstantDynamics)):
            raise ValueError("marginalization requires ensemble or constant dynamics; "
                             "the visitation identity does not hold otherwise")
    policy = joint.marginal_policy()
    n = game.num_players
    worst = 0.0
    for h in range(joint.num_stages):
        dyn = game.stage_dynamics(h)
        for s in range(game.num_states):
            mix = joint.at(h, s)
            joint_kernel = np.zeros(game.num_states)
            for w, comp in zip(mix.weights, mix.components):
                for a in itertools.product(*(range(c) for c in game.action_counts)):
                    prob = w
                    for i in range(n):
                        prob *= comp[i][a[i]]
                    if prob == 0.0:
                        continue
                    joint_kernel += prob * dyn.induced(s, a)
            marg_kernel = dyn.folded(s, {c: policy.at(h, s)[c] for c in range(n)})
            worst = max(worst, float(np.max(np.abs(joint_kernel - marg_kernel))))

    if isinstance(game.horizon, Finite):
        eps = markov_cce_gap(game, joint)
        bound = (n + 1) * game.horizon.length * eps
    else:
        eps = float("nan")  # stationary CCE gap evaluation not provided
        bound = float("nan")
    return MarkovMarginalization(policy, eps, bound, worst)


# ---------------------------------------------------------------------------
# Star-shaped infinite-horizon machinery
# ---------------------------------------------------------------------------

def _require_star(game: NetworkedMarkovGame) -> tuple[int, np.ndarray]:
    center = game.graph.star_center()
    if center is None:
        raise ValueError("star topology required (stationary equilibrium "
                         "computation is intractable otherwise)")
    if not isinstance(game.horizon, Discounted):
        raise ValueError("discounted horizon required")
    dyn = game.stage_dynamics(0)
    if not isinstance(dyn, EnsembleDynamics) or set(dyn.controllers) != {center}:
        raise ValueError("the star center must be the single controller")
    if float(np.max(np.abs(dyn.weights - 1.0))) > 1e-12:
        raise ValueError("single-controller weights must be identically 1")
    return center, dyn.kernels[center]


@dataclass(frozen=True)
class StarValueIterationResult:
    q_blocks: dict[int, np.ndarray]     # leaf j -> (S, A_c, A_j)
    policy: ProductPolicy               # stationary stage saddle per state
    center_values: np.ndarray           # (S,)
    distances: np.ndarray               # successive sweep distances
    sweeps: int


def star_value_iteration(game: NetworkedMarkovGame, tol: float = 1e-8,
                         max_sweeps: int = 10000, threads: int = 1) -> StarValueIterationResult:
    """Contracting maxmin value iteration for single-controller star games.

    Each sweep solves the per-state center-vs-team maxmin LP and rewrites
    the center's edge blocks with the discounted continuation; successive
    sweeps contract at rate gamma in the max-over-states block norm.
    """
    center, p1 = _require_star(game)
    gamma = game.horizon.gamma
    leaves = [j for j in range(game.num_players) if j != center]
    rewards = game.stage_rewards(0)
    num_states = game.num_states
    q = {j: np.zeros_like(rewards[(center, j)]) for j in leaves}
    share = 1.0 / (game.num_players - 1)

    distances = []
    v1 = np.zeros(num_states)
    for sweep in range(max_sweeps):
        def solve_state(s):
            return _val_center_primal([q[j][s] for j in leaves])

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                solved = list(pool.map(solve_state, range(num_states)))
        else:
            solved = [solve_state(s) for s in range(num_states)]
        for s in range(num_states):
            v1[s] = solved[s][0]
        dist = 0.0
        for s in range(num_states):
            cont = gamma * share * (p1[s] @ v1)  # (A_c,)
            step = 0.0
            for j in leaves:
                new = rewards[(center, j)][s] + cont[:, None]
                step += float(np.max(np.abs(new - q[j][s])))
                q[j][s] = new
            dist = max(dist, step)
        distances.append(dist)
        if dist <= tol:
            break
    else:
        raise RuntimeError(f"no fixed point to {tol} within {max_sweeps} sweeps "
                           f"(last distance {distances[-1]:.3g})")

    per_state = []
    for s in range(num_states):
        res = _val_center([q[j][s] for j in leaves])
        v1[s] = res.value
        profile: list[np.ndarray] = [None] * game.num_players
        profile[center] = res.maximizer[0]
        for m, j in enumerate(leaves):
            profile[j] = res.minimizer[m]
        per_state.append(tuple(profile))
    policy = ProductPolicy((tuple(per_state),))
    return StarValueIterationResult({j: q[j] for j in leaves}, policy, v1.copy(),
                                    np.asarray(distances), len(distances))


@dataclass(frozen=True)
class FPResult:
    snapshot_iters: np.ndarray
    vhat: np.ndarray            # (num_snaps, n, S), original player order
    sum_vhat: np.ndarray        # (num_snaps, S)
    beliefs: list[np.ndarray]   # per player (S, A_i)
    visits: np.ndarray
    q_center: dict[tuple[int, int], np.ndarray]
    q_leaf: dict[tuple[int, int], np.ndarray]
    final_state: int


def fp_markov(game: NetworkedMarkovGame, alpha: StepSchedule, beta: StepSchedule,
              iters: int, seed: int = 0, snapshot_stride: int = 1 << 12,
              explore: float = 0.0, q_init=None, start_state: int = 0) -> FPResult:
    """Coupled belief dynamics on a single-controller star game.

    Every player best-responds to policy beliefs under its payoff beliefs,
    beliefs update at the visited state on the alpha (policy) and beta
    (payoff) timescales, and the state moves under the center's kernel.
    ``explore`` mixes in a uniform restart to keep all states recurrent on
    non-ergodic instances (off by default).  Identical seed and
    configuration reproduce the trajectory bit for bit.
    """
    _check_two_timescale(alpha, beta)
    center, p1 = _require_star(game)
    if not (0.0 <= explore < 1.0):
        raise ValueError("explore must lie in [0, 1)")
    gamma = game.horizon.gamma
    n, num_states = game.num_players, game.num_states
    leaves = [j for j in range(n) if j != center]
    acts = np.array([game.action_counts[center]] + [game.action_counts[j] for j in leaves],
                    dtype=np.int64)
    a_max = int(acts.max())
    a_c = int(acts[0])
    rewards = game.stage_rewards(0)

    r_c = np.zeros((n - 1, num_states, a_c, a_max))
    r_o = np.zeros((n - 1, num_states, a_max, a_c))
    for m, j in enumerate(leaves):
        r_c[m, :, :, :game.action_counts[j]] = rewards[(center, j)]
        r_o[m, :, :game.action_counts[j], :] = rewards[(j, center)]

    qc = np.zeros_like(r_c)
    qo = np.zeros_like(r_o)
    if q_init is not None:
        qc_init, qo_init = q_init
        for m, j in enumerate(leaves):
            qc[m, :, :, :game.action_counts[j]] = qc_init[(center, j)]
            qo[m, :, :game.action_counts[j], :] = qo_init[(j, center)]

    ak, ap, at = alpha._core_args()
    bk, bp, bt = beta._core_args()
    snap_iters, snap_v, pi, visits, final_state = _fp_core.run(
        num_states, n, acts, r_c, r_o, np.ascontiguousarray(p1), gamma,
        ak, ap, at, bk, bp, bt,
        int(iters), int(seed), int(snapshot_stride), float(explore),
        int(start_state), qc, qo)

    # Map slot order back to original player indices.
    order = [center] + leaves
    vhat = np.zeros_like(snap_v)
    for slot, player in enumerate(order):
        vhat[:, player, :] = snap_v[:, slot, :]
    beliefs = [None] * n
    for slot, player in enumerate(order):
        beliefs[player] = pi[slot, :, :game.action_counts[player]].copy()
    q_center = {(center, j): qc[m, :, :, :game.action_counts[j]].copy()
                for m, j in enumerate(leaves)}
    q_leaf = {(j, center): qo[m, :, :game.action_counts[j], :].copy()
              for m, j in enumerate(leaves)}
    return FPResult(snap_iters, vhat, vhat.sum(axis=1), beliefs, visits,
                    q_center, q_leaf, int(final_state))
