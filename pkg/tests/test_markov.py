import itertools
import math

import numpy as np
import pytest

import nmgsolve as nm
from nmgsolve.decomposition import canonical_q
from nmgsolve.games import Finite, MarkovJointPolicy, ProductPolicy
from nmgsolve.markov import (StepSchedule, _val_center, markov_cce_gap,
                             val_operators)
from nmgsolve.generators import (fp_experiment_instance, random_star_nmg,
                                 random_zero_sum_nmg, vi_experiment_instance)

from conftest import random_triangle


# ---------------------------------------------------------------------------
# truncation
# ---------------------------------------------------------------------------

def test_truncate_horizon_paper_values():
    assert nm.truncate_horizon(0.99, 0.01, 1.0) == 461
    assert nm.truncate_horizon(0.5, 1.0, 1.0) == 1
    assert nm.truncate_horizon(0.5, 0.1, 1.0) == 5


def test_truncate_horizon_rejects_bad_inputs():
    with pytest.raises(ValueError):
        nm.truncate_horizon(1.0, 0.1, 1.0)
    with pytest.raises(ValueError):
        nm.truncate_horizon(0.9, -1.0, 1.0)


# ---------------------------------------------------------------------------
# step schedules
# ---------------------------------------------------------------------------

def test_step_schedule_kinds():
    assert StepSchedule.power(0.55)(1) == 1.0
    assert StepSchedule.power(0.55)(32) == pytest.approx(32 ** -0.55)
    assert StepSchedule.harmonic()(4) == 0.25
    sched = StepSchedule.custom([0.5, 0.25])
    assert sched(1) == 0.5 and sched(2) == 0.25 and sched(10) == 0.25
    with pytest.raises(ValueError):
        StepSchedule.power(1.5)  # steps would be summable


def test_two_timescale_validation(fp_game):
    with pytest.raises(ValueError, match="slower"):
        nm.fp_markov(fp_game, StepSchedule.power(0.75), StepSchedule.power(0.55), 10)


# ---------------------------------------------------------------------------
# val operators
# ---------------------------------------------------------------------------

def test_val_operators_pennies_plus_zero():
    mp = np.array([[1.0, -1.0], [-1.0, 1.0]])
    center, team = val_operators([mp, np.zeros((2, 2))])
    assert center.value == pytest.approx(0.0, abs=1e-9)
    np.testing.assert_allclose(center.maximizer[0], [0.5, 0.5], atol=1e-9)
    assert center.value + team.value == pytest.approx(0.0, abs=1e-9)


def test_val_center_matches_simplex_grid():
    rng = np.random.default_rng(0)
    for _ in range(5):
        blocks = [rng.normal(size=(2, 3)), rng.normal(size=(2, 2))]
        res = _val_center(blocks)
        grid = np.linspace(0.0, 1.0, 201)
        best = -np.inf
        for p in grid:
            mu = np.array([p, 1.0 - p])
            val = sum(float(np.min(mu @ b)) for b in blocks)
            best = max(best, val)
        # the LP dominates the grid; the grid undershoots by at most the
        # objective's Lipschitz constant times the grid spacing
        lipschitz = sum(float(np.max(np.abs(b))) for b in blocks) * 2.0
        assert best - 1e-9 <= res.value <= best + lipschitz / 200.0
        # reported saddle: maximizer value against reported minimizers matches
        attained = sum(float(res.maximizer[0] @ b @ m)
                       for b, m in zip(blocks, res.minimizer))
        assert attained == pytest.approx(res.value, abs=1e-9)


def test_val_scaling_property():
    rng = np.random.default_rng(1)
    blocks = [rng.normal(size=(3, 2)), rng.normal(size=(3, 3))]
    base = _val_center(blocks)
    scaled = _val_center([4.0 * b for b in blocks])
    assert scaled.value == pytest.approx(4.0 * base.value, abs=1e-8)
    support_a = set(np.flatnonzero(base.maximizer[0] > 1e-8))
    support_b = set(np.flatnonzero(scaled.maximizer[0] > 1e-8))
    assert support_a == support_b


def test_val_duality_on_negated_transpose():
    rng = np.random.default_rng(2)
    for _ in range(5):
        blocks = [rng.normal(size=(2, 2)), rng.normal(size=(2, 4))]
        center, team = val_operators(blocks)
        assert center.value + team.value == pytest.approx(0.0, abs=1e-8)


# ---------------------------------------------------------------------------
# value iteration with oracles
# ---------------------------------------------------------------------------

def test_vi_single_stage_reduces_to_matrix_solve():
    game = random_zero_sum_nmg(nm.InteractionGraph.complete(3), 2, (2, 2, 2),
                               Finite(1), seed=0)
    res = nm.value_iteration_ne(game, nm.OracleConfig("lp"))
    gap = nm.markov_ne_gap(game, res.policy)
    worst_stage = 0.0
    for s in range(2):
        stage = game.stage_game(0, s)
        sol = nm.ne_lp(stage)
        worst_stage = max(worst_stage, nm.matrix_ne_gap(stage, sol.profile).ne_gap)
    assert gap.gap <= max(worst_stage, 1e-9) + 1e-9


def test_vi_lp_oracle_prop4_bound():
    for seed in range(5):
        game = random_zero_sum_nmg(nm.InteractionGraph.complete(3), 2, (2, 2, 2),
                                   Finite(3), seed=seed)
        res = nm.value_iteration_ne(game, nm.OracleConfig("lp"))
        gap = nm.markov_ne_gap(game, res.policy)
        assert gap.gap <= res.gap_bound + 1e-6


def test_vi_stage_games_stay_zero_sum_and_bounded():
    game = vi_experiment_instance(seed=1)
    res = nm.value_iteration_ne(game, nm.OracleConfig("lp"))
    horizon = game.horizon.length
    assert float(np.max(np.abs(res.values.sum(axis=1)))) <= 1e-8
    for h in range(horizon):
        bound = (horizon - h) * game.reward_bound
        for s in range(game.num_states):
            stage = nm.PolymatrixGame(game.graph, game.action_counts,
                                      res.q_table.stage_tables[h][s], zero_sum=True)
            assert nm.validate_polymatrix(stage, tol=1e-8).ok
            for t in res.q_table.stage_tables[h][s].values():
                assert float(np.max(np.abs(t))) <= bound + 1e-9


def test_vi_threaded_matches_sequential():
    game = vi_experiment_instance(seed=2, horizon=3)
    a = nm.value_iteration_ne(game, nm.OracleConfig("lp"), threads=1)
    b = nm.value_iteration_ne(game, nm.OracleConfig("lp"), threads=4)
    np.testing.assert_array_equal(a.values, b.values)
    np.testing.assert_array_equal(a.stage_gaps, b.stage_gaps)


def test_vi_rejects_discounted_games(fp_game):
    with pytest.raises(ValueError, match="finite-horizon"):
        nm.value_iteration_ne(fp_game, nm.OracleConfig("lp"))


# ---------------------------------------------------------------------------
# exact gap evaluation
# ---------------------------------------------------------------------------

def _enumerate_deterministic_deviation_gap(game, policy, player):
    """Brute force: best deterministic Markov deviation via enumeration."""
    horizon = game.horizon.length
    num_states = game.num_states
    acts = game.action_counts[player]
    best = -np.inf
    choices = list(itertools.product(range(acts), repeat=horizon * num_states))
    for choice in choices:
        table = np.array(choice).reshape(horizon, num_states)
        v = np.zeros(num_states)
        for h in range(horizon - 1, -1, -1):
            new_v = np.zeros(num_states)
            for s in range(num_states):
                profile = list(policy.at(h, s))
                dev = np.zeros(acts)
                dev[table[h, s]] = 1.0
                profile[player] = dev
                r = 0.0
                for j in game.graph.neighbors(player):
                    r += dev @ game.stage_rewards(h)[(player, j)][s] @ profile[j]
                marg = {c: profile[c] for c in range(game.num_players)}
                p_next = game.stage_dynamics(h).folded(s, marg)
                new_v[s] = r + p_next @ v
            v = new_v
        best = max(best, float(np.max(v - _policy_value_at(game, policy, player))))
    return best


def _policy_value_at(game, policy, player):
    from nmgsolve.markov import _policy_values
    return _policy_values(game, policy)[0, player]


def test_markov_gap_zero_at_single_stage_equilibrium():
    game = random_zero_sum_nmg(nm.InteractionGraph.complete(3), 2, (2, 2, 2),
                               Finite(1), seed=3)
    res = nm.value_iteration_ne(game, nm.OracleConfig("lp"))
    assert nm.markov_ne_gap(game, res.policy).gap <= 1e-8


def test_markov_gap_matches_deviation_enumeration():
    game = vi_experiment_instance(seed=4, horizon=2)
    policy = ProductPolicy.uniform(game)
    report = nm.markov_ne_gap(game, policy)
    worst = max(_enumerate_deterministic_deviation_gap(game, policy, i)
                for i in range(3))
    assert report.gap == pytest.approx(worst, abs=1e-9)


def test_markov_gap_discounted_certified(fp_game):
    policy = ProductPolicy.uniform(fp_game)
    report = nm.markov_ne_gap(fp_game, policy, tol=1e-10)
    assert report.certified_error <= 1e-7
    assert report.gap > 0  # uniform is not an equilibrium here


# ---------------------------------------------------------------------------
# marginalization
# ---------------------------------------------------------------------------

def _random_joint(game, rng, mixture_size=2):
    stages = []
    for h in range(game.horizon.length):
        per_state = []
        for s in range(game.num_states):
            comps = []
            for _ in range(mixture_size):
                comps.append(tuple(rng.dirichlet(np.ones(a)) for a in game.action_counts))
            w = rng.dirichlet(np.ones(mixture_size))
            per_state.append(nm.JointMixture(w, tuple(comps)))
        stages.append(tuple(per_state))
    return MarkovJointPolicy(tuple(stages))


def test_marginalize_markov_product_unchanged():
    game = vi_experiment_instance(seed=5, horizon=2)
    rng = np.random.default_rng(0)
    stages = tuple(
        tuple(nm.JointMixture.single(tuple(rng.dirichlet(np.ones(a))
                                           for a in game.action_counts))
              for _ in range(game.num_states))
        for _ in range(game.horizon.length))
    joint = MarkovJointPolicy(stages)
    res = nm.marginalize_markov(joint, game)
    for h in range(2):
        for s in range(2):
            for i in range(3):
                np.testing.assert_array_equal(res.policy.at(h, s)[i],
                                              joint.at(h, s).components[0][i])
    assert res.visitation_error <= 1e-15


def test_marginalize_markov_visitation_identity():
    rng = np.random.default_rng(1)
    for seed in range(5):
        game = random_zero_sum_nmg(nm.InteractionGraph.complete(3), 3, (2, 2, 2),
                                   Finite(2), seed=seed)
        joint = _random_joint(game, rng, mixture_size=3)
        res = nm.marginalize_markov(joint, game)
        assert res.visitation_error <= 1e-12


def test_marginalize_markov_single_controller_tight():
    game = fp_experiment_instance()
    finite = nm.NetworkedMarkovGame(game.graph, 2, (2, 2, 2), Finite(2),
                                    (game.rewards[0],) * 2, (game.dynamics[0],) * 2,
                                    zero_sum=True)
    rng = np.random.default_rng(2)
    joint = _random_joint(finite, rng, mixture_size=2)
    res = nm.marginalize_markov(joint, finite)
    assert res.visitation_error <= 1e-15


def test_marginalize_markov_cce_bound():
    game = vi_experiment_instance(seed=6, horizon=2)
    rng = np.random.default_rng(3)
    joint = _random_joint(game, rng)
    res = nm.marginalize_markov(joint, game)
    gap = nm.markov_ne_gap(game, res.policy).gap
    n, horizon = 3, 2
    assert gap <= (n + 1) * horizon * res.eps_cce + 1e-9


def test_marginalize_markov_refuses_dense():
    from nmgsolve.games import DenseDynamics
    graph = nm.InteractionGraph.complete(3)
    tabs = {e: np.zeros((1, 2, 2)) for e in graph.directed_edges()}
    kern = np.full((1, 2, 2, 2, 1), 1.0)
    game = nm.NetworkedMarkovGame(graph, 1, (2, 2, 2), Finite(1), (tabs,),
                                  (DenseDynamics(kern),))
    rng = np.random.default_rng(4)
    joint = MarkovJointPolicy(((nm.JointMixture(
        np.array([1.0]), ((rng.dirichlet(np.ones(2)),) * 3,)),),))
    with pytest.raises(ValueError, match="ensemble or constant"):
        nm.marginalize_markov(joint, game)


# ---------------------------------------------------------------------------
# star value iteration
# ---------------------------------------------------------------------------

def test_star_vi_tiny_gamma_is_stage_maxmin():
    game = random_star_nmg(3, 2, 2, gamma=1e-10, seed=0)
    res = nm.star_value_iteration(game, tol=1e-12)
    rewards = game.stage_rewards(0)
    for s in range(2):
        stage_val = _val_center([rewards[(0, j)][s] for j in (1, 2)]).value
        assert res.center_values[s] == pytest.approx(stage_val, abs=1e-8)


def test_star_vi_pennies_fixed_point():
    mp = np.array([[1.0, -1.0], [-1.0, 1.0]])
    graph = nm.InteractionGraph.star(3, center=0)
    rewards = {(0, 1): np.stack([mp, mp]), (1, 0): np.stack([-mp.T, -mp.T]),
               (0, 2): np.zeros((2, 2, 2)), (2, 0): np.zeros((2, 2, 2))}
    kern = np.full((2, 2, 2), 0.5)
    dyn = nm.EnsembleDynamics((0,), np.ones((2, 1)), {0: kern})
    game = nm.NetworkedMarkovGame(graph, 2, (2, 2, 2), nm.Discounted(0.5),
                                  rewards=(rewards,), dynamics=(dyn,), zero_sum=True)
    res = nm.star_value_iteration(game, tol=1e-10)
    np.testing.assert_allclose(res.center_values, 0.0, atol=1e-8)
    np.testing.assert_allclose(res.policy.at(0, 0)[0], [0.5, 0.5], atol=1e-8)


def test_star_vi_contraction_and_gap():
    for seed in range(3):
        game = random_star_nmg(3, 2, 2, gamma=0.9, seed=seed)
        res = nm.star_value_iteration(game, tol=1e-8)
        d = res.distances
        ratios = d[1:] / d[:-1]
        assert np.all(ratios <= 0.9 + 1e-6)
        gap = nm.markov_ne_gap(game, res.policy)
        assert gap.gap <= 3 * 1e-8 / (1.0 - 0.9)


def test_star_vi_rejects_triangle():
    game = random_zero_sum_nmg(nm.InteractionGraph.complete(3), 2, (2, 2, 2),
                               nm.Discounted(0.9), seed=0)
    with pytest.raises(ValueError, match="star"):
        nm.star_value_iteration(game)


def test_contraction_property_random_block_pairs():
    # one applied sweep contracts block distances by gamma
    rng = np.random.default_rng(5)
    game = random_star_nmg(3, 2, 2, gamma=0.9, seed=9)
    rewards = game.stage_rewards(0)
    p1 = game.stage_dynamics(0).kernels[0]
    gamma = 0.9

    def sweep(q):
        v = np.array([_val_center([q[j][s] for j in (1, 2)]).value for s in range(2)])
        out = {}
        for j in (1, 2):
            out[j] = np.stack([rewards[(0, j)][s] + gamma / 2 * (p1[s] @ v)[:, None]
                               for s in range(2)])
        return out

    def dist(qa, qb):
        return max(sum(float(np.max(np.abs(qa[j][s] - qb[j][s]))) for j in (1, 2))
                   for s in range(2))

    for _ in range(5):
        qa = {j: rng.normal(size=(2, 2, 2)) for j in (1, 2)}
        qb = {j: rng.normal(size=(2, 2, 2)) for j in (1, 2)}
        assert dist(sweep(qa), sweep(qb)) <= gamma * dist(qa, qb) + 1e-9


# ---------------------------------------------------------------------------
# star fictitious play
# ---------------------------------------------------------------------------

def test_fp_markov_deterministic(fp_game):
    a = nm.fp_markov(fp_game, StepSchedule.power(0.55), StepSchedule.power(0.75),
                     5000, seed=42, snapshot_stride=512)
    b = nm.fp_markov(fp_game, StepSchedule.power(0.55), StepSchedule.power(0.75),
                     5000, seed=42, snapshot_stride=512)
    np.testing.assert_array_equal(a.vhat, b.vhat)
    np.testing.assert_array_equal(a.visits, b.visits)
    for x, y in zip(a.beliefs, b.beliefs):
        np.testing.assert_array_equal(x, y)


def test_fp_markov_seed_changes_trajectory(fp_game):
    a = nm.fp_markov(fp_game, StepSchedule.power(0.55), StepSchedule.power(0.75),
                     5000, seed=1)
    b = nm.fp_markov(fp_game, StepSchedule.power(0.55), StepSchedule.power(0.75),
                     5000, seed=2)
    assert not np.array_equal(a.visits, b.visits)


def test_fp_markov_single_state_tracks_matrix_fp():
    # with one state, the stage game's continuation shifts only the center's
    # columns uniformly, so beliefs should track matrix fictitious play
    rng = np.random.default_rng(3)
    block = np.array([[3.0, -1.0], [-2.0, 4.0]])
    graph = nm.InteractionGraph.star(3, center=0)
    rewards = {(0, 1): block[None], (1, 0): -block.T[None],
               (0, 2): 2.0 * block[None], (2, 0): -2.0 * block.T[None]}
    dyn = nm.EnsembleDynamics((0,), np.ones((1, 1)), {0: np.ones((1, 2, 1))})
    game = nm.NetworkedMarkovGame(graph, 1, (2, 2, 2), nm.Discounted(0.5),
                                  (rewards,), (dyn,), zero_sum=True)
    beta = StepSchedule.custom([1.0 / (k + 1) ** 0.9 for k in range(1, 3 * 10**5 + 2)])
    res = nm.fp_markov(game, StepSchedule.harmonic(), beta, 3 * 10**5, seed=0)
    stage = game.stage_game(0, 0)
    mat = nm.fp_matrix(stage, 3 * 10**5)
    for i in range(3):
        np.testing.assert_allclose(res.beliefs[i][0], mat.last[i], atol=0.05)


def test_fp_markov_frozen_q_reaches_stage_equilibrium(fp_game):
    # beta = 0 freezes the payoff beliefs; play becomes per-state matrix
    # fictitious play on those frozen stage games
    rng = np.random.default_rng(0)
    q_init_c = {}
    q_init_o = {}
    stage_blocks = {}
    for j in (1, 2):
        t = rng.uniform(size=(2, 2, 2))
        q_init_c[(0, j)] = t
        q_init_o[(j, 0)] = -np.swapaxes(t, -1, -2)
        stage_blocks[j] = t
    res = nm.fp_markov(fp_game, StepSchedule.power(0.55), StepSchedule.custom([0.0]),
                       2 * 10**5, seed=0, explore=0.05,
                       q_init=(q_init_c, q_init_o))
    for s in range(2):
        stage = nm.PolymatrixGame(fp_game.graph, (2, 2, 2),
                                  {(0, 1): stage_blocks[1][s], (1, 0): -stage_blocks[1][s].T,
                                   (0, 2): stage_blocks[2][s], (2, 0): -stage_blocks[2][s].T},
                                  zero_sum=True)
        profile = [res.beliefs[i][s] for i in range(3)]
        assert nm.matrix_ne_gap(stage, profile).ne_gap < 0.05


def test_fp_markov_explore_bounds(fp_game):
    with pytest.raises(ValueError):
        nm.fp_markov(fp_game, StepSchedule.power(0.55), StepSchedule.power(0.75),
                     10, explore=1.5)


def test_fp_markov_rejects_non_star():
    game = random_zero_sum_nmg(nm.InteractionGraph.complete(3), 2, (2, 2, 2),
                               nm.Discounted(0.9), seed=0)
    with pytest.raises(ValueError, match="star"):
        nm.fp_markov(game, StepSchedule.power(0.55), StepSchedule.power(0.75), 10)
