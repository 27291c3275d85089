import itertools

import numpy as np
import pytest

import nmgsolve as nm
from nmgsolve.games import DenseDynamics
from nmgsolve.generators import random_zero_sum_nmg, random_zero_sum_polymatrix

from conftest import brute_force_payoffs


def test_graph_basics():
    g = nm.InteractionGraph.complete(3)
    assert g.n_c == frozenset({0, 1, 2})
    star = nm.InteractionGraph.star(4, center=1)
    assert star.n_c == frozenset({1})
    assert star.star_center() == 1
    ring = nm.InteractionGraph.ring(4)
    assert ring.n_c == frozenset()
    assert ring.star_center() is None
    # two players: both are adjacent to everyone
    g2 = nm.InteractionGraph.from_pairs(2, [(0, 1)])
    assert g2.n_c == frozenset({0, 1})


def test_graph_rejects_disconnected_and_self_loops():
    with pytest.raises(ValueError):
        nm.InteractionGraph.from_pairs(4, [(0, 1), (2, 3)])
    with pytest.raises(ValueError):
        nm.InteractionGraph.from_pairs(2, [(0, 0)])
    with pytest.raises(ValueError):
        nm.InteractionGraph(1, frozenset())


def test_missing_direction_is_structural_error():
    mp = np.eye(2)
    g = nm.InteractionGraph.from_pairs(2, [(0, 1)])
    with pytest.raises(ValueError, match="missing payoff table"):
        nm.PolymatrixGame(g, (2, 2), {(0, 1): mp})


def test_validate_matching_pennies(matching_pennies):
    report = nm.validate_polymatrix(matching_pennies)
    assert report.ok
    assert report.zero_sum_method == "enumeration"
    assert report.max_zero_sum_violation <= 1e-12


def test_validate_paper_star_stage(paper_star_stage):
    assert nm.validate_polymatrix(paper_star_stage).ok


def test_zero_sum_violation_located():
    rng = np.random.default_rng(0)
    g = nm.InteractionGraph.complete(3)
    tabs = {}
    for (i, j) in [(0, 1), (0, 2), (1, 2)]:
        u = rng.uniform(size=(2, 2))
        tabs[(i, j)] = u
        tabs[(j, i)] = -u.T
    tabs[(1, 2)] = tabs[(1, 2)].copy()
    tabs[(1, 2)][0, 0] += 0.1
    game = nm.PolymatrixGame(g, (2, 2, 2), tabs, zero_sum=True)
    report = nm.validate_polymatrix(game)
    assert not report.ok
    assert report.max_zero_sum_violation == pytest.approx(0.1, abs=1e-12)
    # violating joint action has players 1 and 2 at action 0
    assert "(0, 0, 0)" in report.failures[0].location or \
           report.failures[0].location.startswith("joint action")


def test_pairwise_zero_sum_fallback(matching_pennies):
    report = nm.validate_polymatrix(matching_pennies, enumeration_cap=1)
    assert report.ok
    assert report.zero_sum_method == "pairwise"
    bad = nm.PolymatrixGame(matching_pennies.graph, (2, 2),
                            {(0, 1): np.eye(2), (1, 0): np.eye(2)}, zero_sum=True)
    report = nm.validate_polymatrix(bad, enumeration_cap=1)
    assert not report.ok


def test_expected_payoffs_paper_pure_profile(paper_star_stage):
    pure = [np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.array([1.0, 0.0])]
    np.testing.assert_allclose(nm.expected_payoffs(paper_star_stage, pure),
                               [6.0, -2.0, -4.0])


def test_expected_payoffs_uniform_pennies(matching_pennies):
    np.testing.assert_allclose(
        nm.expected_payoffs(matching_pennies, nm.uniform_profile((2, 2))), [0.0, 0.0])


def test_expected_payoffs_matches_joint_enumeration():
    rng = np.random.default_rng(3)
    graph = nm.InteractionGraph.ring(3)
    tabs = {}
    for (i, j) in sorted(graph.edges):
        tabs[(i, j)] = rng.normal(size=(2, 3))[:2, :2]
        tabs[(j, i)] = rng.normal(size=(2, 2))
    game = nm.PolymatrixGame(graph, (2, 2, 2), tabs)
    profile = []
    for a in game.action_counts:
        p = rng.uniform(size=a)
        profile.append(p / p.sum())
    np.testing.assert_allclose(nm.expected_payoffs(game, profile),
                               brute_force_payoffs(game, profile), atol=1e-12)


def test_zero_sum_payoffs_sum_to_zero():
    for seed in range(5):
        game = random_zero_sum_polymatrix(nm.InteractionGraph.complete(4),
                                          (2, 3, 2, 3), seed=seed)
        rng = np.random.default_rng(seed + 100)
        profile = []
        for a in game.action_counts:
            p = rng.uniform(size=a)
            profile.append(p / p.sum())
        assert abs(nm.expected_payoffs(game, profile).sum()) < 1e-9


def test_validate_nmg_paper_instance(fp_game):
    report = nm.validate_nmg(fp_game)
    assert report.ok


def test_validate_nmg_controller_membership():
    # ring graph has empty N_C, so any ensemble controller is inadmissible
    graph = nm.InteractionGraph.ring(4)
    acts = (2, 2, 2, 2)
    rng = np.random.default_rng(0)
    tabs = {}
    for (i, j) in graph.directed_edges():
        tabs[(i, j)] = np.zeros((2, 2, 2))
    kern = rng.uniform(size=(2, 2, 2)) + 0.1
    kern /= kern.sum(axis=2, keepdims=True)
    kern2 = rng.uniform(size=(2, 2, 2)) + 0.1
    kern2 /= kern2.sum(axis=2, keepdims=True)
    dyn = nm.EnsembleDynamics((0, 1), np.full((2, 2), 0.5) * np.array([[2 / 3, 4 / 3]]),
                              {0: kern, 1: kern2})
    game = nm.NetworkedMarkovGame(graph, 2, acts, nm.Discounted(0.9), (tabs,), (dyn,))
    report = nm.validate_nmg(game)
    assert any(f.name == "controllers" for f in report.failures)


def test_validate_nmg_row_sum_failure():
    graph = nm.InteractionGraph.from_pairs(2, [(0, 1)])
    tabs = {(0, 1): np.zeros((2, 2, 2)), (1, 0): np.zeros((2, 2, 2))}
    table = np.array([[0.5, 0.4], [0.5, 0.5]])  # first row sums to 0.9
    game = nm.NetworkedMarkovGame(graph, 2, (2, 2), nm.Discounted(0.9), (tabs,),
                                  (nm.ConstantDynamics(table),))
    report = nm.validate_nmg(game)
    fails = [f for f in report.failures if f.name == "stochasticity"]
    assert fails and "s=0" in fails[0].location
    assert fails[0].magnitude == pytest.approx(0.1)


def test_validate_nmg_rejects_nondecomposable_dense_kernel():
    # three states; leaving state 0 flips on the parity of a_1 a_2 a_3
    kern = np.zeros((3, 2, 2, 2, 3))
    for a in itertools.product(range(2), repeat=3):
        sgn = (-1) ** (a[0] * a[1] * a[2])
        kern[(0, *a, 1)] = 0.5 + 0.5 * sgn
        kern[(0, *a, 2)] = 0.5 - 0.5 * sgn
        kern[(1, *a, 1)] = 1.0
        kern[(2, *a, 2)] = 1.0
    graph = nm.InteractionGraph.complete(3)
    tabs = {e: np.zeros((3, 2, 2)) for e in graph.directed_edges()}
    game = nm.NetworkedMarkovGame(graph, 3, (2, 2, 2), nm.Discounted(0.5),
                                  (tabs,), (DenseDynamics(kern),))
    report = nm.validate_nmg(game)
    assert any(f.name == "transition_decomposability" for f in report.failures)


def test_ensemble_induced_kernel_is_stochastic():
    for seed in range(4):
        game = random_zero_sum_nmg(nm.InteractionGraph.complete(3), 3, (2, 2, 2),
                                   nm.Finite(2), seed=seed)
        dyn = game.stage_dynamics(0)
        for s in range(3):
            for joint in itertools.product(range(2), repeat=3):
                row = dyn.induced(s, joint)
                assert abs(row.sum() - 1.0) < 1e-12
                assert np.all(row >= -1e-12)


def test_auxiliary_game_zero_values_is_reward_stage(fp_game):
    games = nm.auxiliary_game(fp_game, 0, np.zeros((3, 2)))
    for s, stage in enumerate(games):
        for e, t in stage.payoffs.items():
            assert np.array_equal(t, fp_game.stage_rewards(0)[e][s])


def test_auxiliary_game_constant_values_star(fp_game):
    # values identically 1 with gamma: center gains gamma/(n-1) per edge,
    # leaves gain gamma on their single edge
    gamma = fp_game.horizon.gamma
    games = nm.auxiliary_game(fp_game, 0, np.ones((3, 2)))
    for s, stage in enumerate(games):
        r = fp_game.stage_rewards(0)
        np.testing.assert_allclose(stage.payoffs[(0, 1)],
                                   r[(0, 1)][s] + gamma / 2, atol=1e-12)
        np.testing.assert_allclose(stage.payoffs[(1, 0)],
                                   r[(1, 0)][s] + gamma, atol=1e-12)


def test_auxiliary_game_constant_dynamics_shift():
    graph = nm.InteractionGraph.ring(4)
    rng = np.random.default_rng(7)
    tabs = {e: rng.uniform(size=(2, 2, 2)) for e in graph.directed_edges()}
    table = rng.uniform(size=(2, 2)) + 0.1
    table /= table.sum(axis=1, keepdims=True)
    game = nm.NetworkedMarkovGame(graph, 2, (2, 2, 2, 2), nm.Discounted(0.5),
                                  (tabs,), (nm.ConstantDynamics(table),))
    values = rng.normal(size=(4, 2))
    games = nm.auxiliary_game(game, 0, values)
    for s in range(2):
        for (i, j) in graph.directed_edges():
            shift = 0.5 * float(table[s] @ values[i]) / len(graph.neighbors(i))
            np.testing.assert_allclose(games[s].payoffs[(i, j)],
                                       tabs[(i, j)][s] + shift, atol=1e-12)


def test_auxiliary_game_zero_sum_closure(fp_game):
    # values summing to zero per state keep the stage game zero-sum
    rng = np.random.default_rng(1)
    v = rng.normal(size=(3, 2))
    v[2] = -v[0] - v[1]
    for stage in nm.auxiliary_game(fp_game, 0, v):
        assert nm.validate_polymatrix(stage).ok


def test_joint_mixture_marginals():
    e0 = np.array([1.0, 0.0])
    e1 = np.array([0.0, 1.0])
    mix = nm.JointMixture(np.array([0.5, 0.5]), ((e0, e0), (e1, e1)))
    np.testing.assert_allclose(mix.marginal(0), [0.5, 0.5])
    pair = mix.pair_marginal(0, 1)
    np.testing.assert_allclose(pair, [[0.5, 0.0], [0.0, 0.5]])


def test_product_policy_validation():
    with pytest.raises(ValueError):
        nm.ProductPolicy((((np.array([0.6, 0.6]),),),))
