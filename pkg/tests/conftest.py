import itertools

import numpy as np
import pytest

import nmgsolve as nm
from nmgsolve.generators import fp_experiment_instance, random_zero_sum_polymatrix


@pytest.fixture
def matching_pennies():
    mp = np.array([[1.0, -1.0], [-1.0, 1.0]])
    graph = nm.InteractionGraph.from_pairs(2, [(0, 1)])
    return nm.PolymatrixGame(graph, (2, 2), {(0, 1): mp, (1, 0): -mp.T}, zero_sum=True)


@pytest.fixture
def paper_star_stage():
    """State-0 stage game of the fictitious-play experiment instance."""
    r01 = np.array([[1.0, 2.0], [4.0, 3.0]])
    r02 = np.array([[4.0, 3.0], [2.0, 1.0]])
    graph = nm.InteractionGraph.star(3, center=0)
    return nm.PolymatrixGame(graph, (2, 2, 2),
                             {(0, 1): r01, (1, 0): -r01.T,
                              (0, 2): r02, (2, 0): -r02.T}, zero_sum=True)


@pytest.fixture
def fp_game():
    return fp_experiment_instance()


def random_triangle(seed, actions=(2, 2, 2)):
    return random_zero_sum_polymatrix(nm.InteractionGraph.complete(3), actions, seed=seed)


def brute_force_payoffs(game, profile):
    """Full joint-action enumeration of expected payoffs."""
    n = game.num_players
    out = np.zeros(n)
    for joint in itertools.product(*(range(a) for a in game.action_counts)):
        prob = 1.0
        for i in range(n):
            prob *= profile[i][joint[i]]
        if prob:
            out += prob * game.joint_rewards(joint)
    return out


def brute_force_ne_gap(game, profile):
    """Gap via joint enumeration of every pure deviation."""
    base = brute_force_payoffs(game, profile)
    worst = -np.inf
    for i in range(game.num_players):
        for a in range(game.action_counts[i]):
            dev = [p.copy() for p in profile]
            dev[i] = np.zeros(game.action_counts[i])
            dev[i][a] = 1.0
            worst = max(worst, brute_force_payoffs(game, dev)[i] - base[i])
    return max(worst, 0.0)
