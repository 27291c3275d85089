"""Game generators: random zero-sum instances, the fashion game, and the
experiment families used by the reproduction runs.

All randomness flows through ``numpy.random.Generator`` seeded from a
single 64-bit seed; per-component streams are spawned from the seed so
repeated calls reproduce files byte for byte.
"""

from __future__ import annotations

import numpy as np

from .games import (Discounted, EnsembleDynamics, Finite, InteractionGraph,
                    NetworkedMarkovGame, PolymatrixGame)

__all__ = [
    "random_zero_sum_polymatrix",
    "random_zero_sum_nmg",
    "random_star_nmg",
    "fashion_game",
    "vi_experiment_instance",
    "fp_experiment_instance",
]


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


def _antisymmetric_tables(graph: InteractionGraph, action_counts, rng,
                          shape_prefix=()) -> dict:
    """Pairwise blocks r_{i,j} ~ U[0,1], r_{j,i} = -r_{i,j}^T: zero-sum by
    construction since each undirected pair cancels at every joint action."""
    tables = {}
    for (i, j) in sorted(graph.edges):
        t = rng.uniform(size=(*shape_prefix, action_counts[i], action_counts[j]))
        tables[(i, j)] = t
        tables[(j, i)] = -np.swapaxes(t, -1, -2)
    return tables


def random_zero_sum_polymatrix(graph: InteractionGraph, action_counts,
                               seed: int = 0) -> PolymatrixGame:
    rng = _rng(seed, 0)
    tables = _antisymmetric_tables(graph, action_counts, rng)
    return PolymatrixGame(graph, tuple(action_counts), tables, zero_sum=True)


def _random_kernel(rng, num_states: int, num_actions: int) -> np.ndarray:
    k = rng.uniform(size=(num_states, num_actions, num_states)) + 0.1
    return k / k.sum(axis=2, keepdims=True)


def random_zero_sum_nmg(graph: InteractionGraph, num_states: int, action_counts,
                        horizon, controllers=None, seed: int = 0) -> NetworkedMarkovGame:
    """Random zero-sum networked Markov game with a random ensemble.

    ``controllers`` defaults to the full admissible set (players adjacent
    to everyone); weights are drawn from a Dirichlet per state.
    """
    rng = _rng(seed, 1)
    n_c = sorted(graph.n_c)
    if controllers is None:
        controllers = n_c
    if set(controllers) - set(n_c):
        raise ValueError(f"controllers must lie in the fully connected set {n_c}")
    stages = horizon.length if isinstance(horizon, Finite) else 1
    rewards = tuple(
        _antisymmetric_tables(graph, action_counts, rng, shape_prefix=(num_states,))
        for _ in range(stages))
    dynamics = []
    for _ in range(stages):
        weights = rng.dirichlet(np.ones(len(controllers)), size=num_states)
        kernels = {c: _random_kernel(rng, num_states, action_counts[c]) for c in controllers}
        dynamics.append(EnsembleDynamics(tuple(controllers), weights, kernels))
    return NetworkedMarkovGame(graph, num_states, tuple(action_counts), horizon,
                               rewards, tuple(dynamics), zero_sum=True)


def random_star_nmg(num_players: int, num_states: int, num_actions: int,
                    gamma: float, seed: int = 0) -> NetworkedMarkovGame:
    """Star topology, single-controller (center) dynamics, zero-sum rewards."""
    rng = _rng(seed, 2)
    graph = InteractionGraph.star(num_players, center=0)
    action_counts = tuple([num_actions] * num_players)
    rewards = _antisymmetric_tables(graph, action_counts, rng, shape_prefix=(num_states,))
    kernel = _random_kernel(rng, num_states, num_actions)
    dyn = EnsembleDynamics((0,), np.ones((num_states, 1)), {0: kernel})
    return NetworkedMarkovGame(graph, num_states, action_counts, Discounted(gamma),
                               (rewards,), (dyn,), zero_sum=True)


def fashion_game(num_conformists: int, num_rebels: int, s_max: int,
                 gamma: float = 0.9, influencers=None, zero_sum: bool = False,
                 seed: int = 0) -> NetworkedMarkovGame:
    """Networked matching-pennies on a conformist/rebel bipartite graph.

    States track the fashion trend, clamped to [-s_max, s_max]; each step
    one influencer is picked uniformly and the trend drifts by that
    player's action (+-1).  Conformists earn 1/deg for matching the trend's
    sign plus 1 per matching neighbor; rebels the reverse.

    With ``zero_sum=True`` (bipartite graphs only) each rebel-side table is
    replaced by the zero-sum complement of the conformist table on its
    edge: the anti-coordination structure is preserved and the game sums
    to zero exactly.  The literal reward formulas are only constant-sum in
    the pairwise matching terms, so a plain offset cannot remove the trend
    terms; the complement construction is the canonical repair.
    """
    n = num_conformists + num_rebels
    conformists = list(range(num_conformists))
    rebels = list(range(num_conformists, n))
    pairs = [(c, r) for c in conformists for r in rebels]
    graph = InteractionGraph.from_pairs(n, pairs)
    if influencers is None:
        influencers = [0]
    # The payoff edges are bipartite; influencers must be adjacent to all
    # players for the drift to stay an admissible ensemble, so the payoff
    # graph is augmented with (zero-payoff) influencer edges.
    extra = [(c, j) for c in influencers for j in range(n) if j != c]
    full_graph = InteractionGraph.from_pairs(n, pairs + extra)

    num_states = 2 * s_max + 1
    action_counts = tuple([2] * n)  # action 0 -> -1 (light), 1 -> +1 (dark)
    act_val = np.array([-1, 1])

    def sgn(state_idx: int) -> int:
        return 1 if (state_idx - s_max) >= 0 else -1

    deg = {i: len(graph.neighbors(i)) for i in range(n)}
    tables = {}
    for (i, j) in full_graph.directed_edges():
        t = np.zeros((num_states, 2, 2))
        if (min(i, j), max(i, j)) in graph.edges:
            for s in range(num_states):
                for a_i in range(2):
                    for a_j in range(2):
                        if i in conformists:
                            t[s, a_i, a_j] = (sgn(s) == act_val[a_i]) / deg[i] \
                                + float(act_val[a_i] == act_val[a_j])
                        else:
                            t[s, a_i, a_j] = (sgn(s) != act_val[a_i]) / deg[i] \
                                + float(act_val[a_i] != act_val[a_j])
        tables[(i, j)] = t
    if zero_sum:
        if not (set(conformists) and set(rebels)):
            raise ValueError("zero-sum fashion requires a bipartite conformist/rebel graph")
        for (c, r) in pairs:
            tables[(r, c)] = -np.swapaxes(tables[(c, r)], -1, -2)

    kernels = {}
    for c in influencers:
        k = np.zeros((num_states, 2, num_states))
        for s in range(num_states):
            for a in range(2):
                nxt = int(np.clip(s + act_val[a], 0, num_states - 1))
                k[s, a, nxt] = 1.0
        kernels[c] = k
    weights = np.full((num_states, len(influencers)), 1.0 / len(influencers))
    dyn = EnsembleDynamics(tuple(influencers), weights, kernels)
    return NetworkedMarkovGame(full_graph, num_states, action_counts,
                               Discounted(gamma), (tables,), (dyn,),
                               zero_sum=zero_sum)


def vi_experiment_instance(seed: int = 0, horizon: int = 5) -> NetworkedMarkovGame:
    """The finite-horizon value-iteration experiment family.

    Three players on a triangle, two states, two actions, ensemble weights
    (0, 1/3, 2/3) over all three players; the two controller kernels share
    their random entries across the state/action diagonal and the stage
    rewards are random zero-sum blocks.
    """
    rng = _rng(seed, 3)
    graph = InteractionGraph.complete(3)
    action_counts = (2, 2, 2)
    num_states = 2
    p_a = rng.uniform()
    p_b = rng.uniform()
    kern = np.zeros((2, 2, 2))
    kern[0, 1, 0] = kern[1, 0, 0] = p_a
    kern[0, 1, 1] = kern[1, 0, 1] = 1.0 - p_a
    kern[1, 1, 0] = kern[0, 0, 0] = p_b
    kern[1, 1, 1] = kern[0, 0, 1] = 1.0 - p_b
    weights = np.tile(np.array([0.0, 1.0 / 3.0, 2.0 / 3.0]), (num_states, 1))
    kernels = {0: kern.copy(), 1: kern.copy(), 2: kern.copy()}
    dyn = EnsembleDynamics((0, 1, 2), weights, kernels)
    rewards = tuple(
        _antisymmetric_tables(graph, action_counts, rng, shape_prefix=(num_states,))
        for _ in range(horizon))
    return NetworkedMarkovGame(graph, num_states, action_counts, Finite(horizon),
                               rewards, tuple([dyn] * horizon), zero_sum=True)


def fp_experiment_instance() -> NetworkedMarkovGame:
    """The star fictitious-play experiment: fixed matrices, gamma = 0.99."""
    r01 = np.stack([np.array([[1.0, 2.0], [4.0, 3.0]]),
                    np.array([[4.0, 3.0], [2.0, 1.0]])])
    r02 = np.stack([np.array([[4.0, 3.0], [2.0, 1.0]]),
                    np.array([[1.0, 2.0], [4.0, 3.0]])])
    graph = InteractionGraph.star(3, center=0)
    rewards = {(0, 1): r01, (1, 0): -np.swapaxes(r01, -1, -2),
               (0, 2): r02, (2, 0): -np.swapaxes(r02, -1, -2)}
    kernel = np.zeros((2, 2, 2))
    kernel[0, 0] = [0.2, 0.8]
    kernel[0, 1] = [0.8, 0.2]
    kernel[1, 0] = [0.8, 0.2]
    kernel[1, 1] = [0.2, 0.8]
    dyn = EnsembleDynamics((0,), np.ones((2, 1)), {0: kernel})
    return NetworkedMarkovGame(graph, 2, (2, 2, 2), Discounted(0.99),
                               (rewards,), (dyn,), zero_sum=True)
