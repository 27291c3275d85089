"""JSON game format and machine-readable result files.

The game schema covers both normal-form polymatrix games and networked
Markov games; outputs (policies, gap reports, trajectories) are plain
JSON/CSV written with stable key order so replaying a run reproduces the
bytes exactly.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Mapping

import numpy as np

from .games import (ConstantDynamics, DenseDynamics, Discounted,
                    EnsembleDynamics, Finite, InteractionGraph,
                    NetworkedMarkovGame, PolymatrixGame, ProductPolicy)

__all__ = [
    "game_to_dict",
    "game_from_dict",
    "load_game",
    "save_game",
    "policy_to_dict",
    "policy_from_dict",
    "write_json",
    "write_trajectory_csv",
    "write_gap_csv",
]


def _edge_key(i: int, j: int) -> str:
    return f"{i},{j}"


def _parse_edge(key: str) -> tuple[int, int]:
    a, b = key.split(",")
    return int(a), int(b)


def game_to_dict(game: PolymatrixGame | NetworkedMarkovGame) -> dict:
    if isinstance(game, PolymatrixGame):
        return {
            "players": game.num_players,
            "edges": [list(e) for e in sorted(game.graph.edges)],
            "action_counts": list(game.action_counts),
            "payoffs": {_edge_key(i, j): t.tolist() for (i, j), t in sorted(game.payoffs.items())},
            "zero_sum": game.zero_sum,
            "reward_bound": game.reward_bound,
        }
    horizon = ({"finite": game.horizon.length} if isinstance(game.horizon, Finite)
               else {"discounted": game.horizon.gamma})
    rewards = {str(h): {_edge_key(i, j): t.tolist() for (i, j), t in sorted(stage.items())}
               for h, stage in enumerate(game.rewards)}
    dynamics = {}
    for h, dyn in enumerate(game.dynamics):
        if isinstance(dyn, EnsembleDynamics):
            dynamics[str(h)] = {"ensemble": {
                "controllers": list(dyn.controllers),
                "weights": {str(s): dyn.weights[s].tolist() for s in range(dyn.num_states)},
                "kernels": {str(c): dyn.kernels[c].tolist() for c in dyn.controllers},
            }}
        elif isinstance(dyn, ConstantDynamics):
            dynamics[str(h)] = {"constant": {"table": dyn.table.tolist()}}
        else:
            dynamics[str(h)] = {"dense": {"kernel": dyn.kernel.tolist()}}
    return {
        "players": game.num_players,
        "edges": [list(e) for e in sorted(game.graph.edges)],
        "action_counts": list(game.action_counts),
        "num_states": game.num_states,
        "horizon": horizon,
        "rewards": rewards,
        "dynamics": dynamics,
        "zero_sum": game.zero_sum,
        "reward_bound": game.reward_bound,
    }


def _dynamics_from_dict(d: Mapping):
    if "ensemble" in d:
        e = d["ensemble"]
        controllers = tuple(int(c) for c in e["controllers"])
        states = sorted(e["weights"], key=int)
        weights = np.array([e["weights"][s] for s in states], dtype=float)
        kernels = {int(c): np.asarray(k, dtype=float) for c, k in e["kernels"].items()}
        return EnsembleDynamics(controllers, weights, kernels)
    if "constant" in d:
        return ConstantDynamics(np.asarray(d["constant"]["table"], dtype=float))
    if "dense" in d:
        return DenseDynamics(np.asarray(d["dense"]["kernel"], dtype=float))
    raise ValueError("dynamics entry must be 'ensemble', 'constant' or 'dense'")


def game_from_dict(data: Mapping) -> PolymatrixGame | NetworkedMarkovGame:
    n = int(data["players"])
    graph = InteractionGraph.from_pairs(n, data["edges"])
    action_counts = tuple(int(a) for a in data["action_counts"])
    zero_sum = bool(data.get("zero_sum", False))
    bound = data.get("reward_bound")
    if "num_states" not in data:
        payoffs = {_parse_edge(k): np.asarray(v, dtype=float)
                   for k, v in data["payoffs"].items()}
        return PolymatrixGame(graph, action_counts, payoffs,
                              reward_bound=bound, zero_sum=zero_sum)
    num_states = int(data["num_states"])
    hor = data["horizon"]
    horizon = Finite(int(hor["finite"])) if "finite" in hor else Discounted(float(hor["discounted"]))
    stage_keys = sorted(data["rewards"], key=int)
    rewards = tuple({_parse_edge(k): np.asarray(v, dtype=float)
                     for k, v in data["rewards"][h].items()} for h in stage_keys)
    dyn_keys = sorted(data["dynamics"], key=int)
    dynamics = tuple(_dynamics_from_dict(data["dynamics"][h]) for h in dyn_keys)
    return NetworkedMarkovGame(graph, num_states, action_counts, horizon,
                               rewards, dynamics, reward_bound=bound, zero_sum=zero_sum)


def load_game(path) -> PolymatrixGame | NetworkedMarkovGame:
    with open(path) as fh:
        return game_from_dict(json.load(fh))


def save_game(game, path) -> None:
    write_json(game_to_dict(game), path)


def write_json(data, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1, sort_keys=True)
        fh.write("\n")


def policy_to_dict(policy: ProductPolicy) -> dict:
    return {str(h): {str(s): {str(i): p.tolist() for i, p in enumerate(profile)}
                     for s, profile in enumerate(stage)}
            for h, stage in enumerate(policy.stages)}


def policy_from_dict(data: Mapping) -> ProductPolicy:
    stages = []
    for h in sorted(data, key=int):
        stage = data[h]
        per_state = []
        for s in sorted(stage, key=int):
            profile = stage[s]
            per_state.append(tuple(np.asarray(profile[i], dtype=float)
                                   for i in sorted(profile, key=int)))
        stages.append(tuple(per_state))
    return ProductPolicy(tuple(stages))


def write_trajectory_csv(path, iters, vhat, sum_vhat) -> None:
    """Rows (iter, state, player, Vhat, sumVhat) for star fictitious play."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iter", "state", "player", "vhat", "sum_vhat"])
        num_snaps, n, num_states = vhat.shape
        for k in range(num_snaps):
            for s in range(num_states):
                for i in range(n):
                    w.writerow([int(iters[k]), s, i, repr(float(vhat[k, i, s])),
                                repr(float(sum_vhat[k, s]))])


def write_gap_csv(path, rows) -> None:
    """Rows (iter, player, state, gap, qre_gap, payoff); None -> empty cell."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iter", "player", "state", "gap", "qre_gap", "payoff"])
        for row in rows:
            w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, float) else v)
                        for v in row])
