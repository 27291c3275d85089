"""Command-line front end: validation, solving, dynamics and generators.

Subcommands write machine-readable JSON/CSV only.  Exit codes: 0 success,
1 domain failure (invalid game, unsupported topology), 2 usage or parse
error.  All randomness descends from one 64-bit seed through splitmix-based
``numpy.random.SeedSequence`` streams, so replaying a command reproduces
the policy/gap/trajectory files byte for byte (the run summary additionally
records wall time, which is excluded from that guarantee).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict

import numpy as np

from . import generators, io
from .games import (Discounted, Finite, NetworkedMarkovGame, PolymatrixGame,
                    validate_nmg, validate_polymatrix)
from .markov import (StepSchedule, fp_markov, markov_ne_gap,
                     star_value_iteration, truncate_horizon, value_iteration_ne)
from .polymatrix import ORACLE_KINDS, OracleConfig, matrix_ne_gap, solve_matrix_game

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("NMG_SOLVE_THREADS")
    return max(1, int(env)) if env else 1


def _load(path: str):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError:
        print(f"error: no such file: {path}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)
    except json.JSONDecodeError as err:
        print(f"error: {path}: invalid JSON at line {err.lineno}, column {err.colno}: "
              f"{err.msg}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)
    try:
        return io.game_from_dict(data)
    except (KeyError, ValueError, TypeError) as err:
        print(f"error: {path}: not a valid game description: {err}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _report_dict(report) -> dict:
    return {
        "ok": report.ok,
        "zero_sum_method": report.zero_sum_method,
        "max_zero_sum_violation": report.max_zero_sum_violation,
        "failures": [asdict(f) for f in report.failures],
        "notes": list(report.notes),
    }


def cmd_validate(args) -> int:
    game = _load(args.game)
    if isinstance(game, PolymatrixGame):
        report = validate_polymatrix(game, tol=args.tol)
    else:
        report = validate_nmg(game, tol=args.tol)
    data = _report_dict(report)
    # Optional raw-reward block: per-player dense tensors checked for
    # pairwise decomposability over the declared graph.
    with open(args.game) as fh:
        raw = json.load(fh)
    if "dense_rewards" in raw:
        from .decomposition import check_reward_structure
        dense = [np.asarray(t, dtype=float) for t in raw["dense_rewards"]]
        try:
            result = check_reward_structure(dense, game.graph, tol=args.tol)
        except ValueError as err:
            print(f"error: dense_rewards: {err}", file=sys.stderr)
            return EXIT_USAGE
        data["dense_rewards_decomposable"] = result["ok"]
        if not result["ok"]:
            bad = sorted(k for k, v in result["reports"].items() if not v.decomposable)
            data["failures"].append({
                "name": "reward_decomposability",
                "location": f"(player, state, action) {bad[0]}",
                "magnitude": result["reports"][bad[0]].max_residual,
                "message": f"{len(bad)} slices are not pairwise decomposable"})
            data["ok"] = False
    out = args.out or (os.path.splitext(args.game)[0] + ".report.json")
    io.write_json(data, out)
    for f in data["failures"]:
        mag = f.get("magnitude")
        print(f"invalid: {f['name']} at {f['location']}"
              + (f" (magnitude {mag:.3g})" if mag is not None else ""),
              file=sys.stderr)
    print(f"report written to {out}")
    return EXIT_OK if data["ok"] else EXIT_DOMAIN


def _oracle_from_args(args) -> OracleConfig:
    return OracleConfig(args.oracle, tau=args.tau, eta=args.eta,
                        max_iters=args.iters, seed=args.seed,
                        target_gap=args.target_gap)


def _matrix_snapshots(game, oracle: OracleConfig, stride: int):
    """Policy snapshots at a stride, for the iterative matrix dynamics."""
    from . import polymatrix as pm
    if oracle.kind == "mwu_fixed":
        traj = pm.mwu_fixed(game, oracle.tau if oracle.tau is not None else 0.05,
                            oracle.max_iters, oracle.seed)
    elif oracle.kind == "mwu_diminishing":
        traj = pm.mwu_diminishing(game, oracle.max_iters, oracle.seed)
    elif oracle.kind == "omwu":
        traj = pm.omwu(game, oracle.tau, oracle.eta, oracle.max_iters)
    elif oracle.kind == "omd":
        traj = pm.omd(game, oracle.eta, oracle.max_iters)
    else:
        return None
    out = {}
    for t in range(0, len(traj), stride):
        out[str(t)] = {"0": {str(i): p.tolist()
                             for i, p in enumerate(traj.profile(t))}}
    return out


def cmd_solve(args) -> int:
    game = _load(args.game)
    if args.oracle not in ORACLE_KINDS:
        print(f"error: unknown oracle {args.oracle!r}; choose from {ORACLE_KINDS}",
              file=sys.stderr)
        return EXIT_USAGE
    oracle = _oracle_from_args(args)
    out = args.out or "solve_out"
    started = time.perf_counter()

    if isinstance(game, PolymatrixGame):
        profile, report = solve_matrix_game(game, oracle)
        policy = {"0": {"0": {str(i): p.tolist() for i, p in enumerate(profile)}}}
        rows = [[report.iterations_used, i, "-", float(report.per_player_gaps[i]), None, None]
                for i in range(game.num_players)]
        summary = {"kind": "matrix", "oracle": args.oracle,
                   "final_gap": report.ne_gap,
                   "qre_gap": report.qre_gap,
                   "iterations": report.iterations_used}
        final_gap = report.ne_gap
        if args.snapshot_stride:
            snaps = _matrix_snapshots(game, oracle, args.snapshot_stride)
            if snaps is not None:
                io.write_json(snaps, f"{out}.snapshots.json")
    elif isinstance(game.horizon, Finite):
        res = value_iteration_ne(game, oracle, threads=_threads(args))
        gap = markov_ne_gap(game, res.policy)
        policy = io.policy_to_dict(res.policy)
        rows = [[h, "", s, float(res.stage_gaps[h, s]), None, None]
                for h in range(res.stage_gaps.shape[0])
                for s in range(res.stage_gaps.shape[1])]
        summary = {"kind": "finite_horizon", "oracle": args.oracle,
                   "final_gap": gap.gap, "stage_gap_bound": res.gap_bound,
                   "iterations": oracle.max_iters,
                   "stage_gaps": {str(h): {str(s): float(res.stage_gaps[h, s])
                                           for s in range(res.stage_gaps.shape[1])}
                                  for h in range(res.stage_gaps.shape[0])}}
        final_gap = gap.gap
    else:
        if args.truncate_eps is not None:
            horizon = truncate_horizon(game.horizon.gamma, args.truncate_eps,
                                       game.reward_bound)
            finite = NetworkedMarkovGame(
                game.graph, game.num_states, game.action_counts, Finite(horizon),
                tuple([game.rewards[0]] * horizon), tuple([game.dynamics[0]] * horizon),
                reward_bound=game.reward_bound, zero_sum=game.zero_sum)
            res = value_iteration_ne(finite, oracle, threads=_threads(args))
            gap = markov_ne_gap(finite, res.policy)
            policy = io.policy_to_dict(res.policy)
            rows = [[h, "", s, float(res.stage_gaps[h, s]), None, None]
                    for h in range(horizon) for s in range(game.num_states)]
            summary = {"kind": "truncated", "horizon": horizon, "oracle": args.oracle,
                       "final_gap": gap.gap, "stage_gap_bound": res.gap_bound,
                       "iterations": oracle.max_iters}
            final_gap = gap.gap
        else:
            try:
                res = star_value_iteration(game, tol=args.target_gap or 1e-8,
                                           threads=_threads(args))
            except ValueError as err:
                print(f"error: {err}; pass --truncate-eps to solve a finite-"
                      "horizon truncation instead", file=sys.stderr)
                return EXIT_DOMAIN
            gap = markov_ne_gap(game, res.policy)
            policy = io.policy_to_dict(res.policy)
            rows = [[res.sweeps, "", s, float(gap.per_player_state.max(axis=0)[s]), None,
                     float(res.center_values[s])] for s in range(game.num_states)]
            summary = {"kind": "star_stationary", "sweeps": res.sweeps,
                       "final_gap": gap.gap, "certified_error": gap.certified_error}
            final_gap = gap.gap

    elapsed = time.perf_counter() - started
    io.write_json(policy, f"{out}.policy.json")
    io.write_gap_csv(f"{out}.gaps.csv", rows)
    summary["wall_time_seconds"] = elapsed
    io.write_json(summary, f"{out}.summary.json")
    print(f"final gap {final_gap:.6g}; files {out}.policy.json, {out}.gaps.csv, "
          f"{out}.summary.json")
    return EXIT_OK


def cmd_fp(args) -> int:
    game = _load(args.game)
    if isinstance(game, PolymatrixGame) or not isinstance(game.horizon, Discounted):
        print("error: fictitious play runs on discounted networked Markov games",
              file=sys.stderr)
        return EXIT_DOMAIN
    try:
        result = fp_markov(game, StepSchedule.power(args.alpha_pow),
                           StepSchedule.power(args.beta_pow), args.iters,
                           seed=args.seed, snapshot_stride=args.stride,
                           explore=args.explore)
    except ValueError as err:
        print(f"error: {err} (the belief dynamics need a star graph whose "
              "center is the single controller)", file=sys.stderr)
        return EXIT_DOMAIN
    out = args.out or "fp_out"
    io.write_trajectory_csv(f"{out}.trajectory.csv", result.snapshot_iters,
                            result.vhat, result.sum_vhat)
    summary = {
        "iterations": args.iters,
        "alpha_pow": args.alpha_pow,
        "beta_pow": args.beta_pow,
        "seed": args.seed,
        "final_abs_sum_vhat": [abs(float(v)) for v in result.sum_vhat[-1]],
        "visits": [int(v) for v in result.visits],
    }
    if args.explore:
        # uniform restarts deviate from the plain dynamics; record it
        summary["explore"] = args.explore
    io.write_json(summary, f"{out}.summary.json")
    print(f"final |sum V| per state: {summary['final_abs_sum_vhat']}")
    return EXIT_OK


def cmd_generate(args) -> int:
    if args.kind == "random-zs-nmg":
        from .games import InteractionGraph
        graph = InteractionGraph.complete(args.players)
        horizon = Finite(args.horizon) if args.horizon else Discounted(args.gamma)
        game = generators.random_zero_sum_nmg(
            graph, args.states, tuple([args.actions] * args.players),
            horizon, seed=args.seed)
    elif args.kind == "star-random":
        game = generators.random_star_nmg(args.players, args.states, args.actions,
                                          args.gamma, seed=args.seed)
    elif args.kind == "fashion":
        if args.zero_sum and (args.conformists == 0 or args.rebels == 0):
            print("error: zero-sum fashion games need both conformists and "
                  "rebels (a bipartite split)", file=sys.stderr)
            return EXIT_DOMAIN
        game = generators.fashion_game(args.conformists, args.rebels, args.smax,
                                       gamma=args.gamma, zero_sum=args.zero_sum,
                                       seed=args.seed)
    else:
        print(f"error: unknown generator kind {args.kind!r}", file=sys.stderr)
        return EXIT_USAGE
    io.save_game(game, args.out)
    print(f"game written to {args.out}")
    return EXIT_OK


def cmd_gap(args) -> int:
    game = _load(args.game)
    try:
        with open(args.policy) as fh:
            policy_data = json.load(fh)
    except (FileNotFoundError, json.JSONDecodeError) as err:
        print(f"error: {args.policy}: {err}", file=sys.stderr)
        return EXIT_USAGE
    try:
        policy = io.policy_from_dict(policy_data)
        if isinstance(game, PolymatrixGame):
            profile = list(policy.at(0, 0))
            report = matrix_ne_gap(game, profile)
            data = {"kind": "matrix", "ne_gap": report.ne_gap,
                    "per_player": report.per_player_gaps.tolist()}
            gap_value = report.ne_gap
        else:
            report = markov_ne_gap(game, policy)
            data = {"kind": "markov", "ne_gap": report.gap,
                    "certified_error": report.certified_error,
                    "per_player_state": report.per_player_state.tolist()}
            gap_value = report.gap
    except (ValueError, IndexError) as err:
        print(f"error: policy does not match the game: {err}", file=sys.stderr)
        return EXIT_USAGE
    out = args.out or "gap.json"
    io.write_json(data, out)
    print(f"gap {gap_value:.6g}; report written to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="nmg-solve",
        description="Solvers for zero-sum games with networked separable interactions")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads for per-state solves (default 1; "
                        "NMG_SOLVE_THREADS is honored)")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check structural and zero-sum invariants")
    v.add_argument("game")
    v.add_argument("--tol", type=float, default=1e-9)
    v.add_argument("--out", default=None)
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("solve", help="compute an equilibrium")
    s.add_argument("game")
    s.add_argument("--oracle", default="lp", choices=list(ORACLE_KINDS))
    s.add_argument("--iters", type=int, default=5000)
    s.add_argument("--tau", type=float, default=None)
    s.add_argument("--eta", type=float, default=None)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--target-gap", type=float, default=None)
    s.add_argument("--truncate-eps", type=float, default=None,
                   help="solve a finite-horizon truncation of a discounted game")
    s.add_argument("--snapshot-stride", type=int, default=None,
                   help="also write policy snapshots every N iterations "
                        "(matrix-game dynamics only)")
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_solve)

    f = sub.add_parser("fp", help="star-game fictitious play")
    f.add_argument("game")
    f.add_argument("--alpha-pow", type=float, default=0.55)
    f.add_argument("--beta-pow", type=float, default=0.75)
    f.add_argument("--iters", type=int, default=1 << 22)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--stride", type=int, default=1 << 12)
    f.add_argument("--explore", type=float, default=0.0)
    f.add_argument("--out", default=None)
    f.set_defaults(func=cmd_fp)

    g = sub.add_parser("generate", help="write a game file")
    g.add_argument("kind", choices=["random-zs-nmg", "fashion", "star-random"])
    g.add_argument("--players", type=int, default=3)
    g.add_argument("--states", type=int, default=2)
    g.add_argument("--actions", type=int, default=2)
    g.add_argument("--horizon", type=int, default=None)
    g.add_argument("--gamma", type=float, default=0.9)
    g.add_argument("--conformists", type=int, default=2)
    g.add_argument("--rebels", type=int, default=2)
    g.add_argument("--smax", type=int, default=2)
    g.add_argument("--zero-sum", action="store_true")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    q = sub.add_parser("gap", help="equilibrium gap of a saved policy")
    q.add_argument("game")
    q.add_argument("policy")
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_gap)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code = args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    return code


if __name__ == "__main__":
    sys.exit(main())
