import json
import subprocess
import sys
from importlib import resources
from pathlib import Path

import numpy as np
import pytest

import nmgsolve as nm
from nmgsolve import io
from nmgsolve.cli import main
from nmgsolve.generators import fp_experiment_instance, random_zero_sum_nmg


FIXTURE = resources.files("nmgsolve") / "fixtures" / "fp_experiment.json"


def run_cli(*args):
    return main([str(a) for a in args])


# ---------------------------------------------------------------------------
# JSON round trips
# ---------------------------------------------------------------------------

def test_game_round_trip_matrix(matching_pennies, tmp_path):
    path = tmp_path / "mp.json"
    io.save_game(matching_pennies, path)
    loaded = io.load_game(path)
    assert isinstance(loaded, nm.PolymatrixGame)
    np.testing.assert_array_equal(loaded.table(0, 1), matching_pennies.table(0, 1))
    assert loaded.zero_sum


def test_game_round_trip_nmg(tmp_path):
    game = random_zero_sum_nmg(nm.InteractionGraph.complete(3), 2, (2, 3, 2),
                               nm.Finite(2), seed=1)
    path = tmp_path / "g.json"
    io.save_game(game, path)
    loaded = io.load_game(path)
    assert loaded.action_counts == (2, 3, 2)
    assert isinstance(loaded.horizon, nm.Finite)
    for h in range(2):
        for e in game.graph.directed_edges():
            np.testing.assert_array_equal(loaded.stage_rewards(h)[e],
                                          game.stage_rewards(h)[e])
        a, b = loaded.stage_dynamics(h), game.stage_dynamics(h)
        np.testing.assert_array_equal(a.weights, b.weights)
        for c in b.controllers:
            np.testing.assert_array_equal(a.kernels[c], b.kernels[c])


def test_policy_round_trip(tmp_path):
    policy = nm.ProductPolicy(((
        (np.array([0.25, 0.75]), np.array([1.0, 0.0])),
        (np.array([0.5, 0.5]), np.array([0.1, 0.9])),
    ),))
    d = io.policy_to_dict(policy)
    back = io.policy_from_dict(d)
    for s in range(2):
        for i in range(2):
            np.testing.assert_array_equal(back.at(0, s)[i], policy.at(0, s)[i])


# ---------------------------------------------------------------------------
# CLI commands and exit codes
# ---------------------------------------------------------------------------

def test_validate_shipped_fixture(tmp_path):
    assert run_cli("validate", FIXTURE, "--out", tmp_path / "r.json") == 0
    report = json.loads((tmp_path / "r.json").read_text())
    assert report["ok"] is True


def test_validate_broken_row_sum(tmp_path):
    game = fp_experiment_instance()
    data = io.game_to_dict(game)
    data["dynamics"]["0"]["ensemble"]["kernels"]["0"][0][0] = [0.4, 0.5]
    path = tmp_path / "broken.json"
    io.write_json(data, path)
    assert run_cli("validate", path, "--out", tmp_path / "r.json") == 1
    report = json.loads((tmp_path / "r.json").read_text())
    names = {f["name"] for f in report["failures"]}
    assert "stochasticity" in names
    assert any("s=0" in f["location"] for f in report["failures"])


def test_validate_malformed_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert run_cli("validate", path) == 2


def test_validate_dense_rewards_block(tmp_path):
    import itertools
    game = random_zero_sum_nmg(nm.InteractionGraph.complete(3), 2, (2, 2, 2),
                               nm.Finite(1), seed=21)
    data = io.game_to_dict(game)
    dense = [np.zeros((2, 2, 2, 2)) for _ in range(3)]
    for i in range(3):
        for s in range(2):
            for joint in itertools.product(range(2), repeat=3):
                dense[i][(s, *joint)] = sum(
                    game.stage_rewards(0)[(i, j)][s, joint[i], joint[j]]
                    for j in game.graph.neighbors(i))
    data["dense_rewards"] = [d.tolist() for d in dense]
    good = tmp_path / "good.json"
    io.write_json(data, good)
    assert run_cli("validate", good, "--out", tmp_path / "r1.json") == 0
    report = json.loads((tmp_path / "r1.json").read_text())
    assert report["dense_rewards_decomposable"] is True

    dense[1][(0, 1, 1, 1)] += 0.5  # plant a three-way term
    dense[1][(0, 0, 1, 1)] -= 0.5
    data["dense_rewards"] = [d.tolist() for d in dense]
    bad = tmp_path / "bad_dense.json"
    io.write_json(data, bad)
    assert run_cli("validate", bad, "--out", tmp_path / "r2.json") == 1
    report = json.loads((tmp_path / "r2.json").read_text())
    assert report["dense_rewards_decomposable"] is False
    assert any(f["name"] == "reward_decomposability" for f in report["failures"])


def test_solve_matching_pennies(matching_pennies, tmp_path):
    path = tmp_path / "mp.json"
    io.save_game(matching_pennies, path)
    out = tmp_path / "sol"
    assert run_cli("solve", path, "--oracle", "lp", "--out", out) == 0
    policy = json.loads(Path(f"{out}.policy.json").read_text())
    np.testing.assert_allclose(policy["0"]["0"]["0"], [0.5, 0.5], atol=1e-9)
    summary = json.loads(Path(f"{out}.summary.json").read_text())
    assert summary["final_gap"] <= 1e-6


def test_solve_replay_is_byte_identical(tmp_path):
    game = random_zero_sum_nmg(nm.InteractionGraph.complete(3), 2, (2, 2, 2),
                               nm.Finite(3), seed=9)
    path = tmp_path / "g.json"
    io.save_game(game, path)
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / tag
        assert run_cli("solve", path, "--oracle", "mwu_fixed", "--tau", "0.1",
                       "--iters", "500", "--seed", "7", "--out", out) == 0
        outs.append(out)
    assert Path(f"{outs[0]}.policy.json").read_bytes() == \
        Path(f"{outs[1]}.policy.json").read_bytes()
    assert Path(f"{outs[0]}.gaps.csv").read_bytes() == \
        Path(f"{outs[1]}.gaps.csv").read_bytes()


def test_solve_matrix_snapshots(tmp_path, matching_pennies):
    path = tmp_path / "mp.json"
    io.save_game(matching_pennies, path)
    out = tmp_path / "sol"
    assert run_cli("solve", path, "--oracle", "omwu", "--iters", "100",
                   "--snapshot-stride", "25", "--out", out) == 0
    snaps = json.loads(Path(f"{out}.snapshots.json").read_text())
    assert set(snaps) == {"0", "25", "50", "75", "100"}
    np.testing.assert_allclose(snaps["0"]["0"]["0"], [0.5, 0.5])


def test_solve_finite_summary_has_stage_gaps(tmp_path):
    game = random_zero_sum_nmg(nm.InteractionGraph.complete(3), 2, (2, 2, 2),
                               nm.Finite(2), seed=31)
    path = tmp_path / "g.json"
    io.save_game(game, path)
    out = tmp_path / "sol"
    assert run_cli("solve", path, "--oracle", "lp", "--out", out) == 0
    summary = json.loads(Path(f"{out}.summary.json").read_text())
    assert set(summary["stage_gaps"]) == {"0", "1"}
    assert set(summary["stage_gaps"]["0"]) == {"0", "1"}


def test_solve_unknown_oracle_exits_2(tmp_path, matching_pennies):
    path = tmp_path / "mp.json"
    io.save_game(matching_pennies, path)
    proc = subprocess.run(
        [sys.executable, "-m", "nmgsolve.cli", "solve", str(path),
         "--oracle", "does-not-exist"], capture_output=True)
    assert proc.returncode == 2


def test_fp_zero_iterations_writes_initial_only(tmp_path):
    out = tmp_path / "fp"
    assert run_cli("fp", FIXTURE, "--iters", "0", "--out", out) == 0
    rows = Path(f"{out}.trajectory.csv").read_text().strip().splitlines()
    assert len(rows) == 1 + 2 * 3  # header + one snapshot of (state, player)
    assert all(r.startswith("0,") for r in rows[1:])


def test_fp_rejects_non_star(tmp_path):
    game = random_zero_sum_nmg(nm.InteractionGraph.complete(3), 2, (2, 2, 2),
                               nm.Discounted(0.9), seed=0)
    path = tmp_path / "tri.json"
    io.save_game(game, path)
    assert run_cli("fp", path, "--iters", "10") == 1


def test_generate_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert run_cli("generate", "random-zs-nmg", "--players", "3",
                       "--states", "2", "--actions", "2", "--horizon", "3",
                       "--seed", "5", "--out", out) == 0
    assert a.read_bytes() == b.read_bytes()
    game = io.load_game(a)
    assert nm.validate_nmg(game).ok


def test_generate_fashion_zero_sum_validates(tmp_path):
    out = tmp_path / "fashion.json"
    assert run_cli("generate", "fashion", "--conformists", "2", "--rebels", "2",
                   "--smax", "2", "--zero-sum", "--out", out) == 0
    game = io.load_game(out)
    report = nm.validate_nmg(game)
    assert report.ok
    assert game.zero_sum


def test_generate_fashion_needs_bipartite_for_zero_sum(tmp_path):
    assert run_cli("generate", "fashion", "--conformists", "3", "--rebels", "0",
                   "--zero-sum", "--out", tmp_path / "x.json") == 1


def test_generate_star_random(tmp_path):
    out = tmp_path / "star.json"
    assert run_cli("generate", "star-random", "--players", "4", "--states", "2",
                   "--actions", "2", "--gamma", "0.9", "--out", out) == 0
    game = io.load_game(out)
    assert game.graph.star_center() == 0
    assert nm.validate_nmg(game).ok


def test_gap_command_on_lp_solution(tmp_path, matching_pennies):
    path = tmp_path / "mp.json"
    io.save_game(matching_pennies, path)
    out = tmp_path / "sol"
    run_cli("solve", path, "--oracle", "lp", "--out", out)
    gap_out = tmp_path / "gap.json"
    assert run_cli("gap", path, f"{out}.policy.json", "--out", gap_out) == 0
    data = json.loads(gap_out.read_text())
    assert data["ne_gap"] <= 1e-6


def test_gap_command_shape_mismatch(tmp_path, matching_pennies):
    path = tmp_path / "mp.json"
    io.save_game(matching_pennies, path)
    bad_policy = tmp_path / "p.json"
    io.write_json({"0": {"0": {"0": [0.2, 0.3, 0.5], "1": [1.0]}}}, bad_policy)
    assert run_cli("gap", path, bad_policy) == 2


def test_gap_markov_against_brute_force(tmp_path):
    game = random_zero_sum_nmg(nm.InteractionGraph.complete(3), 2, (2, 2, 2),
                               nm.Finite(2), seed=13)
    path = tmp_path / "g.json"
    io.save_game(game, path)
    policy = nm.ProductPolicy.uniform(game)
    ppath = tmp_path / "p.json"
    io.write_json(io.policy_to_dict(policy), ppath)
    out = tmp_path / "gap.json"
    assert run_cli("gap", path, ppath, "--out", out) == 0
    data = json.loads(out.read_text())
    assert data["ne_gap"] == pytest.approx(nm.markov_ne_gap(game, policy).gap)


def test_threads_env_honored(tmp_path, monkeypatch):
    game = random_zero_sum_nmg(nm.InteractionGraph.complete(3), 2, (2, 2, 2),
                               nm.Finite(2), seed=2)
    path = tmp_path / "g.json"
    io.save_game(game, path)
    monkeypatch.setenv("NMG_SOLVE_THREADS", "3")
    assert run_cli("solve", path, "--oracle", "lp", "--out", tmp_path / "s") == 0


# ---------------------------------------------------------------------------
# output schemas
# ---------------------------------------------------------------------------

def test_outputs_validate_against_schemas(tmp_path):
    jsonschema = pytest.importorskip("jsonschema")
    schemas = {}
    for name in ("policy", "gap_report", "summary", "validation_report"):
        ref = resources.files("nmgsolve") / "schemas" / f"{name}.schema.json"
        schemas[name] = json.loads(ref.read_text())

    game = random_zero_sum_nmg(nm.InteractionGraph.complete(3), 2, (2, 2, 2),
                               nm.Finite(2), seed=3)
    gpath = tmp_path / "g.json"
    io.save_game(game, gpath)
    out = tmp_path / "sol"
    run_cli("solve", gpath, "--oracle", "lp", "--out", out)
    run_cli("validate", gpath, "--out", tmp_path / "rep.json")
    gap_out = tmp_path / "gap.json"
    run_cli("gap", gpath, f"{out}.policy.json", "--out", gap_out)

    jsonschema.validate(json.loads(Path(f"{out}.policy.json").read_text()),
                        schemas["policy"])
    jsonschema.validate(json.loads(Path(f"{out}.summary.json").read_text()),
                        schemas["summary"])
    jsonschema.validate(json.loads(gap_out.read_text()), schemas["gap_report"])
    jsonschema.validate(json.loads((tmp_path / "rep.json").read_text()),
                        schemas["validation_report"])
