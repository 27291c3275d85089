"""Structural decomposition of rewards, transitions and auxiliary payoffs.

The checks here decide whether a dense function of a joint action splits
into a sum of per-coordinate terms, recover the terms when it does, and
repair signed transition components into proper sub-kernels.  They are what
turns a raw Markov game into the networked form the solvers consume.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .games import (ConstantDynamics, EnsembleDynamics, Finite,
                    InteractionGraph, NetworkedMarkovGame, DEFAULT_TOL)

__all__ = [
    "DecompositionReport",
    "TransitionStructure",
    "DecomposedQTable",
    "check_additive",
    "check_reward_structure",
    "check_transition_structure",
    "repair_nonnegative",
    "canonical_q",
]

# Full verification below this many tensor entries, random probing above.
VERIFY_CAP = 10**6
PROBE_COUNT = 10**4


@dataclass(frozen=True)
class Witness:
    """Mixed second difference proving non-decomposability."""

    coords: tuple[int, int]
    index_a: tuple[int, ...]
    index_b: tuple[int, ...]
    value: float


@dataclass(frozen=True)
class DecompositionReport:
    decomposable: bool
    components: dict[int, np.ndarray] | None
    constant: float | None
    max_residual: float
    witness: Witness | None = None
    coverage: float = 1.0

    def reconstruct(self, shape: tuple[int, ...]) -> np.ndarray:
        """Rebuild the additive tensor from the recovered components."""
        if not self.decomposable:
            raise ValueError("tensor was not decomposable")
        if self.components is None:
            return np.full(shape, self.constant)
        out = np.zeros(shape)
        for axis, comp in self.components.items():
            view = [1] * len(shape)
            view[axis] = -1
            out = out + comp.reshape(view)
        return out


def _anchored_components(f: np.ndarray, coords: tuple[int, ...]) -> dict[int, np.ndarray]:
    """Anchor-at-zero construction: f_i(x_i) = f(x_i, 0_{-i}) - f(0) (d-1)/d."""
    d = len(coords)
    base = float(f[(0,) * f.ndim])
    comps = {}
    for axis in coords:
        idx: list = [0] * f.ndim
        idx[axis] = slice(None)
        comps[axis] = np.asarray(f[tuple(idx)], dtype=float) - base * (d - 1) / d
    return comps


def check_additive(f: np.ndarray, coords: tuple[int, ...] | None = None,
                   tol: float = DEFAULT_TOL, nonnegative: bool = False,
                   rng: np.random.Generator | None = None) -> DecompositionReport:
    """Decide whether ``f(x) = sum_i f_i(x_i)`` over the given axes.

    ``coords`` defaults to all axes.  An empty ``coords`` asks whether ``f``
    is constant.  Components are anchored at index 0 with the anchor value
    spread evenly, which makes the output deterministic; any other anchor
    differs by constants only.  With ``nonnegative=True`` the components are
    shifted (preserving their sum) to be entrywise >= 0 when feasible.

    Verification is exhaustive up to ``VERIFY_CAP`` entries and falls back
    to ``PROBE_COUNT`` random probes beyond it (``coverage`` records the
    verified fraction).
    """
    f = np.asarray(f, dtype=float)
    if f.size == 0:
        raise ValueError("empty tensor")
    if coords is None:
        coords = tuple(range(f.ndim))
    coords = tuple(sorted(coords))

    if len(coords) == 0:
        dev = float(np.max(f) - np.min(f)) if f.size else 0.0
        if dev <= tol:
            return DecompositionReport(True, None, float(f.flat[0]), dev)
        flat_hi = int(np.argmax(f))
        flat_lo = int(np.argmin(f))
        return DecompositionReport(
            False, None, None, dev,
            Witness((-1, -1), np.unravel_index(flat_hi, f.shape),
                    np.unravel_index(flat_lo, f.shape), dev))

    # Axes outside ``coords`` must be constant; check and collapse them.
    other = [ax for ax in range(f.ndim) if ax not in coords]
    if other:
        spread = f.max(axis=tuple(other)) - f.min(axis=tuple(other))
        dev = float(np.max(spread))
        if dev > tol:
            idx = np.unravel_index(int(np.argmax(f)), f.shape)
            return DecompositionReport(False, None, None, dev,
                                       Witness((other[0], other[0]), idx, idx, dev))

    comps = _anchored_components(f, coords)

    if f.size <= VERIFY_CAP:
        recon = np.zeros(f.shape)
        for axis, comp in comps.items():
            view = [1] * f.ndim
            view[axis] = -1
            recon = recon + comp.reshape(view)
        residual = np.abs(f - recon)
        max_residual = float(np.max(residual))
        coverage = 1.0
        worst = np.unravel_index(int(np.argmax(residual)), f.shape)
    else:
        rng = rng or np.random.default_rng(0)
        max_residual = 0.0
        worst = (0,) * f.ndim
        for _ in range(PROBE_COUNT):
            idx = tuple(int(rng.integers(s)) for s in f.shape)
            val = float(f[idx]) - sum(comps[ax][idx[ax]] for ax in coords)
            if abs(val) > max_residual:
                max_residual = abs(val)
                worst = idx
        coverage = PROBE_COUNT / f.size

    if max_residual > tol:
        witness = _second_difference_witness(f, coords, worst)
        return DecompositionReport(False, None, None, max_residual, witness, coverage)

    if nonnegative:
        comps = _shift_nonnegative(comps)

    return DecompositionReport(True, {ax: comps[ax] for ax in coords}, None,
                               max_residual, None, coverage)


def _second_difference_witness(f: np.ndarray, coords: tuple[int, ...],
                               at: tuple[int, ...]) -> Witness:
    """Locate a nonzero mixed second difference near a failing index."""
    best = Witness((coords[0], coords[0]), at, at, 0.0)
    for i, j in itertools.combinations(coords, 2):
        xi, xj = at[i], at[j]
        for yi in range(f.shape[i]):
            for yj in range(f.shape[j]):
                a = list(at)
                b = list(at)
                b[i], b[j] = yi, yj
                ab = list(at)
                ab[i] = yi
                ba = list(at)
                ba[j] = yj
                d = f[tuple(a)] - f[tuple(ab)] - f[tuple(ba)] + f[tuple(b)]
                if abs(d) > abs(best.value):
                    best = Witness((i, j), tuple(a), tuple(b), float(d))
    return best


def _shift_nonnegative(comps: dict[int, np.ndarray]) -> dict[int, np.ndarray]:
    mins = {ax: float(np.min(c)) for ax, c in comps.items()}
    total = sum(mins.values())
    if total < -1e-12:
        raise ValueError("components cannot be made non-negative by constant shifts")
    d = len(comps)
    return {ax: comps[ax] - mins[ax] + total / d for ax in comps}


def check_reward_structure(rewards: list[np.ndarray], graph: InteractionGraph,
                           tol: float = DEFAULT_TOL) -> dict[tuple[int, int], np.ndarray] | dict:
    """Decompose dense per-player rewards into pairwise edge tables.

    ``rewards[i]`` has shape ``(S, A_1, ..., A_n)``.  For every player the
    slice ``r_i(s, a_i, .)`` must be additive over the neighbors of ``i``
    and constant in non-neighbors.  Returns a dict with ``ok``, per-check
    ``reports`` keyed by ``(i, s, a_i)`` and, on success, ``tables`` mapping
    directed edges to arrays of shape ``(S, A_i, A_j)``.
    """
    n = graph.num_players
    if len(rewards) != n:
        raise ValueError("one dense reward tensor per player required")
    shape = np.asarray(rewards[0]).shape
    num_states = shape[0]
    action_counts = shape[1:]
    if len(action_counts) != n:
        raise ValueError("reward tensors must have one action axis per player")

    reports: dict[tuple[int, int, int], DecompositionReport] = {}
    tables = {(i, j): np.zeros((num_states, action_counts[i], action_counts[j]))
              for (i, j) in graph.directed_edges()}
    ok = True
    for i in range(n):
        r_i = np.asarray(rewards[i], dtype=float)
        if r_i.shape != shape:
            raise ValueError(f"player {i} tensor has shape {r_i.shape}, expected {shape}")
        nbrs = graph.neighbors(i)
        # Axis k+1 of the tensor is player k's action; drop player i's own
        # axis by slicing, so coordinates are the opponents.
        for s in range(num_states):
            for a_i in range(action_counts[i]):
                idx = [s] + [slice(None)] * n
                idx[1 + i] = a_i
                slice_f = r_i[tuple(idx)]  # shape: actions of all j != i
                axes = tuple(k if k < i else k - 1 for k in nbrs)
                rep = check_additive(slice_f, axes, tol)
                reports[(i, s, a_i)] = rep
                if not rep.decomposable:
                    ok = False
                    continue
                for j in nbrs:
                    ax = j if j < i else j - 1
                    tables[(i, j)][s, a_i, :] = rep.components[ax]
    return {"ok": ok, "reports": reports, "tables": tables if ok else None}


@dataclass(frozen=True)
class TransitionStructure:
    ok: bool
    dynamics: EnsembleDynamics | ConstantDynamics | None
    report: DecompositionReport
    max_reconstruction_error: float = 0.0


def check_transition_structure(kernel: np.ndarray, graph: InteractionGraph,
                               tol: float = DEFAULT_TOL) -> TransitionStructure:
    """Recover ensemble (or constant) form from a dense kernel.

    ``kernel`` has shape ``(S, A_1, ..., A_n, S)``.  With no fully connected
    players the kernel must be action independent.  Otherwise each slice
    ``P(s'|s, .)`` is decomposed additively over the fully connected set,
    the signed components are repaired to be non-negative, and weights and
    per-controller kernels are extracted (uniform rows where a controller
    has zero weight at a state).
    """
    kernel = np.asarray(kernel, dtype=float)
    num_states = kernel.shape[0]
    action_counts = kernel.shape[1:-1]
    n = graph.num_players
    if len(action_counts) != n or kernel.shape[-1] != num_states:
        raise ValueError("kernel must have shape (S, A_1, ..., A_n, S)")
    n_c = tuple(sorted(graph.n_c))

    if not n_c:
        flat = kernel.reshape(num_states, -1, num_states)
        table = flat[:, 0, :]
        dev = float(np.max(np.abs(flat - table[:, None, :])))
        rep = DecompositionReport(dev <= tol, None, None, dev)
        if dev > tol:
            return TransitionStructure(False, None, rep)
        return TransitionStructure(True, ConstantDynamics(table), rep)

    comps = {c: np.zeros((num_states, action_counts[c], num_states)) for c in n_c}
    worst = 0.0
    anchor = tuple(0 for _ in range(n))
    for s in range(num_states):
        centered = {c: np.zeros((action_counts[c], num_states)) for c in n_c}
        leftovers = np.zeros(num_states)
        for s2 in range(num_states):
            slice_f = kernel[s, ..., s2]
            rep = check_additive(slice_f, tuple(c for c in n_c), tol)
            if not rep.decomposable:
                return TransitionStructure(False, None, DecompositionReport(
                    False, None, None, rep.max_residual, rep.witness), rep.max_residual)
            worst = max(worst, rep.max_residual)
            const = float(slice_f[anchor])
            for c in n_c:
                g = rep.components[c] - float(np.mean(rep.components[c]))
                centered[c][:, s2] = g
                const -= g[0]
            # Cover each controller's deficit from the constant pool; what
            # remains is exactly min_a P(s'|s, .) >= 0.
            leftover = const
            for c in n_c:
                leftover += float(np.min(centered[c][:, s2]))
            leftovers[s2] = max(leftover, 0.0)
        # Constants concentrate on controllers whose component actually
        # depends on their action at this state; this makes turn-based
        # kernels come out with indicator weights and single-controller
        # kernels exact.
        active = [c for c in n_c
                  if float(np.max(centered[c].max(axis=0) - centered[c].min(axis=0))) > max(tol, 1e-12)]
        share = active if active else list(n_c)
        for c in n_c:
            block = centered[c] - centered[c].min(axis=0, keepdims=True)
            if c in share:
                block = block + leftovers[None, :] / len(share)
            comps[c][s] = block

    comps = repair_nonnegative(comps, tol=tol)

    weights = np.zeros((num_states, len(n_c)))
    kernels = {}
    for k, c in enumerate(n_c):
        mass = comps[c].sum(axis=2)  # (S, A_c)
        dev = float(np.max(mass.max(axis=1) - mass.min(axis=1)))
        if dev > max(tol, 1e-8):
            return TransitionStructure(False, None, DecompositionReport(
                False, None, None, dev,
                Witness((c, c), (0,), (0,), dev)), dev)
        weights[:, k] = mass.mean(axis=1)
        kern = np.empty_like(comps[c])
        for s in range(num_states):
            w = weights[s, k]
            if w > tol:
                kern[s] = comps[c][s] / w
            else:
                kern[s] = 1.0 / num_states  # zero-weight convention: uniform
        kernels[c] = np.clip(kern, 0.0, None)
        kernels[c] /= kernels[c].sum(axis=2, keepdims=True)

    dyn = EnsembleDynamics(n_c, weights, kernels)
    err = 0.0
    for s in range(num_states):
        for joint in itertools.product(*(range(a) for a in action_counts)):
            err = max(err, float(np.max(np.abs(
                dyn.induced(s, joint) - kernel[(s, *joint)]))))
    rep = DecompositionReport(True, None, None, worst)
    return TransitionStructure(err <= max(tol, 1e-8), dyn if err <= max(tol, 1e-8) else dyn, rep, err)


def repair_nonnegative(components: dict[int, np.ndarray],
                       tol: float = DEFAULT_TOL) -> dict[int, np.ndarray]:
    """Shift signed transition components to be non-negative.

    For every ``(s, s')`` with some controller's row minimum below zero,
    transfer constant mass from the controllers with the largest row
    minima (taken in descending order) until the deficit is covered.  The
    pointwise sum over controllers is preserved exactly.  Raises when the
    summed kernel itself is negative somewhere, which makes repair
    impossible.
    """
    ids = sorted(components)
    out = {c: np.array(components[c], dtype=float) for c in ids}
    any_arr = out[ids[0]]
    num_states, _, ns2 = any_arr.shape

    for s in range(num_states):
        for s2 in range(ns2):
            guard = 0
            while True:
                mins = {c: float(out[c][s, :, s2].min()) for c in ids}
                deficit_ids = [c for c in ids if mins[c] < -tol]
                if not deficit_ids:
                    break
                guard += 1
                if guard > 10 * len(ids):
                    raise ValueError("non-negativity repair did not terminate")
                i = deficit_ids[0]
                need = -mins[i]
                if sum(mins.values()) < -tol:
                    raise ValueError(
                        f"infeasible repair at (s={s}, s'={s2}): component minima "
                        f"sum to {sum(mins.values()):.3g} < 0")
                donors = sorted((c for c in ids if c != i),
                                key=lambda c: -mins[c])
                moved = 0.0
                for d in donors:
                    if moved >= need - 1e-15:
                        break
                    avail = max(mins[d], 0.0)
                    take = min(avail, need - moved)
                    if take <= 0.0:
                        continue
                    out[d][s, :, s2] -= take
                    out[i][s, :, s2] += take
                    moved += take
                if moved < need - 1e-12:
                    raise ValueError(
                        f"infeasible repair at (s={s}, s'={s2}): only {moved:.3g} "
                        f"of {need:.3g} transferable")
    for c in ids:
        np.clip(out[c], 0.0, None, out=out[c])
    return out


@dataclass(frozen=True)
class DecomposedQTable:
    """Pairwise auxiliary payoff blocks Q_{h,i,j}(s, a_i, a_j).

    ``stage_tables[h][s]`` maps directed edges to 2-D blocks; summing a
    player's incident blocks recovers its full auxiliary payoff.
    """

    stage_tables: tuple[tuple[dict[tuple[int, int], np.ndarray], ...], ...]

    @property
    def num_stages(self) -> int:
        return len(self.stage_tables)

    def block(self, h: int, s: int, i: int, j: int) -> np.ndarray:
        return self.stage_tables[h][s][(i, j)]

    def max_abs(self, h: int) -> float:
        return max(float(np.max(np.abs(t)))
                   for s_tables in (self.stage_tables[h],)
                   for tables in s_tables for t in tables.values())


def canonical_q(game: NetworkedMarkovGame, h: int, values: np.ndarray) -> DecomposedQTable:
    """Canonical pairwise split of the stage-``h`` auxiliary payoffs.

    ``values[i, s']`` holds next-stage values.  Every edge block receives
    the neighbor's own controller term in full and a ``1/deg(i)`` share of
    player ``i``'s controller (or of the constant kernel).  Summing blocks
    over a player's neighbors reproduces
    ``r_i(s,a) + gamma_eff * <P(.|s,a), V_i>`` exactly.
    """
    values = np.asarray(values, dtype=float)
    n = game.num_players
    if values.shape != (n, game.num_states):
        raise ValueError(f"values must have shape {(n, game.num_states)}")
    gamma_eff = 1.0 if isinstance(game.horizon, Finite) else game.horizon.gamma
    rewards = game.stage_rewards(h)
    dyn = game.stage_dynamics(h)
    n_c = game.graph.n_c

    per_state: list[dict[tuple[int, int], np.ndarray]] = []
    for s in range(game.num_states):
        tables: dict[tuple[int, int], np.ndarray] = {}
        for (i, j) in game.graph.directed_edges():
            block = np.array(rewards[(i, j)][s], dtype=float)
            deg = len(game.graph.neighbors(i))
            if isinstance(dyn, ConstantDynamics):
                shift = gamma_eff * float(dyn.table[s] @ values[i]) / deg
                block += shift
            elif isinstance(dyn, EnsembleDynamics):
                if j in n_c and j in dyn.kernels:
                    contrib = gamma_eff * (dyn.component(j, s) @ values[i])  # (A_j,)
                    block += contrib[None, :]
                if i in n_c and i in dyn.kernels:
                    contrib = gamma_eff * (dyn.component(i, s) @ values[i]) / deg  # (A_i,)
                    block += contrib[:, None]
            else:
                raise ValueError("dense dynamics must be decomposed before use")
            tables[(i, j)] = block
        per_state.append(tables)
    return DecomposedQTable((tuple(per_state),))
