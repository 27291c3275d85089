"""Data model for games with networked separable interactions.

A polymatrix (networked) game attaches a two-player payoff table to every
edge of an interaction graph; a player's reward is the sum over incident
edges.  The Markov extension adds states, per-stage edge rewards and
transition dynamics that are an ensemble of single-controller kernels (or a
constant, action-independent kernel).  All types here are immutable after
construction and all operations are pure functions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

__all__ = [
    "InteractionGraph",
    "PolymatrixGame",
    "EnsembleDynamics",
    "ConstantDynamics",
    "DenseDynamics",
    "Finite",
    "Discounted",
    "NetworkedMarkovGame",
    "JointMixture",
    "ProductPolicy",
    "MarkovJointPolicy",
    "ValidationFailure",
    "ValidationReport",
    "uniform_profile",
    "validate_polymatrix",
    "expected_payoffs",
    "validate_nmg",
    "auxiliary_game",
    "DEFAULT_TOL",
    "ENUMERATION_CAP",
]

DEFAULT_TOL = 1e-9
# Exact joint-action enumeration is used below this many joint actions;
# larger games fall back to the per-edge sufficient test.
ENUMERATION_CAP = 10**6


def _as_edge(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class InteractionGraph:
    """Undirected connected player graph.

    ``edges`` stores unordered pairs ``(i, j)`` with ``i < j``.  The derived
    set ``n_c`` (players adjacent to every other player) governs which
    players may control the transition dynamics of a Markov extension.
    """

    num_players: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        n = self.num_players
        if n < 2:
            raise ValueError("need at least two players")
        norm = set()
        for (i, j) in self.edges:
            if i == j:
                raise ValueError(f"self-loop at player {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i},{j}) out of range")
            norm.add(_as_edge(i, j))
        object.__setattr__(self, "edges", frozenset(norm))
        if not self._connected():
            raise ValueError("interaction graph must be connected")

    def _connected(self) -> bool:
        n = self.num_players
        adj = {i: set() for i in range(n)}
        for (i, j) in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for w in adj[v] - seen:
                seen.add(w)
                stack.append(w)
        return len(seen) == n

    @classmethod
    def from_pairs(cls, num_players: int, pairs: Sequence[Sequence[int]]) -> "InteractionGraph":
        return cls(num_players, frozenset(_as_edge(int(i), int(j)) for i, j in pairs))

    @classmethod
    def complete(cls, num_players: int) -> "InteractionGraph":
        return cls.from_pairs(num_players, list(itertools.combinations(range(num_players), 2)))

    @classmethod
    def star(cls, num_players: int, center: int = 0) -> "InteractionGraph":
        return cls.from_pairs(num_players, [(center, j) for j in range(num_players) if j != center])

    @classmethod
    def ring(cls, num_players: int) -> "InteractionGraph":
        return cls.from_pairs(num_players, [(i, (i + 1) % num_players) for i in range(num_players)])

    def neighbors(self, i: int) -> tuple[int, ...]:
        return tuple(sorted(j for (a, b) in self.edges for j in ((b,) if a == i else (a,) if b == i else ())))

    @property
    def n_c(self) -> frozenset[int]:
        """Players adjacent to all others (admissible dynamics controllers)."""
        n = self.num_players
        return frozenset(i for i in range(n) if len(self.neighbors(i)) == n - 1)

    def directed_edges(self) -> tuple[tuple[int, int], ...]:
        out = []
        for (i, j) in sorted(self.edges):
            out.append((i, j))
            out.append((j, i))
        return tuple(out)

    def star_center(self) -> int | None:
        """Center player if this graph is a star with >= 3 players, else None."""
        n = self.num_players
        if n < 3 or len(self.edges) != n - 1:
            return None
        hubs = [i for i in range(n) if len(self.neighbors(i)) == n - 1]
        return hubs[0] if len(hubs) == 1 else None


@dataclass(frozen=True)
class PolymatrixGame:
    """Normal-form game with pairwise payoffs along graph edges.

    ``payoffs[(i, j)]`` has shape ``(A_i, A_j)`` and both directions of every
    undirected edge must be present.  ``reward_bound`` defaults to the max
    absolute entry over all tables (used by step-size formulas downstream).
    """

    graph: InteractionGraph
    action_counts: tuple[int, ...]
    payoffs: Mapping[tuple[int, int], np.ndarray]
    reward_bound: float | None = None
    zero_sum: bool = False

    def __post_init__(self):
        n = self.graph.num_players
        if len(self.action_counts) != n:
            raise ValueError("one action count per player required")
        if any(a < 1 for a in self.action_counts):
            raise ValueError("action counts must be positive")
        tables = {}
        for (i, j) in self.graph.directed_edges():
            if (i, j) not in self.payoffs:
                raise ValueError(f"missing payoff table for directed edge ({i},{j})")
            t = np.asarray(self.payoffs[(i, j)], dtype=float)
            if t.shape != (self.action_counts[i], self.action_counts[j]):
                raise ValueError(f"table ({i},{j}) has shape {t.shape}, "
                                 f"expected {(self.action_counts[i], self.action_counts[j])}")
            t = t.copy()
            t.setflags(write=False)
            tables[(i, j)] = t
        extra = set(self.payoffs) - set(tables)
        if extra:
            raise ValueError(f"payoff tables for non-edges: {sorted(extra)}")
        object.__setattr__(self, "payoffs", tables)
        if self.reward_bound is None:
            bound = max(float(np.max(np.abs(t))) for t in tables.values()) if tables else 0.0
            object.__setattr__(self, "reward_bound", bound)

    @property
    def num_players(self) -> int:
        return self.graph.num_players

    def table(self, i: int, j: int) -> np.ndarray:
        return self.payoffs[(i, j)]

    def joint_rewards(self, joint_action: Sequence[int]) -> np.ndarray:
        """Per-player reward vector at a pure joint action."""
        r = np.zeros(self.num_players)
        for (i, j), t in self.payoffs.items():
            r[i] += t[joint_action[i], joint_action[j]]
        return r


@dataclass(frozen=True)
class EnsembleDynamics:
    """State transition as a per-state mixture of single-controller kernels.

    ``weights[s, k]`` is the probability that controller ``controllers[k]``
    drives the transition from state ``s``; ``kernels[i][s, a_i, s']`` is
    controller ``i``'s row-stochastic kernel.  The induced kernel is
    ``P(s'|s,a) = sum_k weights[s,k] * kernels[c_k][s, a_{c_k}, s']``.
    """

    controllers: tuple[int, ...]
    weights: np.ndarray
    kernels: Mapping[int, np.ndarray]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        ks = {}
        for c in self.controllers:
            if c not in self.kernels:
                raise ValueError(f"missing kernel for controller {c}")
            k = np.asarray(self.kernels[c], dtype=float).copy()
            k.setflags(write=False)
            ks[c] = k
        object.__setattr__(self, "kernels", ks)

    @property
    def num_states(self) -> int:
        return self.weights.shape[0]

    def component(self, c: int, s: int) -> np.ndarray:
        """Signed component F_c(.|s, a_c) = w_c(s) * P_c(.|s, a_c), shape (A_c, S)."""
        k = self.controllers.index(c)
        return self.weights[s, k] * self.kernels[c][s]

    def folded(self, s: int, marginals: Mapping[int, np.ndarray]) -> np.ndarray:
        """Next-state distribution from state ``s`` when each controller
        plays its marginal policy ``marginals[c]``."""
        out = np.zeros(self.num_states)
        for k, c in enumerate(self.controllers):
            out += self.weights[s, k] * (marginals[c] @ self.kernels[c][s])
        return out

    def induced(self, s: int, joint_action: Sequence[int]) -> np.ndarray:
        out = np.zeros(self.num_states)
        for k, c in enumerate(self.controllers):
            out += self.weights[s, k] * self.kernels[c][s, joint_action[c]]
        return out


@dataclass(frozen=True)
class ConstantDynamics:
    """Action-independent transition kernel F_o(s'|s)."""

    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table, dtype=float).copy()
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @property
    def num_states(self) -> int:
        return self.table.shape[0]

    def folded(self, s: int, marginals=None) -> np.ndarray:
        return self.table[s]

    def induced(self, s: int, joint_action: Sequence[int]) -> np.ndarray:
        return self.table[s]


@dataclass(frozen=True)
class DenseDynamics:
    """Raw kernel over (s, a_1, ..., a_n, s'); only valid after a structure
    check decomposes it into ensemble or constant form."""

    kernel: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.kernel, dtype=float).copy()
        k.setflags(write=False)
        object.__setattr__(self, "kernel", k)

    @property
    def num_states(self) -> int:
        return self.kernel.shape[0]


@dataclass(frozen=True)
class Finite:
    """Episodic horizon of ``length`` stages, no discounting."""

    length: int

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("horizon length must be >= 1")


@dataclass(frozen=True)
class Discounted:
    """Infinite horizon with discount factor in (0, 1)."""

    gamma: float

    def __post_init__(self):
        if not (0.0 < self.gamma < 1.0):
            raise ValueError("discount factor must lie in (0, 1)")


@dataclass(frozen=True)
class NetworkedMarkovGame:
    """Markov game whose stage payoffs decompose along a player graph.

    ``rewards`` is one dict per stage mapping directed edges to arrays of
    shape ``(S, A_i, A_j)``; ``dynamics`` is one dynamics object per stage.
    Discounted games are stationary: a single stage entry is stored and
    reused for every step.
    """

    graph: InteractionGraph
    num_states: int
    action_counts: tuple[int, ...]
    horizon: Finite | Discounted
    rewards: tuple[Mapping[tuple[int, int], np.ndarray], ...]
    dynamics: tuple[EnsembleDynamics | ConstantDynamics | DenseDynamics, ...]
    reward_bound: float | None = None
    zero_sum: bool = False

    def __post_init__(self):
        n = self.graph.num_players
        if len(self.action_counts) != n:
            raise ValueError("one action count per player required")
        stages = self.num_stage_entries
        if len(self.rewards) != stages or len(self.dynamics) != stages:
            raise ValueError(f"expected {stages} stage entries for rewards and dynamics")
        reward_stages = []
        for h, stage in enumerate(self.rewards):
            tables = {}
            for (i, j) in self.graph.directed_edges():
                if (i, j) not in stage:
                    raise ValueError(f"stage {h}: missing reward table for edge ({i},{j})")
                t = np.asarray(stage[(i, j)], dtype=float)
                want = (self.num_states, self.action_counts[i], self.action_counts[j])
                if t.shape != want:
                    raise ValueError(f"stage {h} table ({i},{j}): shape {t.shape}, expected {want}")
                t = t.copy()
                t.setflags(write=False)
                tables[(i, j)] = t
            reward_stages.append(tables)
        object.__setattr__(self, "rewards", tuple(reward_stages))
        if self.reward_bound is None:
            bound = max(float(np.max(np.abs(t))) for stage in self.rewards for t in stage.values())
            object.__setattr__(self, "reward_bound", bound)

    @property
    def num_stage_entries(self) -> int:
        return self.horizon.length if isinstance(self.horizon, Finite) else 1

    @property
    def num_players(self) -> int:
        return self.graph.num_players

    def stage_rewards(self, h: int) -> Mapping[tuple[int, int], np.ndarray]:
        return self.rewards[h if isinstance(self.horizon, Finite) else 0]

    def stage_dynamics(self, h: int):
        return self.dynamics[h if isinstance(self.horizon, Finite) else 0]

    def stage_game(self, h: int, s: int) -> PolymatrixGame:
        """The reward stage game at (h, s) as a normal-form polymatrix game."""
        tables = {e: t[s] for e, t in self.stage_rewards(h).items()}
        return PolymatrixGame(self.graph, self.action_counts, tables,
                              reward_bound=self.reward_bound, zero_sum=self.zero_sum)


@dataclass(frozen=True)
class JointMixture:
    """Correlated joint distribution stored as a convex mixture of product
    profiles; the representation no-regret averaging produces."""

    weights: np.ndarray
    components: tuple[tuple[np.ndarray, ...], ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or len(self.components) != w.shape[0]:
            raise ValueError("one weight per component required")
        if np.any(w < -DEFAULT_TOL) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("mixture weights must form a distribution")
        object.__setattr__(self, "weights", w.copy())
        comps = tuple(tuple(np.asarray(p, dtype=float) for p in comp) for comp in self.components)
        object.__setattr__(self, "components", comps)

    @classmethod
    def single(cls, profile: Sequence[np.ndarray]) -> "JointMixture":
        return cls(np.array([1.0]), (tuple(profile),))

    @property
    def num_players(self) -> int:
        return len(self.components[0])

    def marginal(self, i: int) -> np.ndarray:
        out = np.zeros_like(self.components[0][i])
        for w, comp in zip(self.weights, self.components):
            out += w * comp[i]
        return out

    def marginals(self) -> tuple[np.ndarray, ...]:
        return tuple(self.marginal(i) for i in range(self.num_players))

    def _stacked(self, i: int) -> np.ndarray:
        cache = self.__dict__.setdefault("_stack_cache", {})
        if i not in cache:
            cache[i] = np.stack([comp[i] for comp in self.components])
        return cache[i]

    def pair_marginal(self, i: int, j: int) -> np.ndarray:
        """Joint distribution of (a_i, a_j), shape (A_i, A_j)."""
        return np.einsum("t,ta,tb->ab", self.weights, self._stacked(i),
                         self._stacked(j))


@dataclass(frozen=True)
class ProductPolicy:
    """Per-(stage, state, player) action distributions.

    ``stages[h][s][i]`` is player ``i``'s simplex at stage ``h`` and state
    ``s``.  Stationary policies carry a single stage entry that applies at
    every step.
    """

    stages: tuple[tuple[tuple[np.ndarray, ...], ...], ...]

    def __post_init__(self):
        norm = []
        for stage in self.stages:
            per_state = []
            for profile in stage:
                ps = []
                for p in profile:
                    p = np.asarray(p, dtype=float)
                    if p.ndim != 1 or not _check_simplex(p):
                        raise ValueError("policy entries must be probability vectors")
                    ps.append(p)
                per_state.append(tuple(ps))
            norm.append(tuple(per_state))
        object.__setattr__(self, "stages", tuple(norm))

    @classmethod
    def uniform(cls, game: "NetworkedMarkovGame", stationary: bool | None = None) -> "ProductPolicy":
        if stationary is None:
            stationary = isinstance(game.horizon, Discounted)
        stages = 1 if stationary else game.horizon.length
        one = tuple(tuple(np.full(a, 1.0 / a) for a in game.action_counts)
                    for _ in range(game.num_states))
        return cls(tuple(one for _ in range(stages)))

    @property
    def num_stages(self) -> int:
        return len(self.stages)

    @property
    def is_stationary(self) -> bool:
        return len(self.stages) == 1

    def at(self, h: int, s: int) -> tuple[np.ndarray, ...]:
        return self.stages[h if len(self.stages) > 1 else 0][s]


@dataclass(frozen=True)
class MarkovJointPolicy:
    """Per-(stage, state) correlated policies, each a product mixture."""

    stages: tuple[tuple["JointMixture", ...], ...]

    @property
    def num_stages(self) -> int:
        return len(self.stages)

    def at(self, h: int, s: int) -> "JointMixture":
        return self.stages[h if len(self.stages) > 1 else 0][s]

    def marginal_policy(self) -> ProductPolicy:
        return ProductPolicy(tuple(tuple(mix.marginals() for mix in stage)
                                   for stage in self.stages))


@dataclass(frozen=True)
class ValidationFailure:
    name: str
    location: str
    magnitude: float | None = None
    message: str = ""


@dataclass(frozen=True)
class ValidationReport:
    failures: tuple[ValidationFailure, ...] = ()
    zero_sum_method: str | None = None
    max_zero_sum_violation: float | None = None
    notes: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.failures


def uniform_profile(action_counts: Sequence[int]) -> list[np.ndarray]:
    return [np.full(a, 1.0 / a) for a in action_counts]


def _check_simplex(p: np.ndarray, tol: float = 1e-9) -> bool:
    return bool(np.all(p >= -tol) and abs(p.sum() - 1.0) <= tol)


def validate_polymatrix(game: PolymatrixGame, tol: float = DEFAULT_TOL,
                        enumeration_cap: int = ENUMERATION_CAP) -> ValidationReport:
    """Check structural and zero-sum invariants of a polymatrix game.

    The zero-sum check enumerates all joint actions exactly when their count
    is at most ``enumeration_cap``; beyond that it falls back to the per-edge
    sufficient test (each undirected pair sums to a constant matrix and the
    constants cancel across edges).  The method used is recorded.
    """
    failures: list[ValidationFailure] = []
    notes: list[str] = []

    r = game.reward_bound
    if r is not None:
        for e, t in game.payoffs.items():
            worst = float(np.max(np.abs(t)))
            if worst > r + tol:
                failures.append(ValidationFailure(
                    "reward_bound", f"edge {e}", worst - r,
                    f"|r| up to {worst} exceeds declared bound {r}"))

    method = None
    max_violation = None
    if game.zero_sum:
        total = 1
        for a in game.action_counts:
            total *= a
        if total <= enumeration_cap:
            method = "enumeration"
            max_violation = 0.0
            worst_at = None
            for joint in itertools.product(*(range(a) for a in game.action_counts)):
                v = float(abs(game.joint_rewards(joint).sum()))
                if v > max_violation:
                    max_violation = v
                    worst_at = joint
            if max_violation > tol:
                failures.append(ValidationFailure(
                    "zero_sum", f"joint action {worst_at}", max_violation,
                    f"payoffs sum to {max_violation:.3g} in magnitude"))
        else:
            method = "pairwise"
            max_violation = 0.0
            offsets = 0.0
            for (i, j) in sorted(game.graph.edges):
                pair = game.table(i, j) + game.table(j, i).T
                c = float(pair.mean())
                dev = float(np.max(np.abs(pair - c)))
                max_violation = max(max_violation, dev)
                if dev > tol:
                    failures.append(ValidationFailure(
                        "zero_sum_pairwise", f"edge ({i},{j})", dev,
                        "pair sum is not a constant matrix"))
                offsets += c
            if abs(offsets) > tol:
                max_violation = max(max_violation, abs(offsets))
                failures.append(ValidationFailure(
                    "zero_sum_offsets", "all edges", abs(offsets),
                    f"edge constants sum to {offsets:.3g}"))
            notes.append("zero-sum verified by the pairwise sufficient test only")

    return ValidationReport(tuple(failures), method, max_violation, tuple(notes))


def expected_payoffs(game: PolymatrixGame, profile: Sequence[np.ndarray]) -> np.ndarray:
    """Expected reward of each player under a product profile.

    r_i = sum over neighbors j of pi_i^T r_{i,j} pi_j.  For a zero-sum game
    the entries sum to zero up to float error.
    """
    if len(profile) != game.num_players:
        raise ValueError("one policy per player required")
    for i, p in enumerate(profile):
        if np.asarray(p).shape != (game.action_counts[i],):
            raise ValueError(f"policy {i} has wrong length")
    out = np.zeros(game.num_players)
    for (i, j), t in game.payoffs.items():
        out[i] += profile[i] @ t @ profile[j]
    return out


def validate_nmg(game: NetworkedMarkovGame, tol: float = DEFAULT_TOL,
                 enumeration_cap: int = ENUMERATION_CAP) -> ValidationReport:
    """Check a networked Markov game: controller membership, stochasticity
    and (when flagged) the per-(stage, state) zero-sum property.

    Dense dynamics are routed through the transition structure check; a game
    whose raw kernel is not decomposable over the graph's fully connected
    players is reported as such rather than raising.
    """
    failures: list[ValidationFailure] = []
    notes: list[str] = []
    n_c = game.graph.n_c

    for h, dyn in enumerate(game.dynamics):
        loc = f"stage {h}"
        if isinstance(dyn, EnsembleDynamics):
            bad = set(dyn.controllers) - set(n_c)
            if bad:
                failures.append(ValidationFailure(
                    "controllers", loc, None,
                    f"controllers {sorted(bad)} are not adjacent to all players"))
            if dyn.weights.shape != (game.num_states, len(dyn.controllers)):
                failures.append(ValidationFailure("weights_shape", loc))
            else:
                for s in range(game.num_states):
                    dev = abs(float(dyn.weights[s].sum()) - 1.0)
                    if dev > tol or np.any(dyn.weights[s] < -tol):
                        failures.append(ValidationFailure(
                            "weights", f"{loc}, state {s}", dev,
                            "controller weights are not a distribution"))
            for c in dyn.controllers:
                k = dyn.kernels[c]
                want = (game.num_states, game.action_counts[c], game.num_states)
                if k.shape != want:
                    failures.append(ValidationFailure(
                        "kernel_shape", f"{loc}, controller {c}"))
                    continue
                sums = k.sum(axis=2)
                dev = float(np.max(np.abs(sums - 1.0)))
                if dev > tol or np.any(k < -tol):
                    s, a = np.unravel_index(int(np.argmax(np.abs(sums - 1.0))), sums.shape)
                    failures.append(ValidationFailure(
                        "stochasticity", f"{loc}, controller {c}, row (s={s}, a={a})", dev,
                        f"row sums deviate from 1 by up to {dev:.3g}"))
        elif isinstance(dyn, ConstantDynamics):
            sums = dyn.table.sum(axis=1)
            dev = float(np.max(np.abs(sums - 1.0)))
            if dev > tol or np.any(dyn.table < -tol):
                s = int(np.argmax(np.abs(sums - 1.0)))
                failures.append(ValidationFailure(
                    "stochasticity", f"{loc}, row s={s}", dev,
                    f"row sums to {sums[s]:.6g}"))
        else:
            from . import decomposition  # local import to avoid a cycle
            result = decomposition.check_transition_structure(dyn.kernel, game.graph, tol)
            if not result.ok:
                failures.append(ValidationFailure(
                    "transition_decomposability", loc, result.report.max_residual,
                    "raw kernel is not decomposable over the fully connected player set"))
            else:
                notes.append(f"stage {h}: dense kernel decomposed "
                             f"({'constant' if isinstance(result.dynamics, ConstantDynamics) else 'ensemble'})")

    max_violation = None
    method = None
    if game.zero_sum:
        max_violation = 0.0
        for h in range(game.num_stage_entries):
            for s in range(game.num_states):
                stage = game.stage_game(h, s)
                sub = validate_polymatrix(
                    PolymatrixGame(stage.graph, stage.action_counts, stage.payoffs,
                                   reward_bound=stage.reward_bound, zero_sum=True),
                    tol, enumeration_cap)
                method = sub.zero_sum_method
                if sub.max_zero_sum_violation is not None:
                    max_violation = max(max_violation, sub.max_zero_sum_violation)
                for f in sub.failures:
                    if f.name.startswith("zero_sum"):
                        failures.append(ValidationFailure(
                            f.name, f"stage {h}, state {s}, {f.location}", f.magnitude, f.message))

    return ValidationReport(tuple(failures), method, max_violation, tuple(notes))


def auxiliary_game(game: NetworkedMarkovGame, h: int, values: np.ndarray) -> list[PolymatrixGame]:
    """Per-state stage games with payoffs r + continuation, one per state.

    ``values[i, s']`` are next-stage values.  Pairwise payoffs follow the
    canonical split of the continuation term, so the result is zero-sum
    whenever the reward stage game is and the values sum to zero per state.
    """
    from . import decomposition

    table = decomposition.canonical_q(game, h, values)
    out = []
    for s in range(game.num_states):
        out.append(PolymatrixGame(game.graph, game.action_counts, table.stage_tables[0][s],
                                  reward_bound=None, zero_sum=game.zero_sum))
    return out
