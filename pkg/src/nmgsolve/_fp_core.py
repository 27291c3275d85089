"""Compiled inner loop for star-game fictitious play.

The belief dynamics run for millions of steps on tiny tables, so the loop
is jitted.  Player "slots" put the star center at 0 and the leaves after
it; the caller maps to and from original player indices.  All randomness
comes from numba's own stream seeded once at entry, which makes a run
bitwise reproducible for a fixed seed.
"""

from __future__ import annotations

import numpy as np
from numba import njit

SCHED_POWER = 0
SCHED_HARMONIC = 1
SCHED_CUSTOM = 2


@njit(cache=True)
def _step(kind, p, table, n_visit):
    if kind == SCHED_POWER:
        return n_visit ** (-p)
    if kind == SCHED_HARMONIC:
        return 1.0 / n_visit
    idx = n_visit - 1
    if idx >= table.shape[0]:
        idx = table.shape[0] - 1
    return table[idx]


@njit(cache=True)
def run(num_states, n, acts, r_c, r_o, p1, gamma,
        alpha_kind, alpha_p, alpha_table,
        beta_kind, beta_p, beta_table,
        iters, seed, stride, eps_explore, s0,
        qc, qo):
    """Simulate the coupled belief dynamics; returns snapshots and state.

    Shapes (slot order, center = slot 0, m indexes the n-1 leaves):
      acts: (n,) action counts; a_max = max(acts)
      r_c:  (n-1, S, A_c, a_max)   center vs leaf m payoffs
      r_o:  (n-1, S, a_max, A_c)   leaf m vs center payoffs
      p1:   (S, A_c, S)            center's controller kernel
      qc, qo: belief tables, same shapes as r_c / r_o (updated in place)
    """
    np.random.seed(seed)
    a_c = acts[0]
    a_max = 0
    for j in range(n):
        if acts[j] > a_max:
            a_max = acts[j]

    pi = np.zeros((n, num_states, a_max))
    for j in range(n):
        for s in range(num_states):
            for a in range(acts[j]):
                pi[j, s, a] = 1.0 / acts[j]

    visits = np.zeros(num_states, dtype=np.int64)
    vhat = np.zeros((n, num_states))
    actions = np.zeros(n, dtype=np.int64)

    num_snaps = (iters + stride - 1) // stride + 1 if iters > 0 else 1
    snap_iters = np.zeros(num_snaps, dtype=np.int64)
    snap_v = np.zeros((num_snaps, n, num_states))
    snap_idx = 0

    s = s0
    for k in range(iters):
        visits[s] += 1

        # Greedy actions against current beliefs (lowest index on ties).
        best = -1.0e300
        a0 = 0
        for a in range(a_c):
            val = 0.0
            for m in range(n - 1):
                for b in range(acts[m + 1]):
                    val += pi[m + 1, s, b] * qc[m, s, a, b]
            if val > best:
                best = val
                a0 = a
        actions[0] = a0
        for m in range(n - 1):
            best = -1.0e300
            ai = 0
            for a in range(acts[m + 1]):
                val = 0.0
                for b in range(a_c):
                    val += pi[0, s, b] * qo[m, s, a, b]
                if val > best:
                    best = val
                    ai = a
            actions[m + 1] = ai

        # Value beliefs refreshed at every state from current tables.
        for st in range(num_states):
            best = -1.0e300
            for a in range(a_c):
                val = 0.0
                for m in range(n - 1):
                    for b in range(acts[m + 1]):
                        val += pi[m + 1, st, b] * qc[m, st, a, b]
                if val > best:
                    best = val
            vhat[0, st] = best
            for m in range(n - 1):
                best = -1.0e300
                for a in range(acts[m + 1]):
                    val = 0.0
                    for b in range(a_c):
                        val += pi[0, st, b] * qo[m, st, a, b]
                    if val > best:
                        best = val
                vhat[m + 1, st] = best

        if k % stride == 0:
            snap_iters[snap_idx] = k
            for j in range(n):
                for st in range(num_states):
                    snap_v[snap_idx, j, st] = vhat[j, st]
            snap_idx += 1

        alpha = _step(alpha_kind, alpha_p, alpha_table, visits[s])
        beta = _step(beta_kind, beta_p, beta_table, visits[s])

        # Policy beliefs move toward the realized play at the visited state.
        for j in range(n):
            aj = actions[j]
            for a in range(acts[j]):
                pi[j, s, a] *= 1.0 - alpha
            pi[j, s, aj] += alpha

        # Q beliefs move toward the one-step target at the visited state.
        inv = 1.0 / (n - 1)
        for a in range(a_c):
            cont_c = 0.0
            for s2 in range(num_states):
                cont_c += p1[s, a, s2] * vhat[0, s2]
            cont_c *= gamma * inv
            for m in range(n - 1):
                for b in range(acts[m + 1]):
                    target = r_c[m, s, a, b] + cont_c
                    qc[m, s, a, b] += beta * (target - qc[m, s, a, b])
        for m in range(n - 1):
            for b in range(a_c):
                cont_i = 0.0
                for s2 in range(num_states):
                    cont_i += p1[s, b, s2] * vhat[m + 1, s2]
                cont_i *= gamma
                for a in range(acts[m + 1]):
                    target = r_o[m, s, a, b] + cont_i
                    qo[m, s, a, b] += beta * (target - qo[m, s, a, b])

        # Transition under the center's kernel, optionally mixed with a
        # uniform restart to keep every state recurrent.
        if eps_explore > 0.0 and np.random.random() < eps_explore:
            s = int(np.random.random() * num_states)
            if s >= num_states:
                s = num_states - 1
        else:
            u = np.random.random()
            acc = 0.0
            nxt = num_states - 1
            for s2 in range(num_states):
                acc += p1[s, a0, s2]
                if u < acc:
                    nxt = s2
                    break
            s = nxt

    # Final value beliefs after the last update.
    for st in range(num_states):
        best = -1.0e300
        for a in range(a_c):
            val = 0.0
            for m in range(n - 1):
                for b in range(acts[m + 1]):
                    val += pi[m + 1, st, b] * qc[m, st, a, b]
            if val > best:
                best = val
        vhat[0, st] = best
        for m in range(n - 1):
            best = -1.0e300
            for a in range(acts[m + 1]):
                val = 0.0
                for b in range(a_c):
                    val += pi[0, st, b] * qo[m, st, a, b]
                if val > best:
                    best = val
            vhat[m + 1, st] = best
    snap_iters[snap_idx] = iters
    for j in range(n):
        for st in range(num_states):
            snap_v[snap_idx, j, st] = vhat[j, st]
    snap_idx += 1

    return snap_iters[:snap_idx], snap_v[:snap_idx], pi, visits, s
