"""Dense two-phase simplex for the tiny LPs arising from stage games.

Problems here have a handful of variables (one simplex per player plus a
few value variables), so a dense method with Bland's anti-cycling rule is
fast enough and deterministic, which the replay guarantees rely on.  The
working tableau is refactorized from the original data periodically and at
termination, so the answer is exact to round-off for the final basis
instead of drifting with accumulated pivots, and optimality is verified
against freshly computed reduced costs.
"""

from __future__ import annotations

import numpy as np

__all__ = ["solve_lp", "LPError"]

PIVOT_TOL = 1e-9
COST_TOL = 1e-10
REFRESH_EVERY = 25
MAX_PIVOTS = 20000


class LPError(RuntimeError):
    pass


def _rebuild(a: np.ndarray, b: np.ndarray, basis: np.ndarray):
    """Canonical tableau [B^-1 A | B^-1 b] and fresh reduced-cost basis."""
    try:
        sol = np.linalg.solve(a[:, basis], np.column_stack([a, b]))
    except np.linalg.LinAlgError as err:
        raise LPError(f"singular basis during simplex: {err}") from err
    return sol[:, :-1], sol[:, -1]


def _pivot(tab: np.ndarray, rhs: np.ndarray, basis: np.ndarray,
           row: int, col: int) -> None:
    piv = tab[row, col]
    tab[row] /= piv
    rhs[row] /= piv
    for r in range(tab.shape[0]):
        if r != row:
            f = tab[r, col]
            if f != 0.0:
                tab[r] -= f * tab[row]
                rhs[r] -= f * rhs[row]
    basis[row] = col


def _run(a: np.ndarray, b: np.ndarray, cost: np.ndarray, basis: np.ndarray) -> None:
    """Minimize ``cost`` starting from the feasible ``basis`` (in place).

    Entering variable: lowest index with negative reduced cost (Bland).
    Leaving variable: min ratio, ties to the lowest basis index (Bland).
    """
    m = a.shape[0]
    tab, rhs = _rebuild(a, b, basis)
    np.clip(rhs, 0.0, None, out=rhs)
    pivots = 0
    since_refresh = 0
    while True:
        red = cost - cost[basis] @ tab
        red[basis] = 0.0
        entering = -1
        for j in range(red.shape[0]):
            if red[j] < -COST_TOL:
                entering = j
                break
        if entering < 0:
            if since_refresh == 0:
                return
            tab, rhs = _rebuild(a, b, basis)  # verify against fresh data
            np.clip(rhs, 0.0, None, out=rhs)
            since_refresh = 0
            continue
        leaving = -1
        best = np.inf
        for r in range(m):
            coef = tab[r, entering]
            if coef > PIVOT_TOL:
                ratio = rhs[r] / coef
                if ratio < best - 1e-12 or (ratio <= best + 1e-12 and
                                            (leaving < 0 or basis[r] < basis[leaving])):
                    if ratio < best:
                        best = ratio
                    leaving = r
        if leaving < 0:
            raise LPError("unbounded linear program")
        _pivot(tab, rhs, basis, leaving, entering)
        pivots += 1
        since_refresh += 1
        if pivots > MAX_PIVOTS:
            raise LPError("simplex did not terminate (pivot cap reached)")
        if since_refresh >= REFRESH_EVERY:
            tab, rhs = _rebuild(a, b, basis)
            np.clip(rhs, 0.0, None, out=rhs)
            since_refresh = 0


def solve_lp(c: np.ndarray, a_eq: np.ndarray, b_eq: np.ndarray) -> tuple[np.ndarray, float]:
    """Solve ``min c @ x  s.t.  a_eq @ x = b_eq, x >= 0``.

    Returns ``(x, objective)`` with ``x`` recomputed exactly from the final
    basis.  Raises :class:`LPError` when infeasible or unbounded.
    """
    c = np.asarray(c, dtype=float)
    a = np.asarray(a_eq, dtype=float).copy()
    b = np.asarray(b_eq, dtype=float).copy()
    m, n = a.shape
    if c.shape != (n,) or b.shape != (m,):
        raise ValueError("inconsistent LP dimensions")
    neg = b < 0
    a[neg] *= -1.0
    b[neg] *= -1.0

    # Phase 1 on [A | I] starting from the artificial identity basis.
    a1 = np.column_stack([a, np.eye(m)])
    cost1 = np.concatenate([np.zeros(n), np.ones(m)])
    basis = np.arange(n, n + m)
    _run(a1, b, cost1, basis)
    tab, rhs = _rebuild(a1, b, basis)
    resid = float(rhs[basis >= n].sum()) if np.any(basis >= n) else 0.0
    if resid > 1e-8:
        raise LPError(f"infeasible linear program (artificial residual {resid:.3g})")

    # Drive remaining artificials out; rows where no original column can
    # pivot are redundant and dropped.
    drop = []
    for r in range(m):
        if basis[r] >= n:
            col = -1
            for j in range(n):
                if abs(tab[r, j]) > 1e-7:
                    col = j
                    break
            if col >= 0:
                _pivot(tab, rhs, basis, r, col)
            else:
                drop.append(r)
    if drop:
        keep = [r for r in range(m) if r not in drop]
        a = a[keep]
        b = b[keep]
        basis = basis[keep]
        m = len(keep)
    if np.any(basis >= n):
        raise LPError("could not eliminate artificial variables")

    _run(a, b, c, basis)
    x = np.zeros(n)
    try:
        x[basis] = np.linalg.solve(a[:, basis], b)
    except np.linalg.LinAlgError as err:
        raise LPError(f"singular final basis: {err}") from err
    np.clip(x, 0.0, None, out=x)
    return x, float(c @ x)
