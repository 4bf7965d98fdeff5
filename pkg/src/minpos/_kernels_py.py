"""Pure numpy implementations of the hot inner loops.

This module is the reference semantics for the compiled extension
``minpos._kernels``; the two are interchangeable behind
:mod:`minpos._backend`.  Each backend is deterministic on its own; across
backends results may differ in the last bits because numpy reductions and
plain C loops round differently.

Kernel contracts
----------------
simplex_loop(T, basis, pivot_tol, max_pivots, pivots)
    Bland-rule pivoting on a maximization tableau until optimal, unbounded,
    or the pivot budget is hit.  T has one row per constraint, columns
    ``[variables | rhs]``, and the last row holds the reduced costs (entry
    > pivot_tol means improving).  basis[i] is the variable index basic in
    row i.  Mutates T and basis in place.  Returns (code, col, pivots):
    code 0 optimal, 1 unbounded with col the entering column, 2 budget
    exhausted.

value_iter_chunk(AT, BT, ET, FT, s, r, gamma, p, out, tol, feas_tol, bound)
    Runs Bellman updates p <- s + A'p - E'|r + B'p| writing successive
    iterates into the rows of ``out`` and updating ``p`` in place.  Before
    each update the disturbance-price check F'p <= gamma + feas_tol runs on
    the current iterate.  Returns (code, steps, delta, component): code 0
    chunk exhausted, 1 converged (max-norm step <= tol), 2 price check
    failed before the next update (component = offending disturbance
    channel; p holds the violating iterate), 3 iterate norm passed ``bound``
    or stopped being finite.  ``steps`` counts updates performed within the
    chunk; rows out[:steps] are valid.

rollout_steps(A, B, F, K, s, r, gamma, W, X, U, C)
    Closed-loop rollout under u = -K x.  The caller presets X[0] and C[0]
    (C[0] carries a cost offset so trajectories can be continued in
    chunks).  For t in range(len(W)): U[t] = -K X[t]; C[t+1] = C[t] +
    s.X[t] + r.U[t] - gamma.W[t]; X[t+1] = A X[t] + B U[t] + F W[t].

power_bracket(M, v, tol, max_iter, floor)
    Power iteration on a nonnegative square matrix starting from ``v``
    (mutated in place), tracking the eigenvalue bracket
    min_i (Mv)_i / v_i <= rho(M) <= max_i (Mv)_i / v_i.  After each step v
    is sup-normalized and clamped below by ``floor`` so the ratios stay
    defined; the bracket is valid for any positive v.  Returns (lower,
    upper, iterations, converged) where converged means the bracket width
    came within tol.
"""

from __future__ import annotations

import numpy as np

__all__ = ["simplex_loop", "value_iter_chunk", "rollout_steps", "power_bracket"]

BACKEND_NAME = "python"


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row, :] /= T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, T[row, :])
    # Scrub roundoff in the pivot column; it is a unit vector by construction.
    T[:, col] = 0.0
    T[row, col] = 1.0


def simplex_loop(T, basis, pivot_tol, max_pivots, pivots):
    nrows = T.shape[0] - 1
    while True:
        reduced = T[-1, :-1]
        improving = np.nonzero(reduced > pivot_tol)[0]
        if improving.size == 0:
            return 0, -1, pivots
        col = int(improving[0])  # Bland: smallest improving index
        pivcol = T[:nrows, col]
        eligible = np.nonzero(pivcol > pivot_tol)[0]
        if eligible.size == 0:
            return 1, col, pivots
        ratios = T[eligible, -1] / pivcol[eligible]
        best = ratios.min()
        ties = eligible[ratios == best]
        row = int(ties[np.argmin(basis[ties])])  # Bland: smallest basic index
        if pivots >= max_pivots:
            return 2, col, pivots
        _pivot(T, row, col)
        basis[row] = col
        pivots += 1


def value_iter_chunk(AT, BT, ET, FT, s, r, gamma, p, out, tol, feas_tol, bound):
    steps = out.shape[0]
    delta = np.inf
    for k in range(steps):
        excess = FT @ p - gamma
        comp = int(np.argmax(excess))
        if excess[comp] > feas_tol:
            return 2, k, 0.0, comp
        q = r + BT @ p
        nxt = s + AT @ p - ET @ np.abs(q)
        out[k, :] = nxt
        delta = float(np.max(np.abs(nxt - p)))
        p[:] = nxt
        top = float(np.max(np.abs(nxt)))
        if not np.isfinite(top) or top > bound:
            return 3, k + 1, delta, -1
        if delta <= tol:
            return 1, k + 1, delta, -1
    return 0, steps, delta, -1


def rollout_steps(A, B, F, K, s, r, gamma, W, X, U, C):
    horizon = W.shape[0]
    for t in range(horizon):
        x = X[t]
        u = -(K @ x)
        U[t, :] = u
        C[t + 1] = C[t] + (s @ x + r @ u - gamma @ W[t])
        X[t + 1, :] = A @ x + B @ u + F @ W[t]


def power_bracket(M, v, tol, max_iter, floor):
    lower = -np.inf
    upper = np.inf
    for it in range(1, max_iter + 1):
        w = M @ v
        ratios = w / v
        lower = float(ratios.min())
        upper = float(ratios.max())
        if upper - lower <= tol:
            return lower, upper, it, True
        top = float(np.max(np.abs(w)))
        v[:] = np.maximum(w / top, floor)
    return lower, upper, max_iter, False
