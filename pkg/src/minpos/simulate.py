"""Closed-loop simulation, cost accounting, and certification helpers.

Rollouts integrate x(t+1) = A x(t) + B u(t) + F w(t) under a fixed feedback
u = -L x, tracking running costs so the synthesized price vector can be
checked against realized trajectories.  The closed-loop cost vector p_L of
any admissible stabilizing gain solves the linear system

    p_L = (s - L'r) + (A - B L)' p_L

and dominates the synthesis price vector elementwise, which is the
optimality story in checkable form.  Spectral radius estimation uses power
iteration with the classical eigenvalue bracket for nonnegative matrices,
because the closed loop A - B L is nonnegative whenever |L| <= E and the
positivity hypothesis holds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .model import ProblemInstance

__all__ = [
    "Trajectory",
    "SpectralRadiusResult",
    "InfeasibleGain",
    "UnstableClosedLoop",
    "SingularSystem",
    "DemonstrationFailed",
    "rollout",
    "gauss_solve",
    "closed_loop_cost_vector",
    "spectral_radius",
    "demonstrate_unboundedness",
]


class InfeasibleGain(ValueError):
    """The gain violates |L| <= E somewhere; refused before any stepping."""


class UnstableClosedLoop(RuntimeError):
    """A - B L has spectral radius >= 1; no finite cost vector exists."""


class SingularSystem(RuntimeError):
    """Elimination pivots collapsed; the closed loop sits at the rho = 1 boundary."""


class DemonstrationFailed(RuntimeError):
    """No disturbance channel has positive reward rate; nothing to demonstrate."""


@dataclass(frozen=True)
class Trajectory:
    """One rollout: states x(0..T), inputs u(0..T-1), disturbances w(0..T-1).

    partial_costs has length T+1 with entry k the cost accumulated over the
    first k stages, sum_{t<k} (s'x(t) + r'u(t) - gamma'w(t)); entry 0 is
    zero and entry T is the full horizon cost.
    """

    states: np.ndarray
    inputs: np.ndarray
    disturbances: np.ndarray
    partial_costs: np.ndarray

    def __post_init__(self):
        for fld in ("states", "inputs", "disturbances", "partial_costs"):
            arr = np.asarray(getattr(self, fld), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, fld, arr)

    @property
    def horizon(self) -> int:
        return self.inputs.shape[0]


@dataclass(frozen=True)
class SpectralRadiusResult:
    """Power-iteration outcome: lower <= rho(M) <= upper always holds.

    estimate equals the final upper bound, which is the side that keeps
    converging to rho even for reducible matrices (triangular closed loops
    are common here); for such matrices the lower bound can stall strictly
    below rho, in which case converged stays False and the bracket is the
    honest answer.
    """

    estimate: float
    lower: float
    upper: float
    iterations: int
    converged: bool


def _check_gain(instance: ProblemInstance, L: np.ndarray) -> np.ndarray:
    L = np.ascontiguousarray(L, dtype=float)
    if L.shape != (instance.m, instance.n):
        raise ValueError(f"gain shape {L.shape}, expected {(instance.m, instance.n)}")
    if np.any(np.abs(L) > instance.E):
        raise InfeasibleGain("gain exceeds the input bound matrix E somewhere")
    return L


def rollout(
    instance: ProblemInstance,
    K: np.ndarray,
    x0: np.ndarray,
    w_seq: np.ndarray,
    horizon: int | None = None,
) -> Trajectory:
    """Simulate u = -K x from x0 under the given disturbance sequence.

    w_seq has one row per step; horizon (default: all of w_seq) truncates
    it.  Requires |K| <= E, x0 >= 0, and w_seq >= 0; under the positivity
    hypothesis the state then stays in the nonnegative orthant exactly.
    """
    K = _check_gain(instance, K)
    x0 = np.ascontiguousarray(x0, dtype=float)
    if x0.shape != (instance.n,):
        raise ValueError(f"x0 shape {x0.shape}, expected {(instance.n,)}")
    if np.any(x0 < 0):
        raise ValueError("x0 must be elementwise nonnegative")
    w_seq = np.ascontiguousarray(np.atleast_2d(np.asarray(w_seq, dtype=float)))
    if w_seq.shape[1] != instance.l:
        raise ValueError(f"w_seq has {w_seq.shape[1]} columns, expected {instance.l}")
    if horizon is None:
        horizon = w_seq.shape[0]
    if horizon > w_seq.shape[0]:
        raise ValueError("horizon exceeds the disturbance sequence length")
    w_seq = np.ascontiguousarray(w_seq[:horizon])
    if np.any(w_seq < 0):
        raise ValueError("disturbances must be elementwise nonnegative")

    n, m = instance.n, instance.m
    X = np.empty((horizon + 1, n))
    U = np.empty((horizon, m))
    C = np.empty(horizon + 1)
    X[0] = x0
    C[0] = 0.0
    kernels.rollout_steps(
        np.ascontiguousarray(instance.A),
        np.ascontiguousarray(instance.B),
        np.ascontiguousarray(instance.F),
        K,
        np.ascontiguousarray(instance.s),
        np.ascontiguousarray(instance.r),
        np.ascontiguousarray(instance.gamma),
        w_seq,
        X,
        U,
        C,
    )
    return Trajectory(states=X, inputs=U, disturbances=w_seq, partial_costs=C)


def gauss_solve(M: np.ndarray, b: np.ndarray, pivot_tol: float = 1e-12) -> np.ndarray:
    """Solve M x = b by Gaussian elimination with partial pivoting.

    Raises SingularSystem when the best available pivot falls below
    pivot_tol in magnitude, which for the closed-loop systems here means
    the spectral radius sits numerically at 1.
    """
    M = np.array(M, dtype=float)
    b = np.array(b, dtype=float)
    n = M.shape[0]
    if M.shape != (n, n) or b.shape != (n,):
        raise ValueError("need a square matrix and matching vector")
    for col in range(n):
        piv = col + int(np.argmax(np.abs(M[col:, col])))
        if abs(M[piv, col]) < pivot_tol:
            raise SingularSystem(f"pivot {abs(M[piv, col]):.3e} below tolerance in column {col}")
        if piv != col:
            M[[col, piv]] = M[[piv, col]]
            b[[col, piv]] = b[[piv, col]]
        factors = M[col + 1 :, col] / M[col, col]
        M[col + 1 :, col:] -= np.outer(factors, M[col, col:])
        b[col + 1 :] -= factors * b[col]
    x = np.empty(n)
    for row in range(n - 1, -1, -1):
        x[row] = (b[row] - M[row, row + 1 :] @ x[row + 1 :]) / M[row, row]
    return x


def closed_loop_cost_vector(
    instance: ProblemInstance, L: np.ndarray, pivot_tol: float = 1e-12
) -> np.ndarray:
    """Cost vector p_L of the feedback u = -L x, if the closed loop is stable.

    Solves (I - (A - B L)') p_L = s - L'r directly.  For a nonnegative
    closed-loop matrix (guaranteed by |L| <= E plus the positivity
    hypothesis) stability is equivalent to this solution being elementwise
    nonnegative, so the sign of the solution is itself the stability test:
    a negative component raises UnstableClosedLoop, a pivot collapse raises
    SingularSystem (the rho = 1 boundary).
    """
    L = _check_gain(instance, L)
    closed = instance.A - instance.B @ L
    if np.any(closed < 0):
        raise ValueError(
            "closed loop A - B L has negative entries; the stability test "
            "requires the positivity hypothesis"
        )
    M = np.eye(instance.n) - closed.T
    rhs = instance.s - L.T @ instance.r
    p_L = gauss_solve(M, rhs, pivot_tol=pivot_tol)
    if np.any(p_L < 0):
        raise UnstableClosedLoop(
            "the cost system has a negative solution component, so rho(A - B L) >= 1"
        )
    return p_L


def spectral_radius(
    M: np.ndarray, tol: float = 1e-10, max_iter: int = 10_000
) -> SpectralRadiusResult:
    """Bracket the spectral radius of a nonnegative matrix by power iteration.

    Starts from the all-ones vector; each iterate yields the valid bracket
    min_i (Mv)_i/v_i <= rho <= max_i (Mv)_i/v_i, monotone in both ends.
    Declared converged when the bracket width reaches tol; reducible
    matrices can stall the lower end, in which case the result reports
    converged=False with the final bracket (the upper end still approaches
    rho from above).  Iterate components are floored at a tiny positive
    value so the ratios stay defined when directions decouple.
    """
    M = np.ascontiguousarray(M, dtype=float)
    n = M.shape[0]
    if M.ndim != 2 or M.shape != (n, n) or n < 1:
        raise ValueError("need a square nonempty matrix")
    if not np.isfinite(M).all():
        raise ValueError("nonfinite entries")
    if np.any(M < 0):
        raise ValueError("the bracket requires an elementwise nonnegative matrix")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    v = np.ones(n)
    lower, upper, iterations, converged = kernels.power_bracket(
        M, v, float(tol), int(max_iter), 1e-300
    )
    return SpectralRadiusResult(
        estimate=float(upper),
        lower=float(lower),
        upper=float(upper),
        iterations=int(iterations),
        converged=bool(converged),
    )


def demonstrate_unboundedness(
    instance: ProblemInstance,
    K: np.ndarray,
    x0: np.ndarray,
    bound: float,
    *,
    max_steps: int = 10_000_000,
    chunk: int = 4096,
) -> tuple[np.ndarray, int]:
    """Exhibit a disturbance driving the running cost past any bound.

    Picks the channel j maximizing (F'p_K - gamma)_j, where p_K is the
    closed-loop cost vector of K, and applies the constant unit disturbance
    w(t) = e_j.  The running cost then grows linearly at asymptotic rate
    (F'p_K - gamma)_j per step.  Returns (w_seq, t_exceed) where t_exceed
    is the first horizon whose accumulated cost exceeds ``bound`` and w_seq
    is the disturbance sequence of exactly that length, replayable through
    :func:`rollout`.

    Raises DemonstrationFailed when no channel has positive rate (the
    disturbance price gamma covers F'p_K, so costs stay bounded), and
    RuntimeError if the bound is not crossed within max_steps.
    """
    K = _check_gain(instance, K)
    p_K = closed_loop_cost_vector(instance, K)
    rates = instance.F.T @ p_K - instance.gamma
    comp = int(np.argmax(rates))
    if rates[comp] <= 0:
        raise DemonstrationFailed(
            "every disturbance channel has nonpositive reward rate F'p_K - gamma"
        )
    n, m, l = instance.n, instance.m, instance.l
    w_unit = np.zeros(l)
    w_unit[comp] = 1.0

    A = np.ascontiguousarray(instance.A)
    B = np.ascontiguousarray(instance.B)
    F = np.ascontiguousarray(instance.F)
    s = np.ascontiguousarray(instance.s)
    r = np.ascontiguousarray(instance.r)
    gamma = np.ascontiguousarray(instance.gamma)

    x = np.ascontiguousarray(x0, dtype=float)
    if x.shape != (n,) or np.any(x < 0):
        raise ValueError("x0 must be a nonnegative n-vector")
    W = np.ascontiguousarray(np.tile(w_unit, (chunk, 1)))
    X = np.empty((chunk + 1, n))
    U = np.empty((chunk, m))
    C = np.empty(chunk + 1)
    offset = 0.0
    done = 0
    while done < max_steps:
        X[0] = x
        C[0] = offset
        kernels.rollout_steps(A, B, F, K, s, r, gamma, W, X, U, C)
        over = np.nonzero(C[1:] > bound)[0]
        if over.size:
            t_exceed = done + int(over[0]) + 1
            return np.tile(w_unit, (t_exceed, 1)), t_exceed
        x = X[-1].copy()
        offset = C[-1]
        done += chunk
    raise RuntimeError(f"cost did not exceed {bound} within {max_steps} steps")
