"""Value iteration for the price vector, independent of the LP route.

The finite-horizon values of the minimax problem are linear in the state,
J_k(x) = p_k'x, and the coefficient vectors obey the recursion

    p_0 = 0,    p_k = s + A' p_{k-1} - E' |r + B' p_{k-1}|

as long as the disturbance maximization stays bounded, i.e. F' p_{k-1} <=
gamma.  Under the standing hypotheses the sequence is elementwise
nondecreasing (up to roundoff) and either converges to the same price
vector the synthesis program finds, or certifies that no finite value
exists: a price-check failure at some iterate k means horizon-k disturbances
already extract unbounded reward, and blow-up past any bound means the
undisturbed cost itself diverges.

This module never calls the LP solver; agreement between the two routes is
a meaningful cross-check, not a tautology.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._backend import kernels
from .model import ProblemInstance

__all__ = [
    "Verdict",
    "GammaViolated",
    "ValueIterationTrace",
    "worst_case_disturbance_gain",
    "iterate_step",
    "value_iterate",
]

_CHUNK = 4096


class Verdict(str, Enum):
    CONVERGED = "Converged"
    DIVERGING = "Diverging"
    GAMMA_VIOLATED = "GammaViolated"
    #: iteration budget exhausted with no verdict; inconclusive, never
    #: reported as converged.
    MAX_ITER_EXCEEDED = "MaxIterExceeded"


@dataclass(frozen=True)
class GammaViolated:
    """The disturbance-price check failed: (F'p)_component > gamma_component.

    Signals that the value is +infinity for every initial state exciting the
    offending channel.
    """

    component: int
    coupling: float
    penalty: float

    @property
    def excess(self) -> float:
        return self.coupling - self.penalty


@dataclass(frozen=True)
class ValueIterationTrace:
    """Recorded run of the recursion.

    iterates stacks p_0 (all zeros) through the last computed iterate, row
    per iterate; when recording was disabled only the first and last rows
    are kept.  iterations counts updates performed.  final_delta is the
    max-norm of the last step.  For GAMMA_VIOLATED, violation carries the
    offending component and violation_iteration the index k of the iterate
    p_k that failed the check (the last row of iterates).
    """

    iterates: np.ndarray
    verdict: Verdict
    iterations: int
    final_delta: float
    violation: GammaViolated | None = None
    violation_iteration: int | None = None

    def __post_init__(self):
        arr = np.array(self.iterates, dtype=float, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "iterates", arr)

    @property
    def p(self) -> np.ndarray:
        """Last iterate; the price vector when the verdict is CONVERGED."""
        return self.iterates[-1]


def worst_case_disturbance_gain(p: np.ndarray, instance: ProblemInstance) -> np.ndarray:
    """Per-channel reward rate F'p - gamma of a unit constant disturbance.

    Positive components are the channels along which an adversary extracts
    unbounded reward; all components nonpositive is exactly the finiteness
    condition gamma >= F'p.
    """
    return instance.F.T @ np.asarray(p, dtype=float) - instance.gamma


def iterate_step(
    p_prev: np.ndarray, instance: ProblemInstance, feas_tol: float = 1e-8
) -> np.ndarray | GammaViolated:
    """One Bellman update, with the price check on the incoming iterate.

    Returns the next iterate, or a GammaViolated record naming the most
    violated disturbance channel when F'p_prev exceeds gamma by more than
    feas_tol somewhere.  The tolerance lets the boundary case gamma = F'p*
    iterate cleanly.
    """
    p_prev = np.asarray(p_prev, dtype=float)
    excess = worst_case_disturbance_gain(p_prev, instance)
    comp = int(np.argmax(excess))
    if excess[comp] > feas_tol:
        return GammaViolated(
            component=comp,
            coupling=float(instance.F.T[comp] @ p_prev),
            penalty=float(instance.gamma[comp]),
        )
    q = instance.r + instance.B.T @ p_prev
    return instance.s + instance.A.T @ p_prev - instance.E.T @ np.abs(q)


def value_iterate(
    instance: ProblemInstance,
    *,
    tol: float = 1e-10,
    max_iter: int = 100_000,
    divergence_bound: float = 1e12,
    feas_tol: float = 1e-8,
    record_iterates: bool = True,
) -> ValueIterationTrace:
    """Run the recursion from p_0 = 0 until a verdict or the budget.

    Stops CONVERGED when a step moves less than tol in max-norm, DIVERGING
    when an iterate's max-norm passes divergence_bound (or stops being
    finite), GAMMA_VIOLATED when the price check fails before an update,
    and MAX_ITER_EXCEEDED when max_iter updates ran without any of those.
    The standing hypotheses are assumed; without them the monotonicity and
    convergence guarantees are void.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    n = instance.n
    AT = np.ascontiguousarray(instance.A.T)
    BT = np.ascontiguousarray(instance.B.T)
    ET = np.ascontiguousarray(instance.E.T)
    FT = np.ascontiguousarray(instance.F.T)
    s = np.ascontiguousarray(instance.s)
    r = np.ascontiguousarray(instance.r)
    gamma = np.ascontiguousarray(instance.gamma)

    p = np.zeros(n)
    blocks = [np.zeros((1, n))]
    total = 0
    delta = np.inf
    verdict = Verdict.MAX_ITER_EXCEEDED
    violation = None
    violation_iteration = None

    while total < max_iter:
        chunk = min(_CHUNK, max_iter - total)
        out = np.empty((chunk, n))
        code, steps, delta, comp = kernels.value_iter_chunk(
            AT, BT, ET, FT, s, r, gamma, p, out, tol, feas_tol, divergence_bound
        )
        if steps:
            if record_iterates:
                blocks.append(out[:steps].copy())
            else:
                blocks[1:] = [out[steps - 1 : steps].copy()]
        total += steps
        if code == 1:
            verdict = Verdict.CONVERGED
            break
        if code == 2:
            verdict = Verdict.GAMMA_VIOLATED
            violation = GammaViolated(
                component=comp,
                coupling=float(FT[comp] @ p),
                penalty=float(gamma[comp]),
            )
            violation_iteration = total
            break
        if code == 3:
            verdict = Verdict.DIVERGING
            break

    return ValueIterationTrace(
        iterates=np.vstack(blocks),
        verdict=verdict,
        iterations=total,
        final_delta=float(delta) if total else float("nan"),
        violation=violation,
        violation_iteration=violation_iteration,
    )
