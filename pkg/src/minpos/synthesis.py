"""Controller synthesis: price vector, disturbance-price threshold, sparse gain.

The minimax value of the control problem, when finite, is linear in the
initial state: value(x0) = p'x0 for a nonnegative price vector p.  That p is
the optimum of a small linear program over (p, zeta) in which zeta bounds
|r + B'p| rowwise:

    maximize    1'p
    subject to  (I - A') p + E' zeta <= s
                -B' p - zeta <= r
                 B' p - zeta <= -r
                 p, zeta >= 0

The value is finite for every nonnegative initial state exactly when the
disturbance price is high enough, gamma >= F'p componentwise.  The optimal
feedback u = -K x is closed form in p: row i of K is sign(r_i + B_i'p) E_i,
so the gain inherits the sparsity of the input-bound matrix E.  A zero row
sum r_i + B_i'p maps to a zero gain row (the input is cost-indifferent).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import lp
from .model import HypothesisReport, ProblemInstance, check_hypotheses, validate

__all__ = [
    "SynthesisStatus",
    "SynthesisCertificate",
    "build_lp",
    "gamma_threshold",
    "extract_gain",
    "bellman_residual",
    "synthesize",
]


class SynthesisStatus(str, Enum):
    SYNTHESIZED = "Synthesized"
    NO_FINITE_VALUE = "NoFiniteValue"
    HYPOTHESES_VIOLATED = "HypothesesViolated"
    #: the LP came back infeasible, which the standing hypotheses exclude
    #: (p = 0, zeta = |r| always satisfies the constraints); reaching this
    #: status signals a solver defect, not a property of the instance.
    INTERNAL_ERROR = "InternalError"


@dataclass(frozen=True)
class SynthesisCertificate:
    """Everything synthesize() established about an instance.

    For SYNTHESIZED: p and zeta solve the synthesis program, gamma_min =
    F'p is the componentwise disturbance-price threshold, gamma_ok records
    gamma >= gamma_min (within feas_tol), K is the extracted gain, q =
    r + B'p carries the row signs, and bellman_residual is
    p - (s + A'p - E'|q|), which is ~0 at the optimum.  For
    NO_FINITE_VALUE the LP certificate ray is attached instead.  The
    hypothesis report is always present.
    """

    status: SynthesisStatus
    hypothesis_report: HypothesisReport
    p: np.ndarray | None = None
    zeta: np.ndarray | None = None
    gamma_min: np.ndarray | None = None
    gamma_ok: bool | None = None
    K: np.ndarray | None = None
    q: np.ndarray | None = None
    bellman_residual: np.ndarray | None = None
    lp_status: lp.LpStatus | None = None
    lp_iterations: int | None = None
    lp_objective: float | None = None
    unbounded_ray: np.ndarray | None = None

    def __post_init__(self):
        for fld in ("p", "zeta", "gamma_min", "K", "q", "bellman_residual", "unbounded_ray"):
            val = getattr(self, fld)
            if val is not None:
                arr = np.array(val, dtype=float, copy=True)
                arr.setflags(write=False)
                object.__setattr__(self, fld, arr)


def build_lp(instance: ProblemInstance) -> lp.LpProblem:
    """Assemble the synthesis program over z = (p, zeta).

    Exactly n + 2m constraints in n + m nonnegative variables; the
    objective rewards only the p block.  The disturbance data F and gamma
    do not appear: they enter through gamma_threshold afterwards.
    """
    n, m = instance.n, instance.m
    A, B, E = instance.A, instance.B, instance.E
    G = np.zeros((n + 2 * m, n + m))
    G[:n, :n] = np.eye(n) - A.T
    G[:n, n:] = E.T
    G[n : n + m, :n] = -B.T
    G[n : n + m, n:] = -np.eye(m)
    G[n + m :, :n] = B.T
    G[n + m :, n:] = -np.eye(m)
    h = np.concatenate([instance.s, instance.r, -instance.r])
    c = np.concatenate([np.ones(n), np.zeros(m)])
    return lp.LpProblem(c=c, G=G, h=h)


def gamma_threshold(p: np.ndarray, F: np.ndarray) -> np.ndarray:
    """Componentwise minimal admissible disturbance price, F'p."""
    return np.asarray(F, dtype=float).T @ np.asarray(p, dtype=float)


def extract_gain(p: np.ndarray, instance: ProblemInstance) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form optimal gain from the price vector.

    Returns (K, q) with q = r + B'p and K row i = sign(q_i) E_i, using
    sign(0) = 0.  |K| <= E holds by construction, so K is always an
    admissible feedback, and its sparsity pattern is contained in E's.
    """
    p = np.asarray(p, dtype=float)
    q = instance.r + instance.B.T @ p
    K = np.sign(q)[:, None] * instance.E
    return K, q


def bellman_residual(p: np.ndarray, instance: ProblemInstance) -> np.ndarray:
    """p - (s + A'p - E'|r + B'p|); ~0 at the synthesis optimum.

    Negative entries mean slack in the fixed-point inequality, positive
    entries beyond the feasibility tolerance mean p is not admissible.
    """
    p = np.asarray(p, dtype=float)
    q = instance.r + instance.B.T @ p
    return p - (instance.s + instance.A.T @ p - instance.E.T @ np.abs(q))


def synthesize(
    instance: ProblemInstance,
    *,
    force: bool = False,
    strict_tol: float = 0.0,
    pivot_tol: float = 1e-9,
    feas_tol: float = 1e-8,
    max_pivots: int | None = None,
) -> SynthesisCertificate:
    """Solve the synthesis program and package the full certificate.

    Refuses (status HYPOTHESES_VIOLATED) when the standing hypotheses fail,
    unless force is set, in which case the LP runs anyway and the caller
    owns the interpretation.  Structural invalidity raises ValueError.
    Unbounded LPs map to NO_FINITE_VALUE with the certificate ray attached;
    the pivot-budget error from the solver propagates.
    """
    problems = validate(instance)
    if problems:
        raise ValueError("invalid instance: " + "; ".join(str(p) for p in problems))
    report = check_hypotheses(instance, strict_tol=strict_tol)
    if not report.ok and not force:
        return SynthesisCertificate(
            status=SynthesisStatus.HYPOTHESES_VIOLATED, hypothesis_report=report
        )

    problem = build_lp(instance)
    sol = lp.solve(problem, pivot_tol=pivot_tol, feas_tol=feas_tol, max_pivots=max_pivots)

    if sol.status is lp.LpStatus.UNBOUNDED:
        return SynthesisCertificate(
            status=SynthesisStatus.NO_FINITE_VALUE,
            hypothesis_report=report,
            lp_status=sol.status,
            lp_iterations=sol.iterations,
            unbounded_ray=sol.ray,
        )
    if sol.status is not lp.LpStatus.OPTIMAL:
        # Infeasibility is excluded by the hypotheses (p = 0, zeta = |r| is
        # always feasible), so with a clean report it means a solver defect.
        # After a forced run on a violating instance it instead confirms
        # that no price vector exists; report that as the violation.
        status = (
            SynthesisStatus.INTERNAL_ERROR
            if report.ok
            else SynthesisStatus.HYPOTHESES_VIOLATED
        )
        return SynthesisCertificate(
            status=status,
            hypothesis_report=report,
            lp_status=sol.status,
            lp_iterations=sol.iterations,
        )

    n = instance.n
    # Basic solutions can carry roundoff dust below zero; scrub only that.
    z = np.where((sol.z < 0) & (sol.z > -feas_tol), 0.0, sol.z)
    p = z[:n]
    zeta = z[n:].copy()
    K, q = extract_gain(p, instance)
    # Rows of E that are identically zero leave zeta unconstrained from
    # below in the program; report the meaningful tight value instead of
    # whatever basic value the solver landed on.
    degenerate = ~instance.E.any(axis=1)
    zeta[degenerate] = np.abs(q[degenerate])
    gamma_min = gamma_threshold(p, instance.F)
    return SynthesisCertificate(
        status=SynthesisStatus.SYNTHESIZED,
        hypothesis_report=report,
        p=p,
        zeta=zeta,
        gamma_min=gamma_min,
        gamma_ok=bool(np.all(instance.gamma >= gamma_min - feas_tol)),
        K=K,
        q=q,
        bellman_residual=bellman_residual(p, instance),
        lp_status=sol.status,
        lp_iterations=sol.iterations,
        lp_objective=sol.objective,
    )
