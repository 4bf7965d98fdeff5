"""Dense two-phase simplex for small linear programs in standard form.

Problems are

    maximize    c'z
    subject to  G z <= h,   z >= 0

with no restriction on the sign of h.  The solver runs a classic dense
tableau simplex: rows with negative right-hand side get an artificial
variable and phase one drives the artificials to zero (or proves
infeasibility); phase two optimizes c.  Pivoting uses Bland's smallest-index
rule for both the entering column and ratio-test ties, which excludes
cycling, so termination is guaranteed by the pivot budget alone.  Identical
inputs produce identical pivot sequences and outputs.

This is deliberately a bespoke dense implementation: the synthesis programs
this package builds are small (tens of rows), need an unboundedness
certificate ray, and need deterministic pivoting that an external solver
does not promise.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._backend import kernels
from ._kernels_py import _pivot

__all__ = ["LpProblem", "LpSolution", "LpStatus", "MaxPivotsExceeded", "solve"]

#: default multiplier for the pivot budget: max_pivots = 10_000 * (vars + rows)
PIVOT_BUDGET_FACTOR = 10_000


class LpStatus(str, Enum):
    OPTIMAL = "Optimal"
    UNBOUNDED = "Unbounded"
    INFEASIBLE = "Infeasible"


class MaxPivotsExceeded(RuntimeError):
    """Pivot budget exhausted before termination; the result is inconclusive.

    Bland's rule makes cycling impossible, so hitting the budget on a sane
    problem means the budget was too small, not that the solver looped.
    """

    def __init__(self, pivots: int):
        super().__init__(f"simplex stopped after {pivots} pivots without terminating")
        self.pivots = pivots


@dataclass(frozen=True)
class LpProblem:
    """maximize c'z subject to G z <= h, z >= 0."""

    c: np.ndarray
    G: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        for fld in ("c", "G", "h"):
            arr = np.array(getattr(self, fld), dtype=float, order="C", copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, fld, arr)

    @property
    def n_vars(self) -> int:
        return self.c.shape[0]

    @property
    def n_constraints(self) -> int:
        return self.G.shape[0]

    def check(self) -> None:
        if self.c.ndim != 1 or self.G.ndim != 2 or self.h.ndim != 1:
            raise ValueError("c and h must be vectors and G a matrix")
        rows, cols = self.G.shape
        if cols != self.c.shape[0] or rows != self.h.shape[0]:
            raise ValueError(
                f"inconsistent shapes: c {self.c.shape}, G {self.G.shape}, h {self.h.shape}"
            )
        if self.c.shape[0] < 1:
            raise ValueError("problem needs at least one variable")
        for fld in ("c", "G", "h"):
            if not np.isfinite(getattr(self, fld)).all():
                raise ValueError(f"nonfinite entries in {fld}")


@dataclass(frozen=True)
class LpSolution:
    """Solver outcome.

    For OPTIMAL, z is the maximizer, objective equals c'z as returned, and
    iterations counts every pivot across both phases.  For UNBOUNDED, ray is
    a nonnegative direction d with G d <= 0 and c'd > 0 certifying
    unboundedness.  For INFEASIBLE only iterations is populated.
    """

    status: LpStatus
    z: np.ndarray | None
    objective: float | None
    iterations: int
    ray: np.ndarray | None = None

    def __post_init__(self):
        for fld in ("z", "ray"):
            val = getattr(self, fld)
            if val is not None:
                arr = np.array(val, dtype=float, copy=True)
                arr.setflags(write=False)
                object.__setattr__(self, fld, arr)


def solve(
    problem: LpProblem,
    *,
    pivot_tol: float = 1e-9,
    feas_tol: float = 1e-8,
    max_pivots: int | None = None,
) -> LpSolution:
    """Solve the program with the two-phase Bland-rule simplex.

    pivot_tol is the threshold below which a tableau entry does not qualify
    as a pivot; feas_tol decides phase-one infeasibility.  max_pivots
    defaults to 10_000 * (variables + constraints); exceeding it raises
    MaxPivotsExceeded, distinct from the INFEASIBLE/UNBOUNDED outcomes.
    """
    problem.check()
    G, h, c = problem.G, problem.h, problem.c
    nc, nv = G.shape
    if max_pivots is None:
        max_pivots = PIVOT_BUDGET_FACTOR * (nv + nc)

    flip = h < 0
    art_rows = np.nonzero(flip)[0]
    n_art = art_rows.size
    width = nv + nc + n_art

    T = np.zeros((nc + 1, width + 1))
    T[:nc, :nv] = np.where(flip[:, None], -G, G)
    T[np.arange(nc), nv + np.arange(nc)] = np.where(flip, -1.0, 1.0)
    T[art_rows, nv + nc + np.arange(n_art)] = 1.0
    T[:nc, -1] = np.where(flip, -h, h)

    basis = nv + np.arange(nc, dtype=np.int64)
    basis[art_rows] = nv + nc + np.arange(n_art)

    pivots = 0
    if n_art:
        # Phase one: maximize -(sum of artificials).  Price out the initial
        # artificial basis so the last row holds true reduced costs.
        T[-1, :] = 0.0
        T[-1, nv + nc : width] = -1.0
        T[-1, :] += T[art_rows, :].sum(axis=0)
        code, _, pivots = kernels.simplex_loop(T, basis, pivot_tol, max_pivots, pivots)
        if code == 2:
            raise MaxPivotsExceeded(pivots)
        if code == 1:
            raise RuntimeError("phase one reported unbounded; numerical breakdown")
        if T[-1, -1] > feas_tol:
            return LpSolution(LpStatus.INFEASIBLE, None, None, pivots)

        # Drive surviving artificials (all at value zero) out of the basis;
        # rows that admit no pivot are redundant and dropped.
        drop = []
        for i in range(nc):
            if basis[i] < nv + nc:
                continue
            candidates = np.nonzero(np.abs(T[i, : nv + nc]) > pivot_tol)[0]
            if candidates.size:
                col = int(candidates[0])
                _pivot(T, i, col)
                basis[i] = col
                pivots += 1
            else:
                drop.append(i)
        if drop:
            T = np.delete(T, drop, axis=0)
            basis = np.delete(basis, drop)
        T = np.delete(T, np.s_[nv + nc : width], axis=1)
        T = np.ascontiguousarray(T)

    # Phase two objective, priced out against the current basis.
    nrows = T.shape[0] - 1
    T[-1, :] = 0.0
    T[-1, :nv] = c
    cB = np.array([c[b] if b < nv else 0.0 for b in basis])
    T[-1, :] -= cB @ T[:nrows, :]

    code, col, pivots = kernels.simplex_loop(T, basis, pivot_tol, max_pivots, pivots)
    if code == 2:
        raise MaxPivotsExceeded(pivots)
    if code == 1:
        # Certificate ray: unit step on the entering variable, basic
        # variables moving along the (nonpositive) pivot column.
        full = np.zeros(nv + nc)
        full[col] = 1.0
        full[basis] = np.maximum(-T[:nrows, col], 0.0)
        return LpSolution(LpStatus.UNBOUNDED, None, None, pivots, ray=full[:nv])

    full = np.zeros(nv + nc)
    full[basis] = T[:nrows, -1]
    z = full[:nv]
    return LpSolution(LpStatus.OPTIMAL, z, float(c @ z), pivots)
