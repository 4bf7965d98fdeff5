"""Problem data for minimax control of positive linear systems.

An instance describes the discrete-time plant

    x(t+1) = A x(t) + B u(t) + F w(t)

with per-row input bounds |u(t)| <= E x(t), nonnegative disturbances w, and
the stage cost s'x + r'u - gamma'w.  Synthesis (see :mod:`minpos.synthesis`)
is meaningful under two standing hypotheses:

* positivity:  A - |B| E >= 0 elementwise, which makes the nonnegative
  orthant invariant for every admissible feedback, and
* penalty dominance:  s > E'|r| elementwise, which keeps the stage cost of
  any admissible input nonnegative.

This module holds the instance container, structural validation, and the
hypothesis check.  Nothing here solves anything.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

__all__ = [
    "ProblemInstance",
    "Violation",
    "HypothesisReport",
    "validate",
    "check_hypotheses",
]


def _frozen_array(value) -> np.ndarray:
    arr = np.array(value, dtype=float, order="C", copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Violation:
    """One violated structural constraint: which, where, and the offending value."""

    constraint: str
    index: tuple[int, ...] | None
    value: Any

    def __str__(self) -> str:
        where = "" if self.index is None else f" at {self.index}"
        return f"{self.constraint}{where}: {self.value!r}"


@dataclass(frozen=True)
class ProblemInstance:
    """Immutable container for one synthesis problem.

    Shapes: A is n x n, B is n x m, F is n x l, E is m x n, s has length n,
    r length m, gamma length l.  The constructor only coerces to read-only
    float arrays; use :func:`validate` to check shapes and signs, so that
    malformed data can be reported rather than rejected at construction.
    """

    n: int
    m: int
    l: int
    A: np.ndarray
    B: np.ndarray
    F: np.ndarray
    E: np.ndarray
    s: np.ndarray
    r: np.ndarray
    gamma: np.ndarray
    name: str | None = None

    def __post_init__(self):
        for fld in ("A", "B", "F", "E", "s", "r", "gamma"):
            object.__setattr__(self, fld, _frozen_array(getattr(self, fld)))

    @classmethod
    def from_matrices(cls, A, B, F, E, s, r, gamma, name=None) -> "ProblemInstance":
        """Build an instance from matrices, accepting 1-D shorthand.

        A 1-D B or F is read as a single column, a 1-D E as a single row,
        and scalar s/r/gamma entries are promoted to length-1 vectors.
        Dimensions n, m, l are inferred from the coerced shapes.
        """
        A = np.atleast_2d(np.asarray(A, dtype=float))
        B = np.asarray(B, dtype=float)
        if B.ndim < 2:
            B = np.atleast_1d(B).reshape(-1, 1)
        F = np.asarray(F, dtype=float)
        if F.ndim < 2:
            F = np.atleast_1d(F).reshape(-1, 1)
        E = np.asarray(E, dtype=float)
        if E.ndim < 2:
            E = np.atleast_1d(E).reshape(1, -1)
        s = np.atleast_1d(np.asarray(s, dtype=float))
        r = np.atleast_1d(np.asarray(r, dtype=float))
        gamma = np.atleast_1d(np.asarray(gamma, dtype=float))
        return cls(
            n=A.shape[0], m=E.shape[0], l=F.shape[1] if F.ndim == 2 else 1,
            A=A, B=B, F=F, E=E, s=s, r=r, gamma=gamma, name=name,
        )


@dataclass(frozen=True)
class HypothesisReport:
    """Outcome of the standing-hypothesis check.

    positivity_margin is A - |B|E (n x n); the positivity hypothesis holds
    iff it is elementwise nonnegative.  penalty_margin is s - E'|r| (length
    n); the penalty hypothesis holds iff it is elementwise strictly positive
    (strictly greater than the configured strictness tolerance).
    """

    positivity_ok: bool
    positivity_margin: np.ndarray
    penalty_ok: bool
    penalty_margin: np.ndarray
    violations: tuple[Violation, ...]

    def __post_init__(self):
        object.__setattr__(self, "positivity_margin", _frozen_array(self.positivity_margin))
        object.__setattr__(self, "penalty_margin", _frozen_array(self.penalty_margin))

    @property
    def ok(self) -> bool:
        return self.positivity_ok and self.penalty_ok


def _expect_shape(v: list, name: str, arr: np.ndarray, shape: tuple[int, ...]) -> bool:
    if arr.shape != shape:
        v.append(Violation(f"shape:{name}", None, arr.shape))
        return False
    return True


def _each_finite(v: list, name: str, arr: np.ndarray) -> None:
    bad = np.argwhere(~np.isfinite(arr))
    for idx in bad:
        key = tuple(int(k) for k in idx)
        v.append(Violation(f"finite:{name}", key, float(arr[key])))


def _each_sign(v: list, constraint: str, name: str, arr: np.ndarray, mask: np.ndarray) -> None:
    for idx in np.argwhere(mask):
        key = tuple(int(k) for k in idx)
        v.append(Violation(f"{constraint}:{name}", key, float(arr[key])))


def validate(instance: ProblemInstance) -> list[Violation]:
    """Return every violated structural invariant of the instance.

    Checks run in a fixed order (dimensions, shapes, finiteness, signs) and
    all violations are reported, one entry per offending entry, so a caller
    can surface the full list instead of the first failure.  An empty list
    means the instance is structurally sound; it says nothing about the
    standing hypotheses, which :func:`check_hypotheses` covers.
    """
    v: list[Violation] = []
    for dim_name in ("n", "m", "l"):
        dim = getattr(instance, dim_name)
        if not isinstance(dim, (int, np.integer)) or dim < 1:
            v.append(Violation(f"dimension:{dim_name}", None, dim))
    if v:
        return v

    n, m, l = instance.n, instance.m, instance.l
    _expect_shape(v, "A", instance.A, (n, n))
    _expect_shape(v, "B", instance.B, (n, m))
    _expect_shape(v, "F", instance.F, (n, l))
    _expect_shape(v, "E", instance.E, (m, n))
    _expect_shape(v, "s", instance.s, (n,))
    _expect_shape(v, "r", instance.r, (m,))
    _expect_shape(v, "gamma", instance.gamma, (l,))

    for name in ("A", "B", "F", "E", "s", "r", "gamma"):
        _each_finite(v, name, getattr(instance, name))

    # Sign constraints only make sense on finite entries; nonfinite ones were
    # already reported above and comparisons against them are False anyway.
    with np.errstate(invalid="ignore"):
        _each_sign(v, "nonnegative", "F", instance.F, instance.F < 0)
        _each_sign(v, "nonnegative", "E", instance.E, instance.E < 0)
        _each_sign(v, "nonnegative", "gamma", instance.gamma, instance.gamma < 0)
        _each_sign(v, "positive", "s", instance.s, ~(instance.s > 0))
    return v


def check_hypotheses(instance: ProblemInstance, strict_tol: float = 0.0) -> HypothesisReport:
    """Evaluate the two standing hypotheses and report the exact margins.

    strict_tol tightens the penalty hypothesis: s - E'|r| must exceed it in
    every component.  The default 0.0 is the plain strict inequality, which
    admits margins arbitrarily close to zero; callers wanting a safety gap
    can pass a positive value.

    Raises ValueError when the instance is structurally invalid, since the
    margins would be meaningless.
    """
    problems = validate(instance)
    if problems:
        raise ValueError(
            "invalid instance: " + "; ".join(str(p) for p in problems)
        )
    positivity_margin = instance.A - np.abs(instance.B) @ instance.E
    penalty_margin = instance.s - instance.E.T @ np.abs(instance.r)

    violations: list[Violation] = []
    for idx in np.argwhere(positivity_margin < 0):
        key = (int(idx[0]), int(idx[1]))
        violations.append(Violation("positivity", key, float(positivity_margin[key])))
    for idx in np.argwhere(~(penalty_margin > strict_tol)):
        key = (int(idx[0]),)
        violations.append(Violation("penalty", key, float(penalty_margin[key])))

    return HypothesisReport(
        positivity_ok=bool((positivity_margin >= 0).all()),
        positivity_margin=positivity_margin,
        penalty_ok=bool((penalty_margin > strict_tol).all()),
        penalty_margin=penalty_margin,
        violations=tuple(violations),
    )
