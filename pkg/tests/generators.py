"""Seeded random problem generators and brute-force oracles for the tests.

Instances from random_instance satisfy the standing hypotheses by
construction and, stronger, keep every admissible closed loop A - BL with
|L| <= E substochastic (row sums <= 0.95).  That makes properties that
quantify over gains testable without filtering: every sampled gain is
stable, every rollout stays bounded.

The LP oracle enumerates basic points of {x >= 0, Gx <= h} directly, so it
shares no code path with the simplex solver under test.
"""

from itertools import combinations

import numpy as np

from minpos.lp import LpProblem
from minpos.model import ProblemInstance
from minpos.synthesis import SynthesisStatus, synthesize

# Row-sum budgets: |B|E eats at most BE_BUDGET per row and the remainder R
# at most R_BUDGET, so rowsum(A - BL) <= 2*BE_BUDGET + R_BUDGET < 1 for any
# |L| <= E.
BE_BUDGET = 0.05
R_BUDGET = 0.85
CLOSED_LOOP_ROW_SUM = 2 * BE_BUDGET + R_BUDGET


def random_instance(seed, n_max=8, m_max=3, l_max=2, gamma_margin=0.1):
    """Instance with hypotheses holding and gamma = gamma_min + margin.

    The disturbance matrix is rescaled column by column after a first
    synthesis pass so each component of F'p lands exactly on a target in
    [0.5, 2]; gamma then sits gamma_margin above the threshold.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    l = int(rng.integers(1, l_max + 1))

    E = rng.uniform(0.05, 1.0, size=(m, n))
    mask = rng.random((m, n)) < 0.7
    for i in range(m):
        if not mask[i].any():
            mask[i, rng.integers(0, n)] = True
    E = E * mask

    B = rng.uniform(-1.0, 1.0, size=(n, m))
    be_rows = (np.abs(B) @ E).sum(axis=1).max()
    if be_rows > 0:
        B *= rng.uniform(0.3, 1.0) * BE_BUDGET / be_rows

    R = rng.uniform(0.0, 1.0, size=(n, n)) * (rng.random((n, n)) < 0.6)
    r_rows = R.sum(axis=1).max()
    if r_rows > 0:
        R *= rng.uniform(0.3, 1.0) * R_BUDGET / r_rows
    A = np.abs(B) @ E + R

    r = rng.uniform(-0.3, 0.3, size=m)
    s = E.T @ np.abs(r) + rng.uniform(0.2, 1.0, size=n)

    F = rng.uniform(0.1, 1.0, size=(n, l))
    probe = ProblemInstance.from_matrices(
        A, B, F, E, s, r, gamma=np.ones(l), name=f"random-{seed}"
    )
    cert = synthesize(probe)
    assert cert.status is SynthesisStatus.SYNTHESIZED, cert.status
    target = rng.uniform(0.5, 2.0, size=l)
    F = F * (target / cert.gamma_min)
    return ProblemInstance.from_matrices(
        A, B, F, E, s, r, gamma=target + gamma_margin, name=f"random-{seed}"
    )


def random_admissible_gain(instance, rng):
    """Gain with |L| <= E elementwise; stable for generated instances."""
    return rng.uniform(-1.0, 1.0, size=instance.E.shape) * instance.E


def random_disturbances(instance, rng, horizon):
    """Nonnegative (horizon, l) sequence with a per-sequence magnitude."""
    scale = rng.uniform(0.1, 2.0)
    return rng.uniform(0.0, scale, size=(horizon, instance.l))


def instance_payload(instance, x0=None):
    """JSON-ready dict in the CLI input schema."""
    payload = {
        "n": instance.n,
        "m": instance.m,
        "l": instance.l,
        "A": instance.A.tolist(),
        "B": instance.B.tolist(),
        "F": instance.F.tolist(),
        "E": instance.E.tolist(),
        "s": instance.s.tolist(),
        "r": instance.r.tolist(),
        "gamma": instance.gamma.tolist(),
    }
    if instance.name is not None:
        payload["name"] = instance.name
    if x0 is not None:
        payload["x0"] = np.asarray(x0, dtype=float).tolist()
    return payload


def with_gamma(instance, gamma):
    """Copy of the instance with gamma replaced."""
    return ProblemInstance.from_matrices(
        instance.A,
        instance.B,
        instance.F,
        instance.E,
        instance.s,
        instance.r,
        gamma=gamma,
        name=instance.name,
    )


def random_bounded_lp(seed, n_max=6, m_max=8):
    """Feasible bounded LP: random rows plus a box x <= u, origin interior.

    h > 0 keeps x = 0 strictly feasible and the box rows cap every
    coordinate, so the optimum is finite and attained at a vertex.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    G = rng.uniform(-1.0, 1.0, size=(m, n))
    h = rng.uniform(0.5, 2.0, size=m)
    u = rng.uniform(0.5, 3.0, size=n)
    c = rng.uniform(-1.0, 1.0, size=n)
    G = np.vstack([G, np.eye(n)])
    h = np.concatenate([h, u])
    return LpProblem(c=c, G=G, h=h)


def vertex_enumeration_optimum(problem, feas_tol=1e-9):
    """Max of c'x over all basic feasible points of {x >= 0, Gx <= h}.

    Every vertex activates n of the m + n rows [G; -I], so enumerating
    n-subsets and solving the square systems covers the optimum of any
    bounded feasible program.  Exponential and only for small oracles.
    """
    G, h, c = problem.G, problem.h, problem.c
    m, n = G.shape
    rows = np.vstack([G, -np.eye(n)])
    rhs = np.concatenate([h, np.zeros(n)])
    best = None
    for active in combinations(range(m + n), n):
        M = rows[list(active)]
        b = rhs[list(active)]
        try:
            x = np.linalg.solve(M, b)
        except np.linalg.LinAlgError:
            continue
        if np.max(np.abs(M @ x - b)) > 1e-8:
            continue  # solve succeeded but the basis is unusable
        if np.any(x < -feas_tol) or np.any(G @ x > h + feas_tol):
            continue
        value = float(c @ x)
        if best is None or value > best:
            best = value
    return best
