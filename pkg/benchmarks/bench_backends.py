"""Time the compiled kernels against the pure numpy fallback.

Runs the four hot paths (value iteration, closed-loop rollout, the simplex
loop via a full synthesis solve, and the spectral-radius bracket) on
larger-than-desk instances, once per backend, and prints a table.  The
backends are swapped by rebinding the module-level `kernels` attribute, the
same seam the import-time selection uses.

Usage:
    python benchmarks/bench_backends.py [--repeats N]
"""

import argparse
import time

import numpy as np

import minpos._kernels_py as pure_kernels
import minpos.bellman as bellman
import minpos.lp as lp
import minpos.simulate as simulate
from minpos.model import ProblemInstance
from minpos.synthesis import synthesize

try:
    import minpos._kernels as compiled_kernels
except ImportError:
    compiled_kernels = None


def make_instance(rng, n, m, l):
    """Dense stable instance; row-sum budgets keep every loop contractive."""
    E = rng.uniform(0.0, 1.0, (m, n)) * (rng.random((m, n)) < 0.3)
    B = rng.uniform(-1.0, 1.0, (n, m))
    be = (np.abs(B) @ E).sum(axis=1).max()
    if be > 0:
        B *= 0.05 / be
    R = rng.uniform(0.0, 1.0, (n, n))
    R *= 0.85 / R.sum(axis=1).max()
    A = np.abs(B) @ E + R
    r = rng.uniform(-0.3, 0.3, m)
    s = E.T @ np.abs(r) + rng.uniform(0.2, 1.0, n)
    F = rng.uniform(0.1, 1.0, (n, l))
    gamma = F.T @ np.full(n, 50.0)  # far above any achievable threshold
    return ProblemInstance.from_matrices(A, B, F, E, s, r, gamma)


def swap_backend(kernels):
    for module in (lp, bellman, simulate):
        module.kernels = kernels


def best_of(repeats, fn):
    best = np.inf
    value = None
    for _ in range(repeats):
        started = time.perf_counter()
        value = fn()
        best = min(best, time.perf_counter() - started)
    return best, value


def build_workloads(rng):
    inst = make_instance(rng, 120, 10, 4)
    cert = synthesize(inst)
    W = rng.uniform(0.0, 1.0, (100_000, inst.l))
    x0 = rng.uniform(0.0, 1.0, inst.n)
    M = rng.uniform(0.01, 1.0, (400, 400))

    return inst, [
        (
            "value iteration (n=120)",
            lambda: bellman.value_iterate(inst, tol=1e-12, record_iterates=False),
            lambda out: out.p,
        ),
        (
            "rollout 100k steps (n=120)",
            lambda: simulate.rollout(inst, cert.K, x0, W),
            lambda out: out.partial_costs[-1],
        ),
        (
            "synthesis solve (130 vars)",
            lambda: synthesize(inst),
            lambda out: out.p,
        ),
        (
            "spectral bracket (400x400)",
            lambda: simulate.spectral_radius(M, tol=1e-12),
            lambda out: out.estimate,
        ),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=3,
                        help="timing repetitions per workload (best is kept)")
    args = parser.parse_args()

    rng = np.random.default_rng(2024)
    inst, workloads = build_workloads(rng)

    backends = [("python", pure_kernels)]
    if compiled_kernels is not None:
        backends.append(("c", compiled_kernels))
    else:
        print("compiled extension not built; timing the python backend only\n")

    results = {}
    for backend_name, kernels in backends:
        swap_backend(kernels)
        for workload_name, fn, digest in workloads:
            elapsed, out = best_of(args.repeats, fn)
            results[(workload_name, backend_name)] = (elapsed, digest(out))

    width = max(len(name) for name, _, _ in workloads)
    header = f"{'workload':<{width}}  {'python':>10}"
    if compiled_kernels is not None:
        header += f"  {'c':>10}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for workload_name, _, _ in workloads:
        py_time, py_out = results[(workload_name, "python")]
        line = f"{workload_name:<{width}}  {py_time:>9.4f}s"
        if compiled_kernels is not None:
            c_time, c_out = results[(workload_name, "c")]
            line += f"  {c_time:>9.4f}s  {py_time / c_time:>7.1f}x"
            agreement = np.max(np.abs(np.asarray(py_out) - np.asarray(c_out)))
            if agreement > 1e-8:
                raise SystemExit(
                    f"backend mismatch on {workload_name}: {agreement:.3e}"
                )
        print(line)


if __name__ == "__main__":
    main()
