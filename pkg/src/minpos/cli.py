"""Command-line front end: check, synth, iterate, simulate.

Every subcommand is a thin composition of library calls; no numerics live
here.  Instance files are JSON objects with keys "n", "m", "l", "A", "B",
"F", "E", "s", "r", "gamma" (matrices as row-major nested arrays) plus
optional "x0" and "name".  Reports are JSON with full float precision
(Python's shortest round-trip repr); terminal output rounds to 4
significant digits.  Exit codes: 0 ok, 1 input error, 2 hypothesis
violation, 3 disturbance-price violation, 4 no finite value / diverging /
unstable, 5 solver limit or solver defect.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import bellman, simulate, synthesis
from ._backend import active_backend
from ._version import __version__
from .lp import LpStatus, MaxPivotsExceeded
from .model import HypothesisReport, ProblemInstance, check_hypotheses, validate

EX_OK = 0
EX_INPUT = 1
EX_HYPOTHESES = 2
EX_GAMMA = 3
EX_NO_VALUE = 4
EX_SOLVER_LIMIT = 5


class CliInputError(Exception):
    """Bad file, malformed JSON, or structurally invalid instance data."""


def _fail(message: str) -> "CliInputError":
    return CliInputError(message)


def _num(v: float) -> str:
    return f"{float(v):.4g}"


def _vec(arr) -> str:
    return "[" + ", ".join(_num(v) for v in np.atleast_1d(arr)) + "]"


def _mat(arr) -> str:
    return "[" + "; ".join(", ".join(_num(v) for v in row) for row in np.atleast_2d(arr)) + "]"


def _expect_number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _fail(f"{path}: expected a number, got {type(value).__name__}")
    return float(value)


def _expect_vector(obj: dict, key: str) -> np.ndarray:
    if key not in obj:
        raise _fail(f"missing key {key!r}")
    value = obj[key]
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = [value]
    if not isinstance(value, list) or not value:
        raise _fail(f"{key!r}: expected a nonempty array of numbers")
    return np.array([_expect_number(v, f"{key!r}[{i}]") for i, v in enumerate(value)])


def _expect_matrix(obj: dict, key: str) -> np.ndarray:
    if key not in obj:
        raise _fail(f"missing key {key!r}")
    value = obj[key]
    if not isinstance(value, list) or not value or not all(isinstance(row, list) for row in value):
        raise _fail(f"{key!r}: expected a nested array (list of rows)")
    width = len(value[0])
    rows = []
    for i, row in enumerate(value):
        if len(row) != width:
            raise _fail(f"{key!r}: row {i} has length {len(row)}, expected {width}")
        rows.append([_expect_number(v, f"{key!r}[{i}][{j}]") for j, v in enumerate(row)])
    return np.array(rows)


def load_instance(path: str | Path) -> tuple[ProblemInstance, str, np.ndarray | None]:
    """Parse an instance file; returns (instance, sha256 digest, optional x0).

    Raises CliInputError with the offending key path on malformed input and
    with the full violation list when the parsed instance fails validation.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise _fail(f"cannot read {path}: {exc}") from exc
    digest = hashlib.sha256(raw).hexdigest()
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise _fail(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise _fail(f"{path}: top level must be a JSON object")

    dims = {}
    for key in ("n", "m", "l"):
        if key not in obj:
            raise _fail(f"missing key {key!r}")
        if isinstance(obj[key], bool) or not isinstance(obj[key], int) or obj[key] < 1:
            raise _fail(f"{key!r}: expected a positive integer, got {obj[key]!r}")
        dims[key] = obj[key]

    name = obj.get("name")
    if name is not None and not isinstance(name, str):
        raise _fail(f"'name': expected a string")

    instance = ProblemInstance(
        n=dims["n"],
        m=dims["m"],
        l=dims["l"],
        A=_expect_matrix(obj, "A"),
        B=_expect_matrix(obj, "B"),
        F=_expect_matrix(obj, "F"),
        E=_expect_matrix(obj, "E"),
        s=_expect_vector(obj, "s"),
        r=_expect_vector(obj, "r"),
        gamma=_expect_vector(obj, "gamma"),
        name=name,
    )
    problems = validate(instance)
    if problems:
        raise _fail("invalid instance: " + "; ".join(str(p) for p in problems))

    x0 = None
    if "x0" in obj:
        x0 = _expect_vector(obj, "x0")
        if x0.shape != (instance.n,):
            raise _fail(f"'x0': expected length {instance.n}, got {x0.shape[0]}")
    return instance, digest, x0


def _maybe(arr) -> list | None:
    return None if arr is None else np.asarray(arr).tolist()


def _hypotheses_dict(report: HypothesisReport) -> dict:
    return {
        "positivity_ok": report.positivity_ok,
        "penalty_ok": report.penalty_ok,
        "positivity_margin": report.positivity_margin.tolist(),
        "penalty_margin": report.penalty_margin.tolist(),
        "violations": [
            {"constraint": v.constraint, "index": list(v.index or ()), "value": v.value}
            for v in report.violations
        ],
    }


def _write_json(path: str, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _print_hypotheses(report: HypothesisReport) -> None:
    print(f"positivity margin A - |B|E: {_mat(report.positivity_margin)}"
          f" -> {'ok' if report.positivity_ok else 'VIOLATED'}")
    print(f"penalty margin s - E'|r|:   {_vec(report.penalty_margin)}"
          f" -> {'ok' if report.penalty_ok else 'VIOLATED'}")
    for v in report.violations:
        print(f"  violated {v}")


def cmd_check(args) -> int:
    try:
        instance, digest, _ = load_instance(args.instance)
    except CliInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_INPUT
    report = check_hypotheses(instance, strict_tol=args.strict_tol)
    label = instance.name or str(args.instance)
    print(f"instance {label}: n={instance.n} m={instance.m} l={instance.l}")
    _print_hypotheses(report)
    if args.report:
        _write_json(args.report, {
            "tool": "minpos",
            "version": __version__,
            "backend": active_backend(),
            "input": {"path": str(args.instance), "sha256": digest, "name": instance.name},
            "hypotheses": _hypotheses_dict(report),
        })
    return EX_OK if report.ok else EX_HYPOTHESES


def _spectral_dict(instance: ProblemInstance, K: np.ndarray) -> dict | None:
    closed = instance.A - instance.B @ K
    if np.any(closed < 0):
        # possible only on forced runs; the nonnegative-matrix bracket
        # does not apply, so report nothing rather than a wrong number
        return None
    res = simulate.spectral_radius(closed, tol=1e-10, max_iter=5000)
    return {
        "estimate": res.estimate,
        "lower": res.lower,
        "upper": res.upper,
        "iterations": res.iterations,
        "converged": res.converged,
    }


def cmd_synth(args) -> int:
    try:
        instance, digest, _ = load_instance(args.instance)
        if args.gamma_override is not None:
            instance = _override_gamma(instance, args.gamma_override)
    except CliInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_INPUT

    try:
        cert = synthesis.synthesize(instance, force=args.force, feas_tol=args.tol)
    except MaxPivotsExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_SOLVER_LIMIT

    report = {
        "tool": "minpos",
        "version": __version__,
        "backend": active_backend(),
        "input": {"path": str(args.instance), "sha256": digest, "name": instance.name},
        "gamma": instance.gamma.tolist(),
        "status": cert.status.value,
        "hypotheses": _hypotheses_dict(cert.hypothesis_report),
        "p": _maybe(cert.p),
        "zeta": _maybe(cert.zeta),
        "gamma_min": _maybe(cert.gamma_min),
        "gamma_ok": cert.gamma_ok,
        "K": _maybe(cert.K),
        "q": _maybe(cert.q),
        "bellman_residual": _maybe(cert.bellman_residual),
        "lp": {
            "status": cert.lp_status.value if cert.lp_status else None,
            "iterations": cert.lp_iterations,
            "objective": cert.lp_objective,
        },
        "unbounded_ray": _maybe(cert.unbounded_ray),
        "spectral_radius": None,
        "value_iteration": None,
    }

    label = instance.name or str(args.instance)
    print(f"instance {label}: status {cert.status.value}")
    if cert.status is synthesis.SynthesisStatus.HYPOTHESES_VIOLATED:
        _print_hypotheses(cert.hypothesis_report)
        if cert.lp_status is LpStatus.INFEASIBLE:
            print("forced run: the synthesis program is infeasible; no price "
                  "vector exists under the violated hypotheses")
        if args.report:
            _write_json(args.report, report)
        return EX_HYPOTHESES
    if cert.status is synthesis.SynthesisStatus.NO_FINITE_VALUE:
        print("the synthesis program is unbounded: no finite value for any gamma")
        print(f"certificate ray (p block grows along): {_vec(cert.unbounded_ray)}")
        if args.report:
            _write_json(args.report, report)
        return EX_NO_VALUE
    if cert.status is synthesis.SynthesisStatus.INTERNAL_ERROR:
        print("error: the synthesis program reported infeasible, which the "
              "hypotheses exclude; solver defect", file=sys.stderr)
        if args.report:
            _write_json(args.report, report)
        return EX_SOLVER_LIMIT

    report["spectral_radius"] = _spectral_dict(instance, cert.K)
    print(f"p         = {_vec(cert.p)}")
    print(f"zeta      = {_vec(cert.zeta)}")
    print(f"gamma_min = {_vec(cert.gamma_min)}  (gamma = {_vec(instance.gamma)})")
    print(f"K         = {_mat(cert.K)}")
    print(f"max |bellman residual| = {_num(np.max(np.abs(cert.bellman_residual)))}")
    print(f"lp pivots = {cert.lp_iterations}, objective = {_num(cert.lp_objective)}")
    sr = report["spectral_radius"]
    if sr is not None:
        print(f"rho(A - BK) in [{_num(sr['lower'])}, {_num(sr['upper'])}]")
    else:
        print("rho(A - BK): not bracketed (closed loop has negative entries)")

    if args.verify:
        trace = bellman.value_iterate(instance, tol=1e-10, feas_tol=args.tol,
                                      record_iterates=False)
        agreement = None
        if trace.verdict is bellman.Verdict.CONVERGED:
            agreement = float(np.max(np.abs(trace.p - cert.p) / (1.0 + np.abs(cert.p))))
            print(f"value iteration agrees within {_num(agreement)} "
                  f"({trace.iterations} iterations)")
        else:
            print(f"value iteration verdict: {trace.verdict.value}")
        report["value_iteration"] = {
            "verdict": trace.verdict.value,
            "iterations": trace.iterations,
            "final_delta": trace.final_delta,
            "p": trace.p.tolist(),
            "relative_agreement": agreement,
        }

    if args.report:
        _write_json(args.report, report)

    if not cert.gamma_ok:
        worst = np.max(cert.gamma_min - instance.gamma)
        print(f"gamma is below the threshold by {_num(worst)}: "
              "the value is +infinity for some initial states")
        return EX_GAMMA
    return EX_OK


def _override_gamma(instance: ProblemInstance, text: str) -> ProblemInstance:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise _fail(f"--gamma-override: {exc}") from exc
    if len(values) == 1:
        gamma = np.full(instance.l, values[0])
    elif len(values) == instance.l:
        gamma = np.array(values)
    else:
        raise _fail(f"--gamma-override: expected 1 or {instance.l} values, got {len(values)}")
    if np.any(gamma < 0):
        raise _fail("--gamma-override: gamma must be nonnegative")
    import dataclasses

    return dataclasses.replace(instance, gamma=gamma)


def cmd_iterate(args) -> int:
    try:
        instance, _, _ = load_instance(args.instance)
    except CliInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_INPUT
    report = check_hypotheses(instance)
    if not report.ok:
        _print_hypotheses(report)
        return EX_HYPOTHESES
    trace = bellman.value_iterate(
        instance,
        tol=args.tol,
        max_iter=args.max_iter,
        divergence_bound=args.divergence_bound,
        record_iterates=False,
    )
    print(f"verdict: {trace.verdict.value} after {trace.iterations} iterations "
          f"(last step {_num(trace.final_delta)})")
    if trace.verdict is bellman.Verdict.CONVERGED:
        print(f"p = {_vec(trace.p)}")
        return EX_OK
    if trace.verdict is bellman.Verdict.GAMMA_VIOLATED:
        v = trace.violation
        print(f"disturbance price violated at iterate {trace.violation_iteration}: "
              f"channel {v.component} has F'p = {_num(v.coupling)} > gamma = {_num(v.penalty)}")
        return EX_GAMMA
    if trace.verdict is bellman.Verdict.DIVERGING:
        print(f"iterates blew up past {_num(args.divergence_bound)}: no finite value")
        return EX_NO_VALUE
    print("iteration budget exhausted without a verdict")
    return EX_SOLVER_LIMIT


def _load_disturbance(path: str, horizon: int, l: int) -> np.ndarray:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise _fail(f"cannot read disturbance file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise _fail(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if isinstance(obj, dict):
        obj = obj.get("w")
    if not isinstance(obj, list) or not obj:
        raise _fail(f"{path}: expected an array of disturbance rows (or an object with 'w')")
    arr = np.array(obj, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[1] != l:
        raise _fail(f"{path}: disturbance rows must have length {l}")
    if arr.shape[0] < horizon:
        raise _fail(f"{path}: {arr.shape[0]} rows, need at least the horizon {horizon}")
    if not np.isfinite(arr).all() or np.any(arr < 0):
        raise _fail(f"{path}: disturbances must be finite and nonnegative")
    return arr[:horizon]


def _write_csv(path: str, traj: simulate.Trajectory) -> None:
    n = traj.states.shape[1]
    m = traj.inputs.shape[1]
    l = traj.disturbances.shape[1]
    horizon = traj.horizon
    header = (["t"] + [f"x_{i+1}" for i in range(n)] + [f"u_{i+1}" for i in range(m)]
              + [f"w_{i+1}" for i in range(l)] + ["partial_cost"])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for t in range(horizon + 1):
            row = [t] + [repr(float(v)) for v in traj.states[t]]
            if t < horizon:
                row += [repr(float(v)) for v in traj.inputs[t]]
                row += [repr(float(v)) for v in traj.disturbances[t]]
            else:
                row += [""] * (m + l)
            row.append(repr(float(traj.partial_costs[t])))
            writer.writerow(row)


def cmd_simulate(args) -> int:
    try:
        instance, _, x0 = load_instance(args.instance)
    except CliInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_INPUT

    try:
        cert = synthesis.synthesize(instance, feas_tol=args.tol)
    except MaxPivotsExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_SOLVER_LIMIT
    if cert.status is synthesis.SynthesisStatus.HYPOTHESES_VIOLATED:
        _print_hypotheses(cert.hypothesis_report)
        return EX_HYPOTHESES
    if cert.status is not synthesis.SynthesisStatus.SYNTHESIZED:
        print(f"synthesis failed: {cert.status.value}", file=sys.stderr)
        return EX_NO_VALUE if cert.status is synthesis.SynthesisStatus.NO_FINITE_VALUE \
            else EX_SOLVER_LIMIT

    if x0 is None:
        x0 = np.ones(instance.n)
    value = float(cert.p @ x0)
    horizon = args.horizon
    mode = args.disturbance

    try:
        if mode == "zero":
            W = np.zeros((horizon, instance.l))
        elif mode == "random":
            W = np.random.default_rng(args.seed).uniform(0.0, 1.0, (horizon, instance.l))
        elif mode == "adversarial":
            bound = args.bound if args.bound is not None else 10.0 * value
            if cert.gamma_ok:
                rates = bellman.worst_case_disturbance_gain(cert.p, instance)
                comp = int(np.argmax(rates))
                print("gamma covers every disturbance channel; applying the "
                      f"least-covered channel {comp} (rate {_num(rates[comp])} <= 0), "
                      "costs stay bounded")
                W = np.zeros((horizon, instance.l))
                W[:, comp] = 1.0
            else:
                try:
                    w_seq, t_exceed = simulate.demonstrate_unboundedness(
                        instance, cert.K, x0, bound)
                except simulate.DemonstrationFailed as exc:
                    print(f"error: {exc}", file=sys.stderr)
                    return EX_GAMMA
                rates = instance.F.T @ cert.p - instance.gamma
                comp = int(np.argmax(rates))
                print(f"adversarial channel {comp}: unit disturbance, cost rate "
                      f"{_num(rates[comp])} per step")
                print(f"partial cost exceeds {_num(bound)} at horizon {t_exceed}")
                W = w_seq
        else:
            W = _load_disturbance(mode, horizon, instance.l)
    except CliInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_INPUT

    try:
        traj = simulate.rollout(instance, cert.K, x0, W)
    except (simulate.UnstableClosedLoop, simulate.SingularSystem) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_NO_VALUE

    final = float(traj.partial_costs[-1])
    print(f"simulated {traj.horizon} steps from x0 = {_vec(x0)}")
    print(f"final partial cost = {_num(final)}  (p'x0 = {_num(value)})")
    if cert.gamma_ok:
        print("cost bound satisfied" if final <= value * (1 + 1e-9) + 1e-12
              else "cost bound EXCEEDED (unexpected)")
    if args.csv:
        _write_csv(args.csv, traj)
        print(f"trajectory written to {args.csv}")
    return EX_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="minpos",
        description="Minimax-optimal sparse state feedback for positive linear systems.",
    )
    parser.add_argument("--version", action="version", version=f"minpos {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="validate an instance and report hypothesis margins")
    p.add_argument("instance")
    p.add_argument("--strict-tol", type=float, default=0.0,
                   help="required strict margin for the penalty hypothesis (default 0)")
    p.add_argument("--report", help="write a JSON report to this path")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("synth", help="synthesize the optimal gain and certificate")
    p.add_argument("instance")
    p.add_argument("--force", action="store_true",
                   help="run the program even when the hypotheses fail")
    p.add_argument("--gamma-override", metavar="VEC",
                   help="comma-separated gamma replacing the instance value "
                        "(a single number broadcasts)")
    p.add_argument("--report", help="write a JSON report to this path")
    p.add_argument("--tol", type=float, default=1e-8,
                   help="feasibility/comparison tolerance (default 1e-8)")
    p.add_argument("--verify", action="store_true",
                   help="cross-check the price vector by value iteration")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("iterate", help="run value iteration to a verdict")
    p.add_argument("instance")
    p.add_argument("--tol", type=float, default=1e-10,
                   help="convergence tolerance on the max-norm step (default 1e-10)")
    p.add_argument("--max-iter", type=int, default=100_000)
    p.add_argument("--divergence-bound", type=float, default=1e12)
    p.set_defaults(func=cmd_iterate)

    p = sub.add_parser("simulate", help="roll out the synthesized controller")
    p.add_argument("instance")
    p.add_argument("--horizon", type=int, default=400)
    p.add_argument("--seed", type=int, default=0, help="seed for --disturbance random")
    p.add_argument("--disturbance", default="zero", metavar="MODE",
                   help="'zero', 'random', 'adversarial', or a JSON file of rows")
    p.add_argument("--csv", help="write the trajectory as CSV to this path")
    p.add_argument("--bound", type=float, default=None,
                   help="cost bound for adversarial mode (default 10 p'x0)")
    p.add_argument("--tol", type=float, default=1e-8,
                   help="feasibility/comparison tolerance (default 1e-8)")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
