"""Command-line surface: exit codes, reports, CSV output, determinism."""

import csv
import hashlib
import json
import subprocess
import sys

import numpy as np
import pytest

from conftest import TANK_PATH, TANK_VALUE, scalar_payload
from generators import instance_payload, random_instance
from minpos.cli import (
    EX_GAMMA,
    EX_HYPOTHESES,
    EX_INPUT,
    EX_NO_VALUE,
    EX_OK,
    EX_SOLVER_LIMIT,
    main,
)
from minpos.lp import MaxPivotsExceeded
from minpos.synthesis import synthesize

TANK = str(TANK_PATH)


def boundary_payload():
    """Valid instance whose penalty margin is exactly zero."""
    return {
        "n": 2, "m": 1, "l": 1,
        "A": [[0.2, 0.05], [0.1, 0.3]],
        "B": [[0.1], [0.1]],
        "F": [[1.0], [1.0]],
        "E": [[1.0, 0.5]],
        "s": [0.4, 0.2],  # equals E'|r| exactly
        "r": [0.4],
        "gamma": [1.0],
    }


# ---------------------------------------------------------------- check


def test_check_double_tank(capsys):
    assert main(["check", TANK]) == EX_OK
    out = capsys.readouterr().out
    assert "positivity margin" in out and "ok" in out


def test_check_penalty_boundary_fails_strictness(write_instance):
    path = write_instance(boundary_payload())
    assert main(["check", path]) == EX_HYPOTHESES


def test_check_strict_tolerance_flag(capsys):
    assert main(["check", TANK, "--strict-tol", "0.9"]) == EX_HYPOTHESES


def test_check_malformed_matrix_names_the_key(write_instance, capsys):
    payload = scalar_payload()
    payload["A"] = [[0.9, 0.0], [0.1]]
    path = write_instance(payload)
    assert main(["check", path]) == EX_INPUT
    assert "'A'" in capsys.readouterr().err


def test_check_missing_key_is_an_input_error(write_instance, capsys):
    payload = scalar_payload()
    del payload["gamma"]
    path = write_instance(payload)
    assert main(["check", path]) == EX_INPUT
    assert "gamma" in capsys.readouterr().err


def test_check_missing_file(capsys):
    assert main(["check", "/no/such/file.json"]) == EX_INPUT
    assert "cannot read" in capsys.readouterr().err


def test_check_invalid_json_reports_position(write_instance, tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"n": 1,')
    assert main(["check", str(path)]) == EX_INPUT
    assert "invalid JSON" in capsys.readouterr().err


def test_check_report_contains_margins(tmp_path):
    report_path = tmp_path / "check.json"
    assert main(["check", TANK, "--report", str(report_path)]) == EX_OK
    report = json.loads(report_path.read_text())
    assert report["hypotheses"]["positivity_ok"] is True
    np.testing.assert_allclose(
        report["hypotheses"]["penalty_margin"], [0.8, 1.0], atol=1e-12
    )
    assert report["input"]["sha256"] == hashlib.sha256(TANK_PATH.read_bytes()).hexdigest()


# ---------------------------------------------------------------- synth


def test_synth_double_tank_report_roundtrip(tank, tmp_path, capsys):
    report_path = tmp_path / "synth.json"
    assert main(["synth", TANK, "--report", str(report_path)]) == EX_OK
    report = json.loads(report_path.read_text())
    cert = synthesize(tank)
    # decimal serialization must reproduce the certificate bit for bit
    assert report["p"] == cert.p.tolist()
    assert report["zeta"] == cert.zeta.tolist()
    assert report["K"] == cert.K.tolist()
    assert report["gamma_min"] == cert.gamma_min.tolist()
    assert report["status"] == "Synthesized"
    assert report["gamma_ok"] is True
    assert report["lp"]["status"] == "Optimal"
    assert report["spectral_radius"]["upper"] < 1.0


def test_synth_report_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["synth", TANK, "--report", str(a)]) == EX_OK
    assert main(["synth", TANK, "--report", str(b)]) == EX_OK
    assert a.read_bytes() == b.read_bytes()


def test_synth_gamma_override_flips_to_threshold_violation(tmp_path, capsys):
    report_path = tmp_path / "synth.json"
    code = main(["synth", TANK, "--gamma-override", "1.0", "--report", str(report_path)])
    assert code == EX_GAMMA
    report = json.loads(report_path.read_text())
    assert report["gamma_min"][0] == pytest.approx(1.32, abs=0.01)
    assert report["gamma_ok"] is False
    assert "below the threshold" in capsys.readouterr().out


def test_synth_gamma_override_validates_arity(capsys):
    assert main(["synth", TANK, "--gamma-override", "1.0,2.0"]) == EX_INPUT


def test_synth_unstable_uncontrollable_exits_no_value(write_instance, capsys):
    payload = scalar_payload(A=[[2.0]], E=[[0.0]], name="unstable")
    path = write_instance(payload)
    assert main(["synth", path]) == EX_NO_VALUE
    out = capsys.readouterr().out
    assert "no finite value" in out and "ray" in out


def test_synth_hypothesis_violation_and_force(write_instance, capsys):
    payload = scalar_payload(r=[2.0])  # breaks s > E'|r|, program infeasible
    path = write_instance(payload)
    assert main(["synth", path]) == EX_HYPOTHESES
    assert main(["synth", path, "--force"]) == EX_HYPOTHESES
    assert "infeasible" in capsys.readouterr().out
    # positivity broken but the program still solvable: force goes through
    payload = scalar_payload(A=[[0.1]], B=[[1.0]])
    path = write_instance(payload, "positivity.json")
    assert main(["synth", path]) == EX_HYPOTHESES
    assert main(["synth", path, "--force"]) == EX_OK


def test_synth_solver_budget_maps_to_exit_5(monkeypatch, capsys):
    import minpos.cli as cli

    def blown(instance, **kwargs):
        raise MaxPivotsExceeded(3)

    monkeypatch.setattr(cli.synthesis, "synthesize", blown)
    assert main(["synth", TANK]) == EX_SOLVER_LIMIT


def test_synth_verify_cross_checks(capsys):
    assert main(["synth", TANK, "--verify"]) == EX_OK
    assert "value iteration agrees" in capsys.readouterr().out


# ---------------------------------------------------------------- iterate


def test_iterate_double_tank_converges(capsys):
    assert main(["iterate", TANK]) == EX_OK
    assert "Converged" in capsys.readouterr().out


def test_iterate_low_price_names_the_iterate(write_instance, tank, capsys):
    path = write_instance(instance_payload(tank) | {"gamma": [1.0]})
    assert main(["iterate", path]) == EX_GAMMA
    out = capsys.readouterr().out
    assert "iterate 32" in out and "channel 0" in out


def test_iterate_unstable_diverges(write_instance, capsys):
    payload = scalar_payload(A=[[2.0]], B=[[0.0]], E=[[0.0]], F=[[0.0]])
    path = write_instance(payload)
    assert main(["iterate", path]) == EX_NO_VALUE


def test_iterate_budget_exit(write_instance, capsys):
    assert main(["iterate", TANK, "--max-iter", "5"]) == EX_SOLVER_LIMIT


def test_iterate_checks_hypotheses_first(write_instance, capsys):
    path = write_instance(scalar_payload(r=[2.0]))
    assert main(["iterate", path]) == EX_HYPOTHESES


# ---------------------------------------------------------------- simulate


def test_simulate_zero_disturbance_writes_csv(tmp_path, capsys):
    csv_path = tmp_path / "traj.csv"
    assert main(["simulate", TANK, "--horizon", "400", "--csv", str(csv_path)]) == EX_OK
    out = capsys.readouterr().out
    assert "cost bound satisfied" in out
    with open(csv_path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "x_1", "x_2", "u_1", "w_1", "partial_cost"]
    assert len(rows) == 402  # header + states 0..400
    assert float(rows[1][-1]) == 0.0
    assert rows[-1][3] == "" and rows[-1][4] == ""  # no input/disturbance at T
    final = float(rows[-1][-1])
    assert final <= TANK_VALUE
    # x0 from the instance file is used
    assert float(rows[1][1]) == 1.0 and float(rows[1][2]) == 1.0


def test_simulate_seeded_random_is_reproducible(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["simulate", TANK, "--disturbance", "random", "--seed", "5", "--horizon", "100"]
    assert main(args + ["--csv", str(a)]) == EX_OK
    assert main(args + ["--csv", str(b)]) == EX_OK
    assert a.read_bytes() == b.read_bytes()
    assert main(["simulate", TANK, "--disturbance", "random", "--seed", "6",
                 "--horizon", "100", "--csv", str(b)]) == EX_OK
    assert a.read_bytes() != b.read_bytes()


def test_simulate_disturbance_file(write_instance, tank, tmp_path, capsys):
    w_path = tmp_path / "w.json"
    w_path.write_text(json.dumps([[0.1]] * 50))
    assert main(["simulate", TANK, "--horizon", "50",
                 "--disturbance", str(w_path)]) == EX_OK
    assert "cost bound satisfied" in capsys.readouterr().out


def test_simulate_disturbance_file_too_short(tmp_path, capsys):
    w_path = tmp_path / "w.json"
    w_path.write_text(json.dumps([[0.1]] * 10))
    assert main(["simulate", TANK, "--horizon", "50",
                 "--disturbance", str(w_path)]) == EX_INPUT


def test_simulate_adversarial_reports_crossing(write_instance, tank, capsys):
    path = write_instance(instance_payload(tank, x0=[1.0, 1.0]) | {"gamma": [1.0]})
    assert main(["simulate", path, "--disturbance", "adversarial",
                 "--bound", "50"]) == EX_OK
    out = capsys.readouterr().out
    assert "exceeds 50" in out and "horizon" in out


def test_simulate_adversarial_with_covered_price_stays_bounded(capsys):
    assert main(["simulate", TANK, "--disturbance", "adversarial",
                 "--horizon", "200"]) == EX_OK
    out = capsys.readouterr().out
    assert "costs stay bounded" in out
    assert "cost bound satisfied" in out


def test_simulate_synthesis_failure_propagates(write_instance, capsys):
    payload = scalar_payload(A=[[2.0]], E=[[0.0]], name="unstable")
    path = write_instance(payload)
    assert main(["simulate", path]) == EX_NO_VALUE


def test_simulate_hypothesis_violation(write_instance, capsys):
    path = write_instance(scalar_payload(r=[2.0]))
    assert main(["simulate", path]) == EX_HYPOTHESES


# ---------------------------------------------------------------- misc


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert "minpos" in capsys.readouterr().out


def test_module_entry_point_subprocess():
    proc = subprocess.run(
        [sys.executable, "-m", "minpos", "synth", TANK],
        capture_output=True, text=True, timeout=60,
    )
    assert proc.returncode == EX_OK
    assert "Synthesized" in proc.stdout


def test_random_instances_round_trip_through_files(write_instance, capsys):
    for seed in (1, 5):
        inst = random_instance(seed)
        path = write_instance(instance_payload(inst), f"r{seed}.json")
        assert main(["check", path]) == EX_OK
        assert main(["synth", path]) == EX_OK
        assert main(["iterate", path]) == EX_OK
