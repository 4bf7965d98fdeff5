import json
from pathlib import Path

import numpy as np
import pytest

from minpos.model import ProblemInstance

TANK_PATH = Path(__file__).resolve().parent.parent / "instances" / "double_tank.json"

# Reference solution of the double-tank benchmark, confirmed independently
# by the value-iteration tests at tight tolerance.
TANK_P = np.array([13.090084518655946, 28.409090909090903])
TANK_ZETA = np.array([1.519342661306947])
TANK_GAMMA_MIN = np.array([1.319342661306947])
TANK_K = np.array([[1.0, 0.0]])
TANK_VALUE = 41.49917542774685  # p'x0 with x0 = [1, 1]


@pytest.fixture(scope="session")
def tank_payload():
    with open(TANK_PATH) as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def tank(tank_payload):
    return ProblemInstance.from_matrices(
        A=tank_payload["A"],
        B=tank_payload["B"],
        F=tank_payload["F"],
        E=tank_payload["E"],
        s=tank_payload["s"],
        r=tank_payload["r"],
        gamma=tank_payload["gamma"],
        name=tank_payload.get("name"),
    )


@pytest.fixture
def write_instance(tmp_path):
    """Dump a payload dict to a temp JSON file and return its path."""

    def _write(payload, filename="instance.json"):
        path = tmp_path / filename
        path.write_text(json.dumps(payload))
        return str(path)

    return _write


def scalar_payload(**overrides):
    """The A=0.5, B=0, E=1, s=1, r=0 closed-form instance as a payload."""
    payload = {
        "n": 1,
        "m": 1,
        "l": 1,
        "A": [[0.5]],
        "B": [[0.0]],
        "F": [[1.0]],
        "E": [[1.0]],
        "s": [1.0],
        "r": [0.0],
        "gamma": [2.0],
        "name": "scalar",
    }
    payload.update(overrides)
    return payload


def scalar_instance(**overrides):
    payload = scalar_payload(**overrides)
    for key in ("n", "m", "l", "name", "x0"):
        payload.pop(key, None)
    return ProblemInstance.from_matrices(name="scalar", **payload)
