import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from irsnav import load_scenario, scenario_from_dict  # noqa: E402


SMALL_CFG = {
    "room": {"x_min": 0.0, "x_max": 4.0, "y_min": 0.0, "y_max": 3.0},
    "grid": {"delta": 1.0},
    "ap": {"position": [2.0, 3.0, 2.0]},
    "irs": {"position": [2.0, 0.0, 2.0], "normal": [0.0, 1.0, 0.0],
            "nx": 2, "nz": 1, "sub_nx": 2, "sub_nz": 2},
    "obstacles": [{"center": [2.0, 1.5], "size": [1.0, 1.0], "height": 1.5}],
    "robot": {"height": 1.0, "start": [0.5, 0.5], "goal": [3.5, 2.5], "v_max": 0.5},
    "channel": {"carrier_freq": 2.0e9, "rician_factor_db": 3.0},
    "planning": {"gamma_bar_db": -70.0},
}


@pytest.fixture(scope="session")
def scene():
    return load_scenario()


@pytest.fixture
def small_cfg():
    import copy
    return copy.deepcopy(SMALL_CFG)


@pytest.fixture
def small_scene(small_cfg):
    return scenario_from_dict(small_cfg)


@pytest.fixture(scope="session")
def maps(scene):
    from irsnav.experiments import DEFAULT_MODES, MapCache
    cache = MapCache(directory="")
    return {m: cache.get(scene, m) for m in DEFAULT_MODES}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one summary line per acceptance criterion, printed after the run
ACCEPTANCE: dict[str, str] = {}


def record(criterion: str, ok, detail: str) -> None:
    status = {True: "PASS", False: "FAIL", None: "INFO"}[ok]
    ACCEPTANCE[criterion] = f"[{status}] criterion {criterion}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (len(k.split()[0]), k)):
        terminalreporter.write_line(ACCEPTANCE[key])
