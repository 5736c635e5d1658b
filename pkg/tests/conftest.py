from pathlib import Path

import numpy as np
import pytest

from fuzzy_rrt.arm import ArmGeometry, JointConfig, Obstacle, Scenario, load_scenario

ROOT = Path(__file__).resolve().parents[1]
SCENARIOS = ROOT / "scenarios"


@pytest.fixture
def geometry():
    return ArmGeometry(0.3, 0.3)


@pytest.fixture
def default_scenario():
    return load_scenario(SCENARIOS / "default.json")


@pytest.fixture
def enclosed_scenario():
    return load_scenario(SCENARIOS / "enclosed.json")


@pytest.fixture
def empty_scenario(geometry):
    return Scenario(geometry, (), JointConfig(0, 0), JointConfig(40, -30))


@pytest.fixture
def blocked_scenario(geometry):
    """Single obstacle at the fully extended end-effector position (0.6, 0)."""
    return Scenario(geometry, (Obstacle((0.6, 0.0), 0.02),), JointConfig(-10, 0), JointConfig(10, 0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
