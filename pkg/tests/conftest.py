import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

from gridtrust.design import Group, build_plan
from gridtrust.sim import WorldConfig

EXPERIMENT_SEED = 20240512


@pytest.fixture(scope="session")
def world() -> WorldConfig:
    return WorldConfig()


@pytest.fixture(scope="session")
def plan_g0():
    return build_plan(EXPERIMENT_SEED, Group.G0)


@pytest.fixture(scope="session")
def plan_g1():
    return build_plan(EXPERIMENT_SEED, Group.G1)
