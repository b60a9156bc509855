import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from relindex.models import DomainWallConfig, MassProfile, build_agreeing_pair

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"

PM = ((-1, 1, 1), (1, 1, -1))


def walls_config(signs=PM[0], signs_t=PM[1], sites=200, half_length=10.0, **kw):
    return DomainWallConfig.walls(signs, signs_t, sites=sites, half_length=half_length, **kw)


def single_wall_config(sites=400, half_length=10.0, sign=1):
    prof = MassProfile((0.0,), (-sign, sign))
    return DomainWallConfig(sites, prof, prof, half_length)


@pytest.fixture(scope="session")
def pm200():
    return build_agreeing_pair(walls_config(sites=200))


@pytest.fixture(scope="session")
def pm400():
    return build_agreeing_pair(walls_config(sites=400))


@pytest.fixture(scope="session")
def same200():
    return build_agreeing_pair(walls_config(PM[0], PM[0], sites=200))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one PASS/FAIL line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
