import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from zitterguide import medium, scenario  # noqa: E402

# acceptance outcomes, printed one line per criterion at the end of the run
ACCEPTANCE = {}


def record(criterion, passed, detail=""):
    ACCEPTANCE[criterion] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def hene():
    return scenario.BUILTIN["hene-smf"]


@pytest.fixture(scope="session")
def photon5(hene):
    return hene.photon(5.0)


@pytest.fixture(scope="session")
def electron5(hene):
    return hene.electron(5.0)


@pytest.fixture(scope="session")
def step_profile():
    return medium.step()


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)
