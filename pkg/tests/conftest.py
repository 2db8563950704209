import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import disc  # noqa: E402


@pytest.fixture
def dumbbell():
    """Two radius-20 discs with centres 30 px apart, as a bool mask."""
    shape = (80, 110)
    return disc(shape, 40, 40, 20) | disc(shape, 70, 40, 20)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if not test_acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(test_acceptance.RESULTS):
        terminalreporter.write_line(test_acceptance.RESULTS[n])
