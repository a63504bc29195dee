import sys

import numpy as np
import pytest

from rieszmix.lattice import SampleSpace
from rieszmix.processes import ProcessSpec, sequence_from_spec


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def coins3():
    return sequence_from_spec(ProcessSpec("independent-innovations", 3))


@pytest.fixture
def ma1():
    return sequence_from_spec(ProcessSpec("moving-average", 6, theta=(1.0, 0.5)))


@pytest.fixture
def four_point():
    return SampleSpace([0.1, 0.2, 0.3, 0.4])


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
