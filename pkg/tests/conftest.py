import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from acceptance_log import ACCEPTANCE_LINES  # noqa: E402
from dwellcert import SubsystemFamily, example_family, perturbed_example_family  # noqa: E402


@pytest.fixture
def ex1():
    return example_family()


@pytest.fixture
def ex1_perturbed():
    return perturbed_example_family()


@pytest.fixture
def ex1_plus():
    """Example matrices plus A3 = 0.5 I, for three-letter words."""
    fam = example_family()
    return SubsystemFamily([fam[1], fam[2], 0.5 * np.eye(2)])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
