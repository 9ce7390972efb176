import numpy as np
import pytest

from bergman_dpp import BergmanSpectrum, FamilySpec, GeometricWeights

# one verdict line per acceptance criterion; printed after the test summary
acceptance_lines: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture
def disc09():
    return BergmanSpectrum.disc(0.9)


@pytest.fixture
def disc08():
    return BergmanSpectrum.disc(0.8)


@pytest.fixture
def annulus59():
    return BergmanSpectrum.annulus(0.5, 0.9)


@pytest.fixture
def midpoint_family():
    # seed [0.2, 0.3], weights 0.1 * 0.5**k, midpoint placement
    return FamilySpec(0.2, 0.3, GeometricWeights(0.1, 0.5), 50)


@pytest.fixture
def rng():
    return np.random.default_rng(20250815)


@pytest.fixture(scope="session")
def acceptance_log():
    return acceptance_lines
