import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from deliberank import scenario_s100  # noqa: E402
from deliberank.io import DATA_DIR  # noqa: E402


@pytest.fixture(scope="session")
def s100():
    return scenario_s100()


@pytest.fixture(scope="session")
def s100_dir():
    return DATA_DIR / "s100"


@pytest.fixture(scope="session")
def scenario_dir():
    return DATA_DIR / "scenarios"


def pytest_terminal_summary(terminalreporter):
    import acceptance_log

    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_log.LINES:
            terminalreporter.write_line(line)
