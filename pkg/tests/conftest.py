import pytest

from seaice_filippov import ForcingParams

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def defaults():
    return ForcingParams()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
