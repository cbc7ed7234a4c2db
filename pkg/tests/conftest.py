import pytest

from helpers.instances import t1_instance

ACCEPTANCE_LINES = []


@pytest.fixture
def t1():
    return t1_instance()


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
