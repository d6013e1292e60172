import pytest

from textnorm.experiment import grammar_fst


@pytest.fixture(scope="session")
def specific():
    return grammar_fst("language-specific")


@pytest.fixture(scope="session")
def covering():
    return grammar_fst("covering")


CRITERIA: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA:
            terminalreporter.write_line(line)
