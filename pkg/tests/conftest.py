import pytest

from hypdetect.config import ModelParams


@pytest.fixture
def params100():
    return ModelParams(n=100, nu=1.0, alpha=0.75, beta=0.5)


@pytest.fixture
def params2000():
    return ModelParams(n=2000, nu=1.0, alpha=0.75, beta=0.5)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
