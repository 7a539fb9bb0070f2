import pytest

from relgrowth.automaton import decompose
from relgrowth.counting import edge_weighting
from relgrowth.fixtures import load_fixture


@pytest.fixture(scope="session")
def f2():
    a = load_fixture("f2")
    return a, edge_weighting(a), decompose(a)


@pytest.fixture(scope="session")
def f2_nu1():
    a = load_fixture("f2_nu1")
    return a, edge_weighting(a), decompose(a)


@pytest.fixture(scope="session")
def f3():
    a = load_fixture("f3")
    return a, edge_weighting(a), decompose(a)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
