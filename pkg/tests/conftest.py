import math

import pytest

from tetralib import SolverParams, save_table, solve


@pytest.fixture(scope="session")
def table_e():
    return solve(math.e, SolverParams())


@pytest.fixture(scope="session")
def table_2():
    return solve(2.0, SolverParams())


@pytest.fixture(scope="session")
def table_e_fine():
    return solve(math.e, SolverParams(n_nodes=256, height=8.0))


@pytest.fixture(scope="session")
def table_dir(tmp_path_factory, table_e, table_2):
    d = tmp_path_factory.mktemp("tables")
    save_table(table_e, d / "table_e.json")
    save_table(table_2, d / "table_2.json")
    return d


_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_line():
    """Record the one-line verdict of an acceptance criterion."""

    def record(number, passed, text):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {text}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
