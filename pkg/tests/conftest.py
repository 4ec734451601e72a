import pytest

from flamefront.phase_plane import steady_solution
from flamefront.poles import coalescent_steady


@pytest.fixture(scope="session")
def v1_half():
    return steady_solution(1, "+", 0.5)


@pytest.fixture(scope="session")
def v2_fifth():
    return steady_solution(2, "+", 0.2)


@pytest.fixture(scope="session")
def two_pole_quarter():
    return coalescent_steady(2, 0.25)


ACCEPTANCE_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_LINES] = []


@pytest.fixture
def report(request):
    """Record one PASS/FAIL line for an acceptance criterion."""
    lines = request.config.stash[ACCEPTANCE_LINES]

    def emit(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        lines.append(line)
        print(line)
        return ok

    return emit


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
