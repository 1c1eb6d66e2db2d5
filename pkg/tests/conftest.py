import pytest

from arcbench.circuit import ArcOptions, build_arc
from arcbench.code_graph import LinkGraph

# three code qubits 0, 3, 6 with auxiliaries 1 and 5
SMALL_LINKS = ((0, 1, 3), (3, 5, 6))
SMALL_COLOR = {0: 0, 3: 1, 6: 0}
SMALL_SCHEDULE = [[(0, 1), (3, 5)], [(3, 1), (6, 5)]]


@pytest.fixture
def small_graph():
    return LinkGraph(SMALL_LINKS)


@pytest.fixture
def small_circuits(small_graph):
    opts = ArcOptions(T=2, basis="zx", logical=0, run_202=False)
    return build_arc(small_graph, SMALL_COLOR, SMALL_SCHEDULE, opts)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
