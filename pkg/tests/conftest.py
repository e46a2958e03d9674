import numpy as np
import pytest

from conceptgraph.modularity import louvain

from _util import make_bipartite, make_weighted

_CRITERIA: dict[str, str] = {}
_OUTCOMES: dict[str, str] = {}


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the jit kernels once so runtime budgets measure the
    algorithm, not compilation."""
    louvain(make_weighted(3, [(0, 1), (1, 2), (0, 2)]), seed=0)
    louvain(make_bipartite(2, 2, [(0, 0), (1, 1)]), seed=0)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240915)


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("acceptance")
        if marker is not None:
            _CRITERIA[item.nodeid] = marker.args[0]


def pytest_runtest_logreport(report):
    if report.nodeid not in _CRITERIA:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _OUTCOMES[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, label in _CRITERIA.items():
        outcome = _OUTCOMES.get(nodeid, "not run")
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(
            outcome, outcome.upper()
        )
        terminalreporter.write_line(f"[{status}] {label}")
