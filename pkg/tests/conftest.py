import pytest

from gridconf.grid_model import Branch, Bus, Network, load_dataset
from gridconf.reliability import assign_failure_rates


def make_network(n_buses, edges, ties=(), demand=None, name="toy"):
    """edges: list of (from, to) or (from, to, r, x); branch ids follow list order."""
    demand = demand or {}
    buses = tuple(Bus(i, float(demand.get(i, 10.0 if i > 1 else 0.0))) for i in range(1, n_buses + 1))
    branches = []
    for i, e in enumerate(edges, 1):
        a, b = e[0], e[1]
        r, x = (e[2], e[3]) if len(e) == 4 else (float(i), 0.0)
        branches.append(Branch(i, a, b, float(r), float(x), i in ties))
    return Network(name, buses, tuple(branches), 1)


@pytest.fixture(scope="session")
def net33():
    return load_dataset("33")


@pytest.fixture(scope="session")
def net69():
    return load_dataset("69")


@pytest.fixture(scope="session")
def model33(net33):
    return assign_failure_rates(net33)


@pytest.fixture(scope="session")
def model69(net69):
    return assign_failure_rates(net69)


@pytest.fixture
def triangle():
    return make_network(3, [(1, 2), (2, 3), (1, 3)], ties={3})


@pytest.fixture
def square():
    return make_network(4, [(1, 2), (2, 3), (3, 4), (4, 1)], ties={4})


_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    number, text = marker.args
    passed = call.excinfo is None
    prev = _criteria.get(number, (True, text))
    _criteria[number] = (prev[0] and passed, text)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        ok, text = _criteria[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {text}")
