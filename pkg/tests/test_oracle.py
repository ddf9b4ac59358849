import random
from math import comb

import pytest

from gridconf import kernels
from gridconf.grid_model import Configuration
from gridconf.oracle import (
    EnumerationReport,
    enumerate_optimal,
    feasible_count,
    integer_determinant,
    matrix_tree_count,
)
from gridconf.reliability import assign_failure_rates, average_curtailed_power
from gridconf.topology import is_spanning_tree_uf

from conftest import make_network


@pytest.fixture(scope="module")
def report33(net33, model33):
    return enumerate_optimal(net33, model33, top_k=10)


def test_integer_determinant():
    assert integer_determinant([[2, 1], [1, 2]]) == 3
    assert integer_determinant([[0, 1], [1, 0]]) == -1
    assert integer_determinant([[1, 2], [2, 4]]) == 0


def test_small_graph_counts(triangle, square):
    assert feasible_count(triangle) == matrix_tree_count(triangle) == 3
    assert feasible_count(square) == matrix_tree_count(square) == 4


def test_k4_counts():
    net = make_network(4, [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)], ties={4, 5, 6})
    assert feasible_count(net) == matrix_tree_count(net) == 16


def test_33_feasible_count(net33, report33):
    assert report33.feasible == feasible_count(net33) == matrix_tree_count(net33)


def test_report_totals(report33):
    assert report33.total == comb(37, 5) == 435_897
    assert report33.rank_verified
    assert len(report33.top_k) == 10
    acps = [row["acp"] for row in report33.top_k]
    assert acps == sorted(acps)
    assert report33.best_acp == acps[0]


def test_best_not_worse_than_reference_set(net33, model33, report33):
    reference = average_curtailed_power(net33, model33, Configuration.of(net33, [7, 14, 26, 33, 34]))
    assert report33.best_acp <= reference


def test_best_beats_random_feasible(net33, model33, report33):
    rng = random.Random(8)
    checked = 0
    while checked < 1000:
        cfg = Configuration(frozenset(rng.sample(net33.branch_ids, 5)))
        if is_spanning_tree_uf(net33, cfg):
            assert report33.best_acp <= average_curtailed_power(net33, model33, cfg)
            checked += 1


def test_workers_do_not_change_result(net33, model33, report33):
    again = enumerate_optimal(net33, model33, top_k=10, workers=3)
    a, b = report33.to_dict(), again.to_dict()
    a.pop("wall_time_s"), b.pop("wall_time_s")
    assert a == b


def test_round_trip(report33):
    assert EnumerationReport.from_dict(report33.to_dict()) == report33


def test_python_backend_small(square):
    model = assign_failure_rates(square)
    fast = enumerate_optimal(square, model, top_k=4)
    slow = enumerate_optimal(square, model, top_k=4, use_python=True)
    assert fast.top_k == slow.top_k
    assert slow.backend == "python"
    assert fast.backend == kernels.BACKEND


def test_tie_break_is_lexicographic():
    # every feeder branch has identical rates and no demand beyond bus 2,
    # so several open sets share the minimum
    net = make_network(4, [(1, 2, 1, 0), (2, 3, 1, 0), (3, 4, 1, 0), (4, 1, 1, 0)], ties={4},
                       demand={2: 0.0, 3: 0.0, 4: 0.0})
    report = enumerate_optimal(net, assign_failure_rates(net), top_k=4)
    assert [row["open_edges"] for row in report.top_k] == [[1], [2], [3], [4]]
