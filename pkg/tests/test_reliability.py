import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from gridconf.errors import ConstraintError
from gridconf.grid_model import Bus, Configuration, Network, base_configuration
from gridconf.reliability import (
    ReliabilityModel,
    assign_failure_rates,
    average_curtailed_power,
    unavailability,
)
from gridconf.topology import build_rooted_tree, is_spanning_tree_uf

from conftest import make_network


def naive_unavailability(net, model, cfg):
    """Per-bus path sum found by depth-first search for each bus separately."""
    closed = [net.branch(i) for i in cfg.closed_edges(net)]
    out = {}
    for target in (b.id for b in net.buses):
        stack = [(net.root, None, [])]
        while stack:
            v, via, path = stack.pop()
            if v == target:
                out[target] = math.fsum(model.lambda_per_branch[i] * model.repair_hours_per_branch[i] for i in path)
                break
            for br in closed:
                if br.id == via:
                    continue
                if br.from_bus == v:
                    stack.append((br.to_bus, br.id, path + [br.id]))
                elif br.to_bus == v:
                    stack.append((br.from_bus, br.id, path + [br.id]))
    return out


def naive_acp(net, model, cfg):
    u = naive_unavailability(net, model, cfg)
    return math.fsum(b.demand_kw * u[b.id] for b in net.buses) / 1000


def random_feasible(net, rng, count):
    found = []
    while len(found) < count:
        cfg = Configuration(frozenset(rng.sample(net.branch_ids, net.n_ties)))
        if is_spanning_tree_uf(net, cfg):
            found.append(cfg)
    return found


def test_rate_bounds(net33, model33):
    feeder = [br for br in net33.branches if not br.is_tie]
    zmax = max(feeder, key=lambda b: b.impedance)
    zmin = min(feeder, key=lambda b: b.impedance)
    assert model33.lambda_per_branch[zmax.id] == pytest.approx(0.4, abs=1e-15)
    assert model33.lambda_per_branch[zmin.id] == pytest.approx(0.1, abs=1e-15)
    for tid in net33.tie_ids:
        assert model33.lambda_per_branch[tid] == 0.0
    assert set(model33.repair_hours_per_branch.values()) == {6.0}


def test_rate_midpoint():
    net = make_network(3, [(1, 2, 1.0, 0.0), (2, 3, 3.0, 0.0), (1, 3, 2.0, 0.0)], ties={3})
    model = assign_failure_rates(net)
    assert model.lambda_per_branch[1] == pytest.approx(0.1)
    assert model.lambda_per_branch[2] == pytest.approx(0.4)
    net = make_network(4, [(1, 2, 1.0, 0.0), (2, 3, 2.0, 0.0), (3, 4, 3.0, 0.0), (1, 4, 1.0, 1.0)], ties={4})
    assert assign_failure_rates(net).lambda_per_branch[2] == pytest.approx(0.25)


def test_degenerate_interpolation():
    net = make_network(3, [(1, 2, 1.0, 1.0), (2, 3, 1.0, 1.0), (1, 3, 5.0, 5.0)], ties={3})
    model = assign_failure_rates(net)
    assert model.lambda_per_branch[1] == model.lambda_per_branch[2] == 0.1


def test_bad_bounds(net33):
    with pytest.raises(ValueError):
        assign_failure_rates(net33, 0.4, 0.1)
    with pytest.raises(ValueError):
        assign_failure_rates(net33, repair_hours=0)


def test_chain_unavailability():
    net = make_network(3, [(1, 2), (2, 3), (1, 3)], ties={3})
    model = ReliabilityModel({1: 0.1, 2: 0.2, 3: 0.0}, {1: 6.0, 2: 6.0, 3: 6.0})
    u = unavailability(net, model, build_rooted_tree(net, base_configuration(net)))
    assert u[1] == 0.0
    assert u[2] == pytest.approx(0.6)
    assert u[3] == pytest.approx(1.8)


def test_unavailability_matches_naive_33(net33, model33):
    cfg = base_configuration(net33)
    tree = build_rooted_tree(net33, cfg)
    u = unavailability(net33, model33, tree)
    ref = naive_unavailability(net33, model33, cfg)
    for bus in ref:
        assert u[bus] == pytest.approx(ref[bus], rel=1e-12, abs=0)
    for child, (par, _) in tree.parent.items():
        assert u[child] >= u[par]
    assert average_curtailed_power(net33, model33, cfg) == pytest.approx(naive_acp(net33, model33, cfg), rel=1e-12)


def test_reference_configurations(net33, model33, net69, model69):
    acp33 = average_curtailed_power(net33, model33, Configuration.of(net33, [7, 14, 26, 33, 34]))
    acp69 = average_curtailed_power(net69, model69, Configuration.of(net69, [14, 18, 21, 58, 69]))
    assert acp33 == pytest.approx(23.96, abs=0.01)
    assert acp69 == pytest.approx(28.48, abs=0.01)


def test_zero_rates_give_zero(net33, model33):
    assert average_curtailed_power(net33, model33.scaled(0.0), base_configuration(net33)) == 0.0


def test_infeasible_raises(net33, model33):
    with pytest.raises(ConstraintError):
        average_curtailed_power(net33, model33, Configuration.of(net33, [1, 2, 3, 4, 5]))


def _scaled_demand(net, c):
    return Network(net.name, tuple(Bus(b.id, b.demand_kw * c) for b in net.buses), net.branches, net.root)


@settings(max_examples=25, deadline=None)
@given(c=st.floats(0.1, 10), seed=st.integers(0, 10_000))
def test_linearity(net33, model33, c, seed):
    cfg = random_feasible(net33, random.Random(seed), 1)[0]
    base = average_curtailed_power(net33, model33, cfg)
    assert average_curtailed_power(_scaled_demand(net33, c), model33, cfg) == pytest.approx(c * base, rel=1e-12)
    assert average_curtailed_power(net33, model33.scaled(c), cfg) == pytest.approx(c * base, rel=1e-12)


def test_branch_order_invariance(net33, model33):
    rng = random.Random(5)
    shuffled = list(net33.branches)
    rng.shuffle(shuffled)
    other = Network(net33.name, net33.buses, tuple(shuffled), net33.root)
    for cfg in random_feasible(net33, rng, 20):
        assert average_curtailed_power(other, model33, cfg) == pytest.approx(
            average_curtailed_power(net33, model33, cfg), rel=1e-12)


def test_acp_positive(net69, model69):
    for cfg in random_feasible(net69, random.Random(2), 20):
        assert average_curtailed_power(net69, model69, cfg) > 0
