"""Branch failure rates, per-bus unavailability and average curtailed power.

Units: failure rates in failures/year, repair times in hours, demand in kW.
Unavailability is hours/year and the objective is reported in MWh/year.
"""

from __future__ import annotations

from dataclasses import dataclass

from .grid_model import Configuration, Network
from .topology import RootedTree, build_rooted_tree

DEFAULT_LAMBDA_MIN = 0.1
DEFAULT_LAMBDA_MAX = 0.4
DEFAULT_REPAIR_HOURS = 6.0


@dataclass(frozen=True)
class ReliabilityModel:
    lambda_per_branch: dict[int, float]
    repair_hours_per_branch: dict[int, float]
    lambda_min: float = DEFAULT_LAMBDA_MIN
    lambda_max: float = DEFAULT_LAMBDA_MAX
    repair_hours_default: float = DEFAULT_REPAIR_HOURS

    def outage_hours(self, branch_id: int) -> float:
        """Expected outage hours per year contributed by one branch."""
        return self.lambda_per_branch[branch_id] * self.repair_hours_per_branch[branch_id]

    def outage_vector(self, net: Network) -> list[float]:
        return [self.outage_hours(i) for i in net.branch_ids]

    def scaled(self, factor: float) -> "ReliabilityModel":
        return ReliabilityModel(
            {k: v * factor for k, v in self.lambda_per_branch.items()},
            dict(self.repair_hours_per_branch),
            self.lambda_min * factor,
            self.lambda_max * factor,
            self.repair_hours_default,
        )


def assign_failure_rates(
    net: Network,
    lambda_min: float = DEFAULT_LAMBDA_MIN,
    lambda_max: float = DEFAULT_LAMBDA_MAX,
    repair_hours: float = DEFAULT_REPAIR_HOURS,
) -> ReliabilityModel:
    """Interpolate failure rates linearly in impedance magnitude.

    The smallest feeder impedance maps to ``lambda_min`` and the largest to
    ``lambda_max``. Tie branches are fully reliable and excluded from the
    impedance range. If every feeder branch has the same impedance they all
    get ``lambda_min``.
    """
    if not (lambda_max >= lambda_min >= 0):
        raise ValueError(f"need lambda_max >= lambda_min >= 0, got {lambda_min}, {lambda_max}")
    if repair_hours <= 0:
        raise ValueError(f"repair_hours must be positive, got {repair_hours}")

    feeder = [br for br in net.branches if not br.is_tie]
    z = [br.impedance for br in feeder]
    z_min, z_max = min(z), max(z)
    span = z_max - z_min

    rates = {}
    for br in net.branches:
        if br.is_tie:
            rates[br.id] = 0.0
        elif span == 0:
            rates[br.id] = lambda_min
        else:
            rates[br.id] = lambda_min + (lambda_max - lambda_min) * (br.impedance - z_min) / span
    repair = {br.id: float(repair_hours) for br in net.branches}
    return ReliabilityModel(rates, repair, lambda_min, lambda_max, float(repair_hours))


def unavailability(net: Network, model: ReliabilityModel, tree: RootedTree) -> dict[int, float]:
    """Annual unavailability (h/yr) of every bus, one pass down the tree."""
    u = {tree.root: 0.0}
    for bus in tree.order[1:]:
        par, branch_id = tree.parent[bus]
        u[bus] = u[par] + model.outage_hours(branch_id)
    return u


def acp_from_unavailability(net: Network, u: dict[int, float]) -> float:
    # Fixed bus-id summation order; the enumeration kernels reproduce it exactly.
    total = 0.0
    for bus in net.buses:
        if bus.demand_kw > 0:
            total += bus.demand_kw * u[bus.id]
    return total / 1000.0


def average_curtailed_power(net: Network, model: ReliabilityModel, cfg: Configuration) -> float:
    """Expected energy not supplied in MWh/yr.

    Raises ConstraintError if ``cfg`` is not a spanning tree.
    """
    tree = build_rooted_tree(net, cfg)
    return acp_from_unavailability(net, unavailability(net, model, tree))
