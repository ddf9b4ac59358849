"""Reliability-driven reconfiguration of radial distribution feeders."""

from .errors import (
    ConstraintError,
    DatasetParseError,
    GridconfError,
    InvalidActionError,
    NotFoundError,
    NumericHealthError,
    ValidationError,
)
from .grid_model import (
    Branch,
    Bus,
    Configuration,
    Network,
    base_configuration,
    load_dataset,
    load_network,
)
from .kernels import BACKEND
from .reliability import ReliabilityModel, assign_failure_rates, average_curtailed_power
from .topology import all_nodes_traversed, build_rooted_tree, is_radial, rank_gf2

__version__ = "0.1.0"
