"""Episodic reconfiguration environment.

An episode starts from the all-closed mesh and opens one branch per step
until ``T`` branches are open. Only the final step is rewarded: a fixed
penalty if the configuration leaves a bus unsupplied or contains a loop,
otherwise the negative scaled average curtailed power.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import InvalidActionError
from .grid_model import Configuration, Network, base_configuration
from .reliability import ReliabilityModel, acp_from_unavailability, unavailability
from .topology import all_nodes_traversed, build_rooted_tree, is_radial

DEFAULT_PENALTY = 100.0
DEFAULT_SCALE_TARGET = 50.0


@dataclass(frozen=True)
class EnvState:
    status: tuple[int, ...]  # 1 = closed, 0 = open, in branch order
    step_index: int = 0


@dataclass(frozen=True)
class RewardOutcome:
    reward: float
    feasible: Optional[bool] = None  # None for non-terminal steps
    acp: Optional[float] = None
    violated: Optional[str] = None  # "none", "traversal" or "radiality" once evaluated


INTERMEDIATE = RewardOutcome(0.0)


def terminal_reward(
    net: Network,
    model: ReliabilityModel,
    cfg: Configuration,
    penalty: float = DEFAULT_PENALTY,
    scale: float = 1.0,
) -> RewardOutcome:
    """Score a complete configuration; traversal is checked before radiality."""
    if not all_nodes_traversed(net, cfg):
        return RewardOutcome(-penalty, False, None, "traversal")
    if not is_radial(net, cfg):
        return RewardOutcome(-penalty, False, None, "radiality")
    tree = build_rooted_tree(net, cfg)
    acp = acp_from_unavailability(net, unavailability(net, model, tree))
    return RewardOutcome(-acp / scale, True, acp, "none")


class ReconfigEnv:
    """Sequential edge-opening decision process over one network.

    ``reward_scale`` defaults to ACP(base configuration) / 50 so feasible
    rewards land around [-50, 0].
    """

    def __init__(self, net: Network, model: ReliabilityModel, T: int | None = None,
                 penalty: float = DEFAULT_PENALTY, reward_scale: float | None = None):
        self.net = net
        self.model = model
        self.T = net.n_ties if T is None else T
        if not 1 <= self.T <= net.n_branches:
            raise ValueError(f"T must lie in 1..{net.n_branches}, got {self.T}")
        self.penalty = float(penalty)
        if reward_scale is None:
            base = terminal_reward(net, model, base_configuration(net))
            reward_scale = base.acp / DEFAULT_SCALE_TARGET if base.feasible and base.acp > 0 else 1.0
        if reward_scale <= 0:
            raise ValueError("reward_scale must be positive")
        self.reward_scale = float(reward_scale)
        self._column = {bid: i for i, bid in enumerate(net.branch_ids)}
        self._cache: dict[frozenset, RewardOutcome] = {}

    @property
    def n_actions(self) -> int:
        return self.net.n_branches

    def reset(self) -> EnvState:
        return EnvState((1,) * self.net.n_branches, 0)

    def valid_actions(self, state: EnvState) -> list[int]:
        ids = self.net.branch_ids
        return [ids[i] for i, s in enumerate(state.status) if s]

    def action_mask(self, state: EnvState) -> list[bool]:
        return [bool(s) for s in state.status]

    def configuration(self, state: EnvState) -> Configuration:
        ids = self.net.branch_ids
        return Configuration(frozenset(ids[i] for i, s in enumerate(state.status) if not s))

    def is_terminal(self, state: EnvState) -> bool:
        return state.step_index >= self.T

    def evaluate(self, cfg: Configuration) -> RewardOutcome:
        out = self._cache.get(cfg.open_edges)
        if out is None:
            out = terminal_reward(self.net, self.model, cfg, self.penalty, self.reward_scale)
            self._cache[cfg.open_edges] = out
        return out

    def step(self, state: EnvState, action: int) -> tuple[EnvState, RewardOutcome, bool]:
        if self.is_terminal(state):
            raise InvalidActionError("episode already terminated")
        idx = self._column.get(action)
        if idx is None:
            raise InvalidActionError(f"unknown branch {action}")
        if not state.status[idx]:
            raise InvalidActionError(f"branch {action} is already open")
        status = list(state.status)
        status[idx] = 0
        nxt = EnvState(tuple(status), state.step_index + 1)
        if not self.is_terminal(nxt):
            return nxt, INTERMEDIATE, False
        return nxt, self.evaluate(self.configuration(nxt)), True
