"""Deep Q-learning over switch configurations.

The Q-network is a small numpy MLP trained online, one gradient step per
transition, with a periodically synchronised target copy supplying the
bootstrap term. There is no replay buffer.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .env import DEFAULT_PENALTY, EnvState, ReconfigEnv, RewardOutcome
from .errors import NotFoundError, NumericHealthError
from .grid_model import Configuration, Network
from .reliability import (
    DEFAULT_LAMBDA_MAX,
    DEFAULT_LAMBDA_MIN,
    DEFAULT_REPAIR_HOURS,
    ReliabilityModel,
)

ACTIVATIONS = ("relu", "tanh")


class QFunction:
    """Fully connected network: hidden layers use ``activation``, output is linear."""

    def __init__(self, weights: list[np.ndarray], biases: list[np.ndarray], activation: str = "relu"):
        if activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}")
        self.weights = weights
        self.biases = biases
        self.activation = activation

    @classmethod
    def init(cls, sizes: Sequence[int], rng: np.random.Generator, activation: str = "relu") -> "QFunction":
        weights, biases = [], []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            if activation == "relu":
                w = rng.normal(0.0, math.sqrt(2.0 / fan_in), size=(fan_in, fan_out))
            else:
                limit = math.sqrt(6.0 / (fan_in + fan_out))
                w = rng.uniform(-limit, limit, size=(fan_in, fan_out))
            weights.append(w)
            biases.append(np.zeros(fan_out))
        return cls(weights, biases, activation)

    @property
    def sizes(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    def copy(self) -> "QFunction":
        return QFunction([w.copy() for w in self.weights], [b.copy() for b in self.biases], self.activation)

    def _act(self, z):
        return np.maximum(z, 0.0) if self.activation == "relu" else np.tanh(z)

    def _act_grad(self, z, a):
        return (z > 0).astype(z.dtype) if self.activation == "relu" else 1.0 - a * a

    def forward(self, x) -> np.ndarray:
        h = np.asarray(x, dtype=np.float64)
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            h = z if i == last else self._act(z)
        return h

    def _forward_cache(self, x):
        hs = [np.asarray(x, dtype=np.float64)]
        zs = []
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = hs[-1] @ w + b
            zs.append(z)
            hs.append(z if i == last else self._act(z))
        return hs, zs

    def gradients(self, x, action: int, target: float):
        """Squared error on output ``action`` and its gradient for every parameter.

        Returns ``(loss, predicted, grad_weights, grad_biases)``.
        """
        hs, zs = self._forward_cache(x)
        pred = float(hs[-1][action])
        diff = pred - target
        delta = np.zeros_like(hs[-1])
        delta[action] = 2.0 * diff
        gw = [None] * len(self.weights)
        gb = [None] * len(self.weights)
        for i in range(len(self.weights) - 1, -1, -1):
            gw[i] = np.outer(hs[i], delta)
            gb[i] = delta
            if i > 0:
                delta = (self.weights[i] @ delta) * self._act_grad(zs[i - 1], hs[i])
        return diff * diff, pred, gw, gb

    def apply(self, gw, gb, alpha: float) -> None:
        for w, b, dw, db in zip(self.weights, self.biases, gw, gb):
            w -= alpha * dw
            b -= alpha * db

    def is_finite(self) -> bool:
        return all(np.isfinite(w).all() and np.isfinite(b).all() for w, b in zip(self.weights, self.biases))

    def get_flat(self) -> np.ndarray:
        return np.concatenate([p.ravel() for pair in zip(self.weights, self.biases) for p in pair])

    def set_flat(self, flat: np.ndarray) -> None:
        pos = 0
        for w, b in zip(self.weights, self.biases):
            for p in (w, b):
                p[...] = flat[pos:pos + p.size].reshape(p.shape)
                pos += p.size

    def state_dict(self) -> dict:
        return {
            "activation": self.activation,
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_state_dict(cls, d: dict) -> "QFunction":
        return cls([np.array(w, dtype=np.float64) for w in d["weights"]],
                   [np.array(b, dtype=np.float64) for b in d["biases"]], d["activation"])


def forward(q: QFunction, state) -> np.ndarray:
    out = q.forward(state)
    if not np.isfinite(out).all():
        raise NumericHealthError("non-finite Q-values")
    return out


def select_action(qvals, valid: Sequence[int], epsilon: float, rng: np.random.Generator) -> int:
    """Epsilon-greedy over the valid branch ids (1-based; column ``id - 1``).

    Greedy ties go to the lowest branch id.
    """
    if len(valid) == 0:
        raise ValueError("no valid actions")
    explore = rng.random() < epsilon
    if explore:
        return int(valid[int(rng.integers(len(valid)))])
    best_id, best_q = None, -math.inf
    for bid in sorted(valid):
        v = qvals[bid - 1]
        if v > best_q:
            best_id, best_q = bid, v
    return int(best_id if best_id is not None else min(valid))


@dataclass(frozen=True)
class EpsilonSchedule:
    epsilon: float = 1.0
    epsilon_min: float = 0.01
    n_ep: int = 10_000

    def closed_form(self, k: int) -> float:
        """Value after ``k`` updates starting from ``epsilon``."""
        return self.epsilon_min + (self.epsilon - self.epsilon_min) * (1.0 - 1.0 / self.n_ep) ** k


def update_epsilon(eps: EpsilonSchedule) -> EpsilonSchedule:
    new = eps.epsilon - (eps.epsilon - eps.epsilon_min) / eps.n_ep
    return EpsilonSchedule(max(new, eps.epsilon_min), eps.epsilon_min, eps.n_ep)


def bellman_target(outcome: RewardOutcome, next_q, gamma: float, mask=None, sign: float = 1.0) -> float:
    """Regression target for one transition; ``next_q=None`` marks a terminal step.

    ``sign=-1`` reproduces the subtractive variant of the target formula.
    """
    if next_q is None:
        return outcome.reward
    values = np.asarray(next_q)
    if mask is not None:
        values = values[np.asarray(mask, dtype=bool)]
    return outcome.reward + sign * gamma * float(values.max())


def mse_loss(predicted, target) -> float:
    p = np.asarray(predicted, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    return float(np.mean((p - t) ** 2))


def backprop_update(q: QFunction, transitions: Iterable[tuple], alpha: float,
                    episode: Optional[int] = None) -> tuple[QFunction, float]:
    """Online gradient steps over ``(state, action_index, target)`` triples.

    Updates ``q`` in place, in transition order. Returns ``q`` and the mean
    squared error measured before each step.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    losses = []
    for x, action, target in transitions:
        loss, _, gw, gb = q.gradients(x, action, target)
        if not (math.isfinite(loss) and all(np.isfinite(g).all() for g in gw)):
            raise NumericHealthError("non-finite gradient", episode)
        q.apply(gw, gb, alpha)
        losses.append(loss)
    if not q.is_finite():
        raise NumericHealthError("non-finite parameters after update", episode)
    return q, float(np.mean(losses)) if losses else 0.0


@dataclass
class TrainConfig:
    n_ep: int = 10_000
    alpha: float = 1e-4
    gamma: float = 0.9
    epsilon_min: float = 0.01
    hidden: Optional[list[int]] = None  # default: two layers of 2 * n_branches
    activation: str = "relu"
    sync_interval: int = 50
    seed: int = 0
    penalty: float = DEFAULT_PENALTY
    reward_scale: Optional[float] = None  # default: ACP(base) / 50
    target_sign: int = 1
    T: Optional[int] = None
    lambda_min: float = DEFAULT_LAMBDA_MIN
    lambda_max: float = DEFAULT_LAMBDA_MAX
    repair_hours: float = DEFAULT_REPAIR_HOURS

    def __post_init__(self):
        if self.n_ep < 1:
            raise ValueError("n_ep must be >= 1")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if not 0 <= self.gamma <= 1:
            raise ValueError("gamma must lie in [0, 1]")
        if not 0 <= self.epsilon_min <= 1:
            raise ValueError("epsilon_min must lie in [0, 1]")
        if self.sync_interval < 1:
            raise ValueError("sync_interval must be >= 1")
        if self.target_sign not in (1, -1):
            raise ValueError("target_sign must be 1 or -1")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}")
        if self.hidden is not None:
            self.hidden = [int(h) for h in self.hidden]

    @classmethod
    def from_mapping(cls, data: dict) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)

    def hidden_sizes(self, n_branches: int) -> list[int]:
        return list(self.hidden) if self.hidden is not None else [2 * n_branches, 2 * n_branches]


def load_train_config(path: str | Path, **overrides) -> TrainConfig:
    """Read a JSON or TOML config file; ``overrides`` that are not None win."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:  # Python < 3.11
            import tomli as tomllib
        data = tomllib.loads(text)
    else:
        data = json.loads(text)
    data.update({k: v for k, v in overrides.items() if v is not None})
    return TrainConfig.from_mapping(data)


@dataclass
class EpisodeRecord:
    episode: int
    reward: float
    mse_loss: float
    acp: Optional[float]
    open_set: list[int]
    epsilon: float
    violated: str = "none"

    @property
    def feasible(self) -> bool:
        return self.acp is not None


def encode(state: EnvState) -> np.ndarray:
    return np.asarray(state.status, dtype=np.float64)


def train(
    net: Network,
    model: ReliabilityModel,
    cfg: TrainConfig,
    on_episode: Optional[Callable[[EpisodeRecord], None]] = None,
) -> tuple[QFunction, list[EpisodeRecord]]:
    """Run ``cfg.n_ep`` episodes of online deep Q-learning."""
    rng = np.random.default_rng(cfg.seed)
    env = ReconfigEnv(net, model, cfg.T, cfg.penalty, cfg.reward_scale)
    sizes = [net.n_branches, *cfg.hidden_sizes(net.n_branches), net.n_branches]
    q = QFunction.init(sizes, rng, cfg.activation)
    target_q = q.copy()
    eps = EpsilonSchedule(1.0, cfg.epsilon_min, cfg.n_ep)
    records: list[EpisodeRecord] = []

    for ep in range(cfg.n_ep):
        state = env.reset()
        steps = []
        terminal = False
        while not terminal:
            x = encode(state)
            action = select_action(forward(q, x), env.valid_actions(state), eps.epsilon, rng)
            nxt, outcome, terminal = env.step(state, action)
            steps.append((x, action, outcome, nxt, terminal))
            state = nxt

        batch = []
        for x, action, outcome, nxt, term in steps:
            if term:
                y = bellman_target(outcome, None, cfg.gamma)
            else:
                y = bellman_target(outcome, forward(target_q, encode(nxt)), cfg.gamma,
                                   env.action_mask(nxt), cfg.target_sign)
            batch.append((x, action - 1, y))
        q, loss = backprop_update(q, batch, cfg.alpha, episode=ep)

        final = steps[-1][2]
        rec = EpisodeRecord(ep, final.reward, loss, final.acp,
                            env.configuration(state).sorted(), eps.epsilon, final.violated)
        records.append(rec)
        if on_episode is not None:
            on_episode(rec)

        eps = update_epsilon(eps)
        if (ep + 1) % cfg.sync_interval == 0:
            target_q = q.copy()

    return q, records


def best_configuration(records: Sequence[EpisodeRecord]) -> tuple[Configuration, float]:
    """Feasible episode with the lowest ACP; the latest episode wins ties."""
    best = None
    for rec in records:
        if rec.acp is not None and (best is None or rec.acp <= best.acp):
            best = rec
    if best is None:
        raise NotFoundError("no feasible episode in the training log")
    return Configuration(frozenset(best.open_set)), best.acp


def greedy_rollout(q: QFunction, env: ReconfigEnv) -> tuple[Configuration, RewardOutcome]:
    """Follow the greedy policy (epsilon = 0) from the all-closed mesh."""
    state = env.reset()
    rng = np.random.default_rng(0)
    outcome = None
    terminal = False
    while not terminal:
        action = select_action(forward(q, encode(state)), env.valid_actions(state), 0.0, rng)
        state, outcome, terminal = env.step(state, action)
    return env.configuration(state), outcome
