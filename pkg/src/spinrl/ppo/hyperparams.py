from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import Any, Mapping

from ..errors import ConfigError


@dataclass(frozen=True)
class PPOHyperparams:
    learning_rate: float = 5e-5
    gamma: float = 0.99
    clip_eps: float = 0.2
    gae_lambda: float = 0.95
    epochs: int = 10
    minibatch_size: int = 256
    rollout_steps: int = 4096
    entropy_coef: float = 0.01
    value_coef: float = 0.5
    max_grad_norm: float = 0.5
    total_episodes: int = 6000
    seed: int = 0
    hidden: tuple[int, ...] = (256, 128)
    log_std_init: float = math.log(0.5)
    checkpoint_every: int = 0
    # Multiplies rewards seen by the learner only, so value targets are O(1).
    reward_scale: float = 0.01

    def __post_init__(self) -> None:
        if not self.learning_rate > 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not 0 < self.gamma <= 1:
            raise ConfigError(f"gamma must be in (0, 1], got {self.gamma}")
        if not 0 < self.gae_lambda <= 1:
            raise ConfigError(f"gae_lambda must be in (0, 1], got {self.gae_lambda}")
        if not 0 < self.clip_eps < 1:
            raise ConfigError(f"clip_eps must be in (0, 1), got {self.clip_eps}")
        for name in ("epochs", "minibatch_size", "rollout_steps"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        if isinstance(self.total_episodes, bool) or not isinstance(self.total_episodes, int) or self.total_episodes < 0:
            raise ConfigError(f"total_episodes must be a non-negative integer, got {self.total_episodes!r}")
        if self.entropy_coef < 0 or self.value_coef < 0:
            raise ConfigError("entropy_coef and value_coef must be >= 0")
        if not self.max_grad_norm > 0:
            raise ConfigError(f"max_grad_norm must be > 0, got {self.max_grad_norm}")
        if not self.hidden or any(isinstance(h, bool) or not isinstance(h, int) or h < 1 for h in self.hidden):
            raise ConfigError(f"hidden must be a non-empty list of positive integers, got {self.hidden!r}")
        if not (math.isfinite(self.reward_scale) and self.reward_scale > 0):
            raise ConfigError(f"reward_scale must be > 0, got {self.reward_scale}")
        if self.checkpoint_every < 0:
            raise ConfigError("checkpoint_every must be >= 0")

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "PPOHyperparams":
        if not isinstance(data, Mapping):
            raise ConfigError("hyperparameter config must be a JSON object")
        body = {k: v for k, v in data.items() if k != "meta"}
        unknown = set(body) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"unknown hyperparameter keys {sorted(unknown)}")
        if "hidden" in body:
            body["hidden"] = tuple(body["hidden"])
        return cls(**body)

    def to_json(self) -> dict[str, Any]:
        out = asdict(self)
        out["hidden"] = list(self.hidden)
        return out
