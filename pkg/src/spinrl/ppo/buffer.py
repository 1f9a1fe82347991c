"""On-policy rollout storage and generalized advantage estimation."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import LengthMismatch, NumericalError


def compute_gae(
    rewards: Sequence[float],
    values: Sequence[float],
    dones: Sequence[bool],
    bootstrap_value: float,
    gamma: float,
    lam: float,
    truncated: Sequence[bool] | None = None,
    truncation_values: Sequence[float] | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Advantages and returns for one rollout.

    ``dones`` marks terminated steps (no bootstrap). ``truncated`` marks steps
    where an episode was cut by the time limit; those bootstrap from
    ``truncation_values`` (the critic at the final observation) and the
    recursion does not carry over into the next episode. ``bootstrap_value``
    is the critic at the observation following the last stored step.
    """
    r = np.asarray(rewards, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    d = np.asarray(dones, dtype=np.float64)
    n = len(r)
    if len(v) != n or len(d) != n:
        raise LengthMismatch(f"rewards/values/dones lengths differ: {n}, {len(v)}, {len(d)}")
    tr = np.zeros(n) if truncated is None else np.asarray(truncated, dtype=np.float64)
    tv = np.zeros(n) if truncation_values is None else np.asarray(truncation_values, dtype=np.float64)
    if len(tr) != n or len(tv) != n:
        raise LengthMismatch("truncation arrays must match the rollout length")

    next_v = np.empty(n)
    next_v[:-1] = v[1:]
    if n:
        next_v[-1] = bootstrap_value
    next_v = np.where(tr > 0, tv, next_v)
    carry = (1.0 - d) * (1.0 - tr)

    adv = np.zeros(n)
    last = 0.0
    for t in reversed(range(n)):
        delta = r[t] + gamma * next_v[t] * (1.0 - d[t]) - v[t]
        last = delta + gamma * lam * carry[t] * last
        adv[t] = last
    if not np.all(np.isfinite(adv)):
        raise NumericalError("non-finite advantage")
    return adv, adv + v


class RolloutBuffer:
    """Per-step transitions of the current policy; emptied after every update."""

    def __init__(self) -> None:
        self.clear()

    def clear(self) -> None:
        self.obs: list[np.ndarray] = []
        self.actions: list[np.ndarray] = []
        self.log_probs: list[float] = []
        self.values: list[float] = []
        self.rewards: list[float] = []
        self.dones: list[bool] = []
        self.truncated: list[bool] = []
        self.truncation_values: list[float] = []
        self.advantages: np.ndarray | None = None
        self.returns: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.rewards)

    def add(
        self,
        obs: np.ndarray,
        action: np.ndarray,
        log_prob: float,
        value: float,
        reward: float,
        done: bool,
        truncated: bool = False,
        truncation_value: float = 0.0,
    ) -> None:
        self.obs.append(obs)
        self.actions.append(action)
        self.log_probs.append(log_prob)
        self.values.append(value)
        self.rewards.append(reward)
        self.dones.append(done)
        self.truncated.append(truncated)
        self.truncation_values.append(truncation_value)

    def finish(self, bootstrap_value: float, gamma: float, lam: float) -> None:
        self.advantages, self.returns = compute_gae(
            self.rewards, self.values, self.dones, bootstrap_value, gamma, lam,
            self.truncated, self.truncation_values,
        )

    def arrays(self) -> dict[str, np.ndarray]:
        if self.advantages is None or self.returns is None:
            raise RuntimeError("finish() must run before arrays()")
        return {
            "obs": np.asarray(self.obs),
            "actions": np.asarray(self.actions),
            "log_probs": np.asarray(self.log_probs),
            "values": np.asarray(self.values),
            "advantages": self.advantages,
            "returns": self.returns,
        }
