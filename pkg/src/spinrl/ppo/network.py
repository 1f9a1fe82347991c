"""Dense tanh networks with hand-written backpropagation.

Parameters live in a flat ``dict[str, np.ndarray]`` so that the optimizer,
gradient clipping and checkpointing can treat actor and critic uniformly.
Weight matrices are stored as ``(fan_in, fan_out)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import NumericalError

LOG_STD_MIN = -5.0
LOG_STD_MAX = 2.0
LOG_2PI = math.log(2.0 * math.pi)

Params = dict[str, np.ndarray]


def orthogonal(rng: np.random.Generator, fan_in: int, fan_out: int, gain: float) -> np.ndarray:
    a = rng.standard_normal((max(fan_in, fan_out), min(fan_in, fan_out)))
    q, r = np.linalg.qr(a)
    q = q * np.sign(np.diag(r))
    if fan_in < fan_out:
        q = q.T
    return gain * q[:fan_in, :fan_out]


@dataclass(frozen=True)
class Architecture:
    obs_size: int = 11
    action_size: int = 3
    hidden: tuple[int, ...] = (256, 128)

    def layer_sizes(self, out: int) -> list[int]:
        return [self.obs_size, *self.hidden, out]


def init_params(
    arch: Architecture, rng: np.random.Generator, log_std_init: float = math.log(0.5)
) -> Params:
    """Orthogonal init: hidden gain sqrt(2), actor head 0.01, critic head 1."""
    params: Params = {}
    for prefix, out, head_gain in (("actor", arch.action_size, 0.01), ("critic", 1, 1.0)):
        sizes = arch.layer_sizes(out)
        n = len(sizes) - 1
        for i in range(n):
            gain = head_gain if i == n - 1 else math.sqrt(2.0)
            params[f"{prefix}.W{i}"] = orthogonal(rng, sizes[i], sizes[i + 1], gain)
            params[f"{prefix}.b{i}"] = np.zeros(sizes[i + 1])
    params["actor.log_std"] = np.full(arch.action_size, log_std_init)
    return params


def n_layers(params: Params, prefix: str) -> int:
    n = 0
    while f"{prefix}.W{n}" in params:
        n += 1
    return n


def mlp_forward(params: Params, prefix: str, x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    """Forward pass; returns the output and the per-layer inputs for backprop."""
    n = n_layers(params, prefix)
    acts = [x]
    h = x
    for i in range(n):
        z = h @ params[f"{prefix}.W{i}"] + params[f"{prefix}.b{i}"]
        h = np.tanh(z) if i < n - 1 else z
        acts.append(h)
    return h, acts


def mlp_backward(params: Params, prefix: str, acts: list[np.ndarray], d_out: np.ndarray, grads: Params) -> None:
    """Accumulate parameter gradients of ``sum(d_out * output)`` into ``grads``."""
    n = n_layers(params, prefix)
    d = d_out
    for i in reversed(range(n)):
        if i < n - 1:
            d = d * (1.0 - acts[i + 1] ** 2)
        grads[f"{prefix}.W{i}"] += acts[i].T @ d
        grads[f"{prefix}.b{i}"] += d.sum(axis=0)
        if i > 0:
            d = d @ params[f"{prefix}.W{i}"].T


def clamped_log_std(params: Params) -> np.ndarray:
    return np.clip(params["actor.log_std"], LOG_STD_MIN, LOG_STD_MAX)


def actor_forward(params: Params, obs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Action mean(s) and the clamped log standard deviation."""
    mean, _ = mlp_forward(params, "actor", obs)
    if not np.all(np.isfinite(mean)):
        raise NumericalError("actor produced a non-finite action mean")
    return mean, clamped_log_std(params)


def critic_forward(params: Params, obs: np.ndarray) -> np.ndarray:
    v, _ = mlp_forward(params, "critic", obs)
    if not np.all(np.isfinite(v)):
        raise NumericalError("critic produced a non-finite value")
    return v[..., 0]


def gaussian_log_prob(mean: np.ndarray, log_std: np.ndarray, action: np.ndarray) -> np.ndarray:
    z = (action - mean) * np.exp(-log_std)
    return -0.5 * np.sum(z * z, axis=-1) - np.sum(log_std) - 0.5 * mean.shape[-1] * LOG_2PI


def gaussian_entropy(log_std: np.ndarray) -> float:
    return float(np.sum(log_std) + 0.5 * log_std.shape[-1] * (1.0 + LOG_2PI))


def sample_action(
    mean: np.ndarray, log_std: np.ndarray, rng: np.random.Generator
) -> tuple[np.ndarray, float]:
    """Draw ``mean + std * z`` and return it with its log-density."""
    log_std = np.clip(log_std, LOG_STD_MIN, LOG_STD_MAX)
    action = mean + np.exp(log_std) * rng.standard_normal(mean.shape)
    return action, float(gaussian_log_prob(mean, log_std, action))


def param_shapes(params: Params) -> dict[str, tuple[int, ...]]:
    return {k: tuple(v.shape) for k, v in params.items()}


def architecture_of(params: Params) -> Architecture:
    n = n_layers(params, "actor")
    hidden = tuple(params[f"actor.W{i}"].shape[1] for i in range(n - 1))
    return Architecture(params["actor.W0"].shape[0], params["actor.log_std"].shape[0], hidden)


def global_norm(grads: Params) -> float:
    return math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))


def zeros_like(params: Params) -> Params:
    return {k: np.zeros_like(v) for k, v in params.items()}


def flatten(params: Params, keys: Sequence[str] | None = None) -> np.ndarray:
    keys = sorted(params) if keys is None else keys
    return np.concatenate([params[k].ravel() for k in keys])
