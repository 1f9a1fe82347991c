"""Clipped-surrogate PPO loss with analytic gradients."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import NumericalError
from .network import (
    LOG_STD_MAX,
    LOG_STD_MIN,
    Params,
    gaussian_entropy,
    gaussian_log_prob,
    global_norm,
    mlp_backward,
    mlp_forward,
    zeros_like,
)


@dataclass
class Batch:
    obs: np.ndarray
    actions: np.ndarray
    old_log_probs: np.ndarray
    advantages: np.ndarray
    returns: np.ndarray


@dataclass
class LossInfo:
    loss: float
    policy_loss: float
    value_loss: float
    entropy: float
    clip_frac: float
    approx_kl: float
    grad_norm: float


def surrogate(ratio: np.ndarray, adv: np.ndarray, clip_eps: float) -> np.ndarray:
    """Per-sample ``min(ratio * A, clip(ratio, 1 - eps, 1 + eps) * A)``."""
    return np.minimum(ratio * adv, np.clip(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * adv)


def ppo_objective(
    params: Params,
    batch: Batch,
    clip_eps: float = 0.2,
    value_coef: float = 0.5,
    entropy_coef: float = 0.01,
    max_grad_norm: float = 0.5,
) -> tuple[LossInfo, Params]:
    """Loss and its gradient with respect to every actor and critic parameter.

    Advantages are used as given (normalise them beforehand). The gradient is
    rescaled so its global norm does not exceed ``max_grad_norm``; pass
    ``math.inf`` to get the raw gradient.
    """
    n = batch.obs.shape[0]
    grads = zeros_like(params)

    mean, actor_acts = mlp_forward(params, "actor", batch.obs)
    raw_log_std = params["actor.log_std"]
    log_std = np.clip(raw_log_std, LOG_STD_MIN, LOG_STD_MAX)
    logp = gaussian_log_prob(mean, log_std, batch.actions)
    log_ratio = logp - batch.old_log_probs
    ratio = np.exp(log_ratio)
    adv = batch.advantages

    unclipped = ratio * adv
    clipped = np.clip(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * adv
    surr = np.minimum(unclipped, clipped)
    policy_loss = -float(np.mean(surr))

    values, critic_acts = mlp_forward(params, "critic", batch.obs)
    err = values[:, 0] - batch.returns
    value_loss = float(np.mean(err * err))
    entropy = gaussian_entropy(log_std)
    loss = policy_loss + value_coef * value_loss - entropy_coef * entropy

    # d(-mean surr)/d logp: only samples whose minimum is the unclipped branch.
    active = unclipped <= clipped
    d_logp = np.where(active, -adv * ratio, 0.0) / n

    inv_var = np.exp(-2.0 * log_std)
    diff = batch.actions - mean
    d_mean = d_logp[:, None] * diff * inv_var
    d_log_std = np.sum(d_logp[:, None] * (diff * diff * inv_var - 1.0), axis=0) - entropy_coef
    in_range = (raw_log_std >= LOG_STD_MIN) & (raw_log_std <= LOG_STD_MAX)
    grads["actor.log_std"] += np.where(in_range, d_log_std, 0.0)
    mlp_backward(params, "actor", actor_acts, d_mean, grads)

    d_values = (2.0 * value_coef / n) * err
    mlp_backward(params, "critic", critic_acts, d_values[:, None], grads)

    norm = global_norm(grads)
    if not (math.isfinite(loss) and math.isfinite(norm)):
        raise NumericalError(f"non-finite PPO loss ({loss}) or gradient norm ({norm})")
    if norm > max_grad_norm:
        scale = max_grad_norm / (norm + 1e-12)
        for g in grads.values():
            g *= scale

    clip_frac = float(np.mean(np.abs(ratio - 1.0) > clip_eps))
    approx_kl = float(np.mean((ratio - 1.0) - log_ratio))
    return LossInfo(loss, policy_loss, value_loss, entropy, clip_frac, approx_kl, norm), grads
