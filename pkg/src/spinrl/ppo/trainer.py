"""PPO training loop.

Rollouts have a fixed length of ``rollout_steps`` transitions. Episodes run
across rollout boundaries, and training stops after the first update at which
``total_episodes`` episodes have completed. The learner sees rewards multiplied
by ``reward_scale``; logged returns are in environment units.
"""

from __future__ import annotations

import csv
import logging
import math
import os
from typing import Callable, Protocol

import numpy as np

from ..env import OBS_HIGH, OBS_LOW, SpinEnv
from ..errors import SpinRLError
from .buffer import RolloutBuffer
from .checkpoint import Checkpoint, save_checkpoint
from .hyperparams import PPOHyperparams
from .network import Architecture, Params, actor_forward, critic_forward, init_params, sample_action
from .objective import Batch, LossInfo, ppo_objective
from .optim import AdamState, optimizer_step

log = logging.getLogger(__name__)

METRICS_HEADER = (
    "update", "episodes", "steps", "mean_return", "actor_loss", "value_loss", "entropy", "clip_frac", "approx_kl",
)


class MetricsSink(Protocol):
    def __call__(self, row: dict[str, float]) -> None: ...


class CsvMetrics:
    """Appends one metrics row per update to a CSV file."""

    def __init__(self, path: str) -> None:
        self.path = path
        with open(path, "w", newline="", encoding="utf-8") as fh:
            csv.writer(fh, lineterminator="\n").writerow(METRICS_HEADER)

    def __call__(self, row: dict[str, float]) -> None:
        with open(self.path, "a", newline="", encoding="utf-8") as fh:
            csv.writer(fh, lineterminator="\n").writerow([_fmt(row[k]) for k in METRICS_HEADER])


def _fmt(v: float) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def seed_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator, int]:
    """Independent generators for init and sampling plus an env seed, all from one seed."""
    init_ss, sample_ss, env_ss = np.random.SeedSequence(seed).spawn(3)
    return (
        np.random.default_rng(init_ss),
        np.random.default_rng(sample_ss),
        int(env_ss.generate_state(1)[0]),
    )


def make_checkpoint(
    params: Params,
    hp: PPOHyperparams,
    rng: np.random.Generator,
    opt: AdamState | None,
    episodes: int,
    updates: int,
    steps: int,
) -> Checkpoint:
    return Checkpoint(
        params={k: v.copy() for k, v in params.items()},
        hyperparams=hp.to_json(),
        rng_state=rng.bit_generator.state,
        episodes=episodes,
        updates=updates,
        steps=steps,
        optimizer=None if opt is None else AdamState(
            {k: v.copy() for k, v in opt.m.items()}, {k: v.copy() for k, v in opt.v.items()}, opt.step
        ),
        observation_bounds={"low": OBS_LOW.tolist(), "high": OBS_HIGH.tolist()},
    )


def update_policy(
    params: Params, opt: AdamState, data: dict[str, np.ndarray], hp: PPOHyperparams, rng: np.random.Generator
) -> LossInfo:
    """K epochs of shuffled minibatch Adam steps; returns metrics averaged over minibatches."""
    n = len(data["returns"])
    infos: list[LossInfo] = []
    for _ in range(hp.epochs):
        order = rng.permutation(n)
        for start in range(0, n, hp.minibatch_size):
            idx = order[start:start + hp.minibatch_size]
            adv = data["advantages"][idx]
            if len(idx) > 1:
                adv = (adv - adv.mean()) / (adv.std() + 1e-8)
            batch = Batch(data["obs"][idx], data["actions"][idx], data["log_probs"][idx], adv, data["returns"][idx])
            info, grads = ppo_objective(
                params, batch, hp.clip_eps, hp.value_coef, hp.entropy_coef, hp.max_grad_norm
            )
            optimizer_step(params, grads, opt, hp.learning_rate)
            infos.append(info)
    keys = ("loss", "policy_loss", "value_loss", "entropy", "clip_frac", "approx_kl", "grad_norm")
    return LossInfo(*(float(np.mean([getattr(i, k) for i in infos])) for k in keys))


def train(
    env_factory: Callable[[int], SpinEnv],
    hp: PPOHyperparams,
    logger: MetricsSink | None = None,
    out_dir: str | None = None,
) -> Checkpoint:
    init_rng, rng, env_seed = seed_streams(hp.seed)
    env = env_factory(env_seed)
    arch = Architecture(env.observation_size, env.action_size, hp.hidden)
    params = init_params(arch, init_rng, hp.log_std_init)
    opt = AdamState.for_params(params)
    buffer = RolloutBuffer()

    episodes = updates = steps = 0
    if hp.total_episodes == 0:
        return make_checkpoint(params, hp, rng, opt, episodes, updates, steps)

    obs = env.reset()
    ep_return = 0.0
    while episodes < hp.total_episodes:
        finished: list[float] = []
        try:
            for _ in range(hp.rollout_steps):
                mean, log_std = actor_forward(params, obs[None, :])
                value = float(critic_forward(params, obs[None, :])[0])
                action, logp = sample_action(mean[0], log_std, rng)
                res = env.step(action)
                steps += 1
                ep_return += res.reward
                trunc_value = float(critic_forward(params, res.observation[None, :])[0]) if res.truncated else 0.0
                buffer.add(
                    obs, action, logp, value, res.reward * hp.reward_scale, res.terminated, res.truncated, trunc_value
                )
                if res.terminated or res.truncated:
                    finished.append(ep_return)
                    episodes += 1
                    ep_return = 0.0
                    obs = env.reset()
                else:
                    obs = res.observation
            bootstrap = float(critic_forward(params, obs[None, :])[0])
            buffer.finish(bootstrap, hp.gamma, hp.gae_lambda)
            info = update_policy(params, opt, buffer.arrays(), hp, rng)
        except SpinRLError as exc:
            raise type(exc)(f"update {updates + 1}, episode {episodes + 1}: {exc}") from exc
        buffer.clear()
        updates += 1

        row = {
            "update": updates,
            "episodes": episodes,
            "steps": steps,
            "mean_return": float(np.mean(finished)) if finished else math.nan,
            "actor_loss": info.policy_loss,
            "value_loss": info.value_loss,
            "entropy": info.entropy,
            "clip_frac": info.clip_frac,
            "approx_kl": info.approx_kl,
        }
        log.info("update %d episodes %d mean_return %.2f", updates, episodes, row["mean_return"])
        if logger is not None:
            logger(row)
        if out_dir is not None and hp.checkpoint_every and updates % hp.checkpoint_every == 0:
            save_checkpoint(
                make_checkpoint(params, hp, rng, opt, episodes, updates, steps),
                os.path.join(out_dir, f"checkpoint_{updates:05d}.ckpt"),
            )
    return make_checkpoint(params, hp, rng, opt, episodes, updates, steps)
