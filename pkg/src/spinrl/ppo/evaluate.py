from __future__ import annotations

import numpy as np

from ..env import OBS_HIGH, OBS_LOW, SpinEnv, StepResult
from ..errors import IncompatibleCheckpoint
from ..evaluation import EvalReport, run_episodes
from .checkpoint import Checkpoint
from .network import actor_forward, architecture_of, sample_action


def check_compatible(ckpt: Checkpoint, env: SpinEnv) -> None:
    required = {"actor.W0", "actor.log_std", "critic.W0"}
    missing = required - set(ckpt.params)
    if missing:
        raise IncompatibleCheckpoint(f"checkpoint lacks parameters {sorted(missing)}")
    arch = architecture_of(ckpt.params)
    if arch.obs_size != env.observation_size or arch.action_size != env.action_size:
        raise IncompatibleCheckpoint(
            f"checkpoint network is {arch.obs_size}->{arch.action_size}, "
            f"environment needs {env.observation_size}->{env.action_size}"
        )
    bounds = ckpt.observation_bounds
    if bounds and (bounds.get("low") != OBS_LOW.tolist() or bounds.get("high") != OBS_HIGH.tolist()):
        raise IncompatibleCheckpoint("checkpoint was trained with different observation bounds")


def evaluate(
    ckpt: Checkpoint,
    env: SpinEnv,
    episodes: int,
    deterministic: bool = True,
    seed: int = 0,
    out_dir: str | None = None,
) -> EvalReport:
    """Run the policy; deterministic mode acts with the Gaussian mean."""
    check_compatible(ckpt, env)
    params = ckpt.params
    rng = np.random.default_rng(seed)
    env.rng = np.random.default_rng(seed)

    def act(e: SpinEnv, obs: np.ndarray) -> StepResult:
        mean, log_std = actor_forward(params, obs[None, :])
        if deterministic:
            return e.step(mean[0])
        action, _ = sample_action(mean[0], log_std, rng)
        return e.step(action)

    return run_episodes(env, act, episodes, out_dir)
