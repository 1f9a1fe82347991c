"""From-scratch PPO: tanh actor-critic networks, GAE, clipped objective, Adam."""

from .buffer import RolloutBuffer, compute_gae
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .evaluate import evaluate
from .hyperparams import PPOHyperparams
from .network import Architecture, actor_forward, critic_forward, init_params, sample_action
from .objective import Batch, ppo_objective, surrogate
from .optim import AdamState, optimizer_step
from .trainer import METRICS_HEADER, CsvMetrics, train

__all__ = [
    "AdamState",
    "Architecture",
    "Batch",
    "Checkpoint",
    "CsvMetrics",
    "METRICS_HEADER",
    "PPOHyperparams",
    "RolloutBuffer",
    "actor_forward",
    "compute_gae",
    "critic_forward",
    "evaluate",
    "init_params",
    "load_checkpoint",
    "optimizer_step",
    "ppo_objective",
    "sample_action",
    "save_checkpoint",
    "surrogate",
    "train",
]
