"""Episode rollouts, recovery metrics and report files.

Shared by policy evaluation and the scripted baselines so that both emit the
same trajectory CSVs and summary JSON.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Any, Callable

import numpy as np

from .env import SpinEnv, StepResult, trajectory_row, write_trajectory

RATE_ARREST_THRESHOLD = 0.17
RATE_ARREST_HOLD_S = 5.0


@dataclass
class EpisodeMetrics:
    episode: int
    steps: int
    terminated: bool
    failure: str | None
    episode_return: float
    rate_arrest_time_s: float | None
    final_abs_e_alpha_rad: float
    altitude_loss_ft: float

    def to_json(self) -> dict[str, Any]:
        out = asdict(self)
        out["return"] = out.pop("episode_return")
        return out


@dataclass
class EvalReport:
    episodes: list[EpisodeMetrics] = field(default_factory=list)

    @property
    def arrest_fraction(self) -> float:
        if not self.episodes:
            return 0.0
        return sum(e.rate_arrest_time_s is not None for e in self.episodes) / len(self.episodes)

    def summary(self) -> dict[str, Any]:
        def mean(vals: list[float]) -> float | None:
            return float(np.mean(vals)) if vals else None

        arrested = [e.rate_arrest_time_s for e in self.episodes if e.rate_arrest_time_s is not None]
        return {
            "rate_arrest_time_s": mean(arrested),
            "arrest_fraction": self.arrest_fraction,
            "final_abs_e_alpha_rad": mean([e.final_abs_e_alpha_rad for e in self.episodes]),
            "altitude_loss_ft": mean([e.altitude_loss_ft for e in self.episodes]),
            "return": mean([e.episode_return for e in self.episodes]),
            "episodes": [e.to_json() for e in self.episodes],
        }


def rate_arrest_time(times: list[float], max_rates: list[float], hold: float = RATE_ARREST_HOLD_S) -> float | None:
    """First time from which every rate stays below the threshold for ``hold`` seconds."""
    start = None
    for t, m in zip(times, max_rates):
        if m < RATE_ARREST_THRESHOLD:
            if start is None:
                start = t
            if t - start >= hold - 1e-9:
                return start
        else:
            start = None
    return None


def run_episode(
    env: SpinEnv, act: Callable[[SpinEnv, np.ndarray], StepResult], index: int = 0
) -> tuple[EpisodeMetrics, list[list[float]]]:
    """Roll one episode with ``act(env, obs)`` performing each step."""
    obs = env.reset()
    rows: list[list[float]] = []
    times: list[float] = []
    max_rates: list[float] = []
    total = 0.0
    takeover_h = env.state.h if env.config.hold_steps == 0 else None
    min_h = math.inf
    while True:
        res = act(env, obs)
        obs = res.observation
        total += res.reward
        x = res.info["state"]
        rows.append(trajectory_row(res))
        times.append(x.t)
        max_rates.append(max(abs(x.p), abs(x.q), abs(x.r)))
        if takeover_h is None and env.steps >= env.config.hold_steps:
            takeover_h = x.h
        elif takeover_h is not None:
            min_h = min(min_h, x.h)
        if res.terminated or res.truncated:
            break
    final = env.state
    # Time-to-arrest only counts once the agent (or controller) is in charge.
    hold_t = env.config.hold_steps * env.config.dt
    idx = [i for i, t in enumerate(times) if t > hold_t - 1e-9]
    arrest = rate_arrest_time([times[i] for i in idx], [max_rates[i] for i in idx])
    loss = 0.0 if takeover_h is None or not math.isfinite(min_h) else max(0.0, takeover_h - min_h)
    metrics = EpisodeMetrics(
        episode=index,
        steps=env.steps,
        terminated=res.terminated,
        failure=res.info.get("failure"),
        episode_return=total,
        rate_arrest_time_s=arrest,
        final_abs_e_alpha_rad=abs(final.alpha - env.targets[0]),
        altitude_loss_ft=loss,
    )
    return metrics, rows


def run_episodes(
    env: SpinEnv,
    act: Callable[[SpinEnv, np.ndarray], StepResult],
    episodes: int,
    out_dir: str | None = None,
) -> EvalReport:
    report = EvalReport()
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
    for i in range(episodes):
        metrics, rows = run_episode(env, act, i)
        report.episodes.append(metrics)
        if out_dir is not None:
            write_trajectory(os.path.join(out_dir, f"episode_{i:03d}.csv"), rows)
    if out_dir is not None:
        write_summary(os.path.join(out_dir, "summary.json"), report)
    return report


def write_summary(path: str, report: EvalReport) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.summary(), fh, indent=2, sort_keys=True)
        fh.write("\n")
