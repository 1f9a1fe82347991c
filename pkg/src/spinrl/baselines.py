"""Scripted comparison controllers.

``neutral`` holds every surface at zero. ``pare`` follows the manual spin
recovery rule: power to idle, ailerons neutral, rudder against the yaw rate
and elevator forward. Once every rate is below the threshold, the elevator
tracks the target angle of attack but never moves aft of neutral.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Mapping

import numpy as np

from .dynamics import AircraftState, ControlInput, ControlLimits, saturate
from .env import EnvConfig, SpinEnv, StepResult
from .errors import ConfigError
from .evaluation import EvalReport, run_episodes

KINDS = ("neutral", "pare")


@dataclass(frozen=True)
class BaselineController:
    kind: str = "pare"
    rudder_gain: float = 1.0
    elevator_forward: float = -0.1
    pitch_gain: float = 2.0
    pitch_rate_gain: float = 0.5
    rate_threshold: float = 0.17
    power_idle: bool = True

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"baseline kind must be one of {KINDS}, got {self.kind!r}")
        if self.elevator_forward > 0:
            raise ConfigError("elevator_forward must be <= 0 (forward stick)")
        for name in ("rudder_gain", "pitch_gain", "pitch_rate_gain", "rate_threshold"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ConfigError(f"{name} must be a finite number >= 0, got {v!r}")

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "BaselineController":
        unknown = set(data) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"unknown baseline keys {sorted(unknown)}")
        return cls(**data)

    def to_json(self) -> dict[str, Any]:
        return asdict(self)

    def command(self, x: AircraftState, alpha_d: float, limits: ControlLimits) -> ControlInput:
        if self.kind == "neutral":
            return ControlInput()
        if max(abs(x.p), abs(x.q), abs(x.r)) >= self.rate_threshold:
            de = self.elevator_forward
        else:
            de = min(0.0, self.pitch_gain * (alpha_d - x.alpha) - self.pitch_rate_gain * x.q)
        dr = -self.rudder_gain * x.r
        return saturate(ControlInput(de, 0.0, dr), limits)

    def scenario(self, config: EnvConfig) -> EnvConfig:
        """The scenario as flown by this controller (PARE idles the engine)."""
        if self.kind == "pare" and self.power_idle:
            return replace(config, eta=0.0)
        return config


def run_baseline(
    controller: BaselineController,
    env: SpinEnv,
    episodes: int,
    out_dir: str | None = None,
) -> EvalReport:
    env.config = controller.scenario(env.config)

    def act(e: SpinEnv, obs: np.ndarray) -> StepResult:
        assert e.state is not None
        return e.step_controls(controller.command(e.state, e.targets[0], e.config.limits))

    return run_episodes(env, act, episodes, out_dir)
