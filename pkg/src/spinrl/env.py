"""Episodic spin-recovery environment.

Each episode starts in a developed flat spin. For the first ``spin_hold``
seconds the surfaces are held at ``hold_controls`` whatever the agent asks
for; afterwards the agent's action drives the surfaces. The episode ends on an
envelope violation (with a terminal penalty) or after ``episode_len`` steps.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, fields, replace
from typing import Any, Mapping, Sequence

import numpy as np

from .aero import AeroModelConfig
from .dynamics import (
    DEFAULT_DT,
    AircraftParams,
    AircraftState,
    ControlInput,
    ControlLimits,
    euler_from_wind,
    integrate_step,
    saturate,
)
from .errors import ConfigError, DomainError, NumericalError
from .reward import Phase, RewardWeights, total_reward

SPIN_STATE = (0.186 * 1116.0, 1.2375, 0.0382, -0.6163, 0.1784, -1.4645, -1.3508, -1.5075)
FIXED_TARGETS = (0.3, 0.0, 0.0)
SAMPLED_ALPHA_RANGE = (-0.0873, 0.6981)

# Observation bounds; the three targets reuse the alpha, beta and mu rows.
OBS_FIELDS = ("V", "alpha", "beta", "p", "q", "r", "mu", "gamma", "alpha_d", "beta_d", "mu_d")
_RATE = 10.0 * math.pi
OBS_LOW = np.array([0.0, -0.244, -math.pi, -_RATE, -_RATE, -_RATE, -math.pi, -1.745, -0.244, -math.pi, -math.pi])
OBS_HIGH = np.array([2000.0, 1.571, math.pi, _RATE, _RATE, _RATE, math.pi, 1.745, 1.571, math.pi, math.pi])

TRAJECTORY_HEADER = (
    "t", "V", "alpha", "beta", "p", "q", "r", "mu", "gamma", "chi", "phi", "theta", "psi", "h",
    "de", "da", "dr", "eta", "reward", "phase",
)

# Angles integrated without bound that are folded back into [-pi, pi).
_WRAPPED = ("mu", "chi", "phi", "theta", "psi")


def wrap_angle(a: float) -> float:
    return (a + math.pi) % (2.0 * math.pi) - math.pi


@dataclass(frozen=True)
class EnvConfig:
    dt: float = DEFAULT_DT
    episode_len: int = 20000
    spin_hold: float = 30.0
    hold_controls: ControlInput = ControlInput()
    initial_state: tuple[float, ...] = SPIN_STATE
    target_mode: str = "fixed"
    targets: tuple[float, float, float] = FIXED_TARGETS
    eta: float = 0.25
    terminal_penalty: float = -1000.0
    start_altitude: float = 8500.0
    seed: int = 0
    limits: ControlLimits = ControlLimits()
    reward: RewardWeights = RewardWeights()

    def __post_init__(self) -> None:
        if not (isinstance(self.dt, (int, float)) and math.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"dt must be > 0, got {self.dt!r}")
        if isinstance(self.episode_len, bool) or not isinstance(self.episode_len, int) or self.episode_len <= 0:
            raise ConfigError(f"episode_len must be a positive integer, got {self.episode_len!r}")
        if not (math.isfinite(self.spin_hold) and self.spin_hold >= 0):
            raise ConfigError(f"spin_hold must be >= 0, got {self.spin_hold!r}")
        if not (math.isfinite(self.terminal_penalty) and self.terminal_penalty <= 0):
            raise ConfigError(f"terminal_penalty must be <= 0, got {self.terminal_penalty!r}")
        if self.target_mode not in ("fixed", "sampled"):
            raise ConfigError(f"target_mode must be 'fixed' or 'sampled', got {self.target_mode!r}")
        if not 0.0 <= self.eta <= 1.0:
            raise ConfigError(f"eta must be in [0, 1], got {self.eta!r}")
        if len(self.initial_state) != 8 or not all(math.isfinite(v) for v in self.initial_state):
            raise ConfigError("initial_state must list 8 finite values [V, alpha, beta, p, q, r, mu, gamma]")
        if not self.initial_state[0] > 0:
            raise ConfigError("initial airspeed must be positive")
        if len(self.targets) != 3:
            raise ConfigError("targets must be [alpha_d, beta_d, mu_d]")
        if not (math.isfinite(self.start_altitude) and self.start_altitude > 0):
            raise ConfigError(f"start_altitude must be > 0, got {self.start_altitude!r}")

    @property
    def hold_steps(self) -> int:
        return int(round(self.spin_hold / self.dt))

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "EnvConfig":
        if not isinstance(data, Mapping):
            raise ConfigError("scenario config must be a JSON object")
        known = {f.name for f in fields(cls)}
        body = {k: v for k, v in data.items() if k != "meta"}
        unknown = set(body) - known
        if unknown:
            raise ConfigError(f"unknown scenario keys {sorted(unknown)}")
        if "hold_controls" in body:
            hc = body["hold_controls"]
            if not isinstance(hc, Mapping) or set(hc) - {"delta_e", "delta_a", "delta_r"}:
                raise ConfigError("hold_controls must be an object with delta_e, delta_a, delta_r")
            body["hold_controls"] = ControlInput(**{k: float(v) for k, v in hc.items()})
        if "limits" in body:
            lim = body["limits"]
            if not isinstance(lim, Mapping) or set(lim) - {"elevator", "aileron", "rudder"}:
                raise ConfigError("limits must be an object with elevator, aileron, rudder")
            body["limits"] = ControlLimits(**{k: tuple(float(x) for x in v) for k, v in lim.items()})
        if "reward" in body:
            body["reward"] = RewardWeights.from_json(body["reward"])
        for key in ("initial_state", "targets"):
            if key in body:
                body[key] = tuple(float(v) for v in body[key])
        try:
            return cls(**body)
        except TypeError as exc:
            raise ConfigError(f"scenario config: {exc}") from exc

    def to_json(self) -> dict[str, Any]:
        hc = self.hold_controls
        return {
            "dt": self.dt,
            "episode_len": self.episode_len,
            "spin_hold": self.spin_hold,
            "hold_controls": {"delta_e": hc.delta_e, "delta_a": hc.delta_a, "delta_r": hc.delta_r},
            "initial_state": list(self.initial_state),
            "target_mode": self.target_mode,
            "targets": list(self.targets),
            "eta": self.eta,
            "terminal_penalty": self.terminal_penalty,
            "start_altitude": self.start_altitude,
            "seed": self.seed,
            "limits": {
                "elevator": list(self.limits.elevator),
                "aileron": list(self.limits.aileron),
                "rudder": list(self.limits.rudder),
            },
            "reward": self.reward.to_json(),
        }


@dataclass
class StepResult:
    observation: np.ndarray
    reward: float
    terminated: bool
    truncated: bool
    info: dict[str, Any] = field(default_factory=dict)


def check_termination(x: AircraftState) -> str | None:
    """Name of the first violated envelope bound, or ``None`` if inside."""
    if not x.is_finite():
        return "non_finite"
    if not 0.0 <= x.V <= 2000.0:
        return "airspeed"
    if not -0.244 <= x.alpha <= 1.571:
        return "alpha"
    if abs(x.beta) > math.pi:
        return "beta"
    if abs(x.mu) > math.pi:
        return "mu"
    if max(abs(x.p), abs(x.q), abs(x.r)) > _RATE:
        return "rate"
    if abs(x.gamma) > 1.745:
        return "gamma"
    if x.h <= 0.0:
        return "ground"
    return None


def normalize_observation(x: AircraftState, targets: Sequence[float]) -> np.ndarray:
    raw = np.array([x.V, x.alpha, x.beta, x.p, x.q, x.r, x.mu, x.gamma, *targets], dtype=np.float64)
    obs = 2.0 * (raw - OBS_LOW) / (OBS_HIGH - OBS_LOW) - 1.0
    return np.clip(obs, -1.0, 1.0)


def decode_observation(obs: Sequence[float]) -> np.ndarray:
    """Inverse of :func:`normalize_observation` for in-bound values."""
    return OBS_LOW + (np.asarray(obs, dtype=np.float64) + 1.0) * 0.5 * (OBS_HIGH - OBS_LOW)


def scale_action(a: Sequence[float], limits: ControlLimits, eta: float) -> ControlInput:
    """Clip each entry to [-1, 1] and map it affinely onto its actuator range."""
    out = []
    for v, (lo, hi) in zip(a, limits.channels()):
        v = min(max(float(v), -1.0), 1.0)
        out.append(lo + (v + 1.0) * 0.5 * (hi - lo))
    return ControlInput(out[0], out[1], out[2], eta)


def unscale_controls(u: ControlInput, limits: ControlLimits) -> tuple[float, float, float]:
    """Policy-space action that :func:`scale_action` maps onto ``u``."""
    vals = (u.delta_e, u.delta_a, u.delta_r)
    return tuple(2.0 * (v - lo) / (hi - lo) - 1.0 for v, (lo, hi) in zip(vals, limits.channels()))  # type: ignore[return-value]


def initial_state(config: EnvConfig) -> AircraftState:
    V, alpha, beta, p, q, r, mu, gamma = config.initial_state
    phi, theta, psi = euler_from_wind(alpha, beta, mu, gamma, 0.0)
    return AircraftState(V, alpha, beta, p, q, r, mu, gamma, 0.0, phi, theta, psi, config.start_altitude, 0.0)


class SpinEnv:
    """Single-threaded spin-recovery environment (reset / step)."""

    observation_size = len(OBS_FIELDS)
    action_size = 3

    def __init__(self, config: EnvConfig, params: AircraftParams, aero: AeroModelConfig) -> None:
        self.config = config
        self.params = params
        self.aero = aero
        self.rng = np.random.default_rng(config.seed)
        self.state: AircraftState | None = None
        self.targets: tuple[float, float, float] = tuple(config.targets)  # type: ignore[assignment]
        self.steps = 0
        self.done = True

    def reset(self, seed: int | None = None) -> np.ndarray:
        if seed is not None:
            self.rng = np.random.default_rng(seed)
        cfg = self.config
        if cfg.target_mode == "sampled":
            lo, hi = SAMPLED_ALPHA_RANGE
            self.targets = (float(self.rng.uniform(lo, hi)), 0.0, 0.0)
        else:
            self.targets = tuple(cfg.targets)  # type: ignore[assignment]
        self.state = initial_state(cfg)
        self.steps = 0
        self.done = False
        return self.observation()

    def observation(self) -> np.ndarray:
        assert self.state is not None
        return normalize_observation(self.state, self.targets)

    @property
    def in_hold(self) -> bool:
        return self.steps < self.config.hold_steps

    def hold_input(self) -> ControlInput:
        return replace(self.config.hold_controls, eta=self.config.eta)

    def step(self, action: Sequence[float]) -> StepResult:
        """Advance one step with a policy action in [-1, 1]^3."""
        if len(action) != 3:
            raise ValueError(f"action must have 3 entries, got {len(action)}")
        clipped = tuple(min(max(float(a), -1.0), 1.0) for a in action)
        if self.in_hold:
            u = saturate(self.hold_input(), self.config.limits)
            applied_action = unscale_controls(u, self.config.limits)
        else:
            u = scale_action(clipped, self.config.limits, self.config.eta)
            applied_action = clipped
        return self._advance(u, applied_action)

    def step_controls(self, u: ControlInput) -> StepResult:
        """Advance one step with explicit surface deflections (scripted controllers).

        The deflections are saturated; the action penalty uses their
        policy-space equivalent. The hold still overrides them.
        """
        if self.in_hold:
            u = self.hold_input()
        u = saturate(replace(u, eta=self.config.eta), self.config.limits)
        return self._advance(u, unscale_controls(u, self.config.limits))

    def _advance(self, u: ControlInput, action: Sequence[float]) -> StepResult:
        if self.done or self.state is None:
            raise RuntimeError("step() called on a finished episode; call reset() first")
        cfg = self.config
        x_t = self.state
        self.steps += 1
        failure = None
        try:
            x_next = integrate_step(x_t, u, cfg.dt, self.params, self.aero)
        except (DomainError, NumericalError) as exc:
            failure = f"integration: {exc}"
            x_next = None

        if x_next is not None:
            x_next = replace(x_next, t=self.steps * cfg.dt, **{k: wrap_angle(getattr(x_next, k)) for k in _WRAPPED})
            reward, parts, phase = total_reward(x_t, x_next, action, self.targets, cfg.reward)
            components = {"phase1": parts.phase1, "phase2": parts.phase2, "shaping": parts.shaping, "terminal": 0.0}
            reason = check_termination(x_next)
            if reason is not None:
                failure = reason
            self.state = x_next
        else:
            # The state is left where the step started; only time advances.
            self.state = replace(x_t, t=self.steps * cfg.dt)
            reward, phase = 0.0, Phase.RATE_DAMPING
            components = {"phase1": 0.0, "phase2": 0.0, "shaping": 0.0, "terminal": 0.0}

        terminated = failure is not None
        if terminated:
            reward += cfg.terminal_penalty
            components["terminal"] = cfg.terminal_penalty
        truncated = not terminated and self.steps >= cfg.episode_len
        self.done = terminated or truncated

        obs = normalize_observation(self.state, self.targets)
        if not np.all(np.isfinite(obs)):
            obs = np.nan_to_num(obs, nan=0.0)
        info = {
            "phase": int(phase),
            "state": self.state,
            "applied": u,
            "components": components,
            "hold": self.steps <= cfg.hold_steps,
            "failure": failure,
        }
        return StepResult(obs, float(reward), terminated, truncated, info)


def trajectory_row(res: StepResult) -> list[float]:
    x: AircraftState = res.info["state"]
    u: ControlInput = res.info["applied"]
    return [x.t, *x.as_vector(), u.delta_e, u.delta_a, u.delta_r, u.eta, res.reward, res.info["phase"]]


def write_trajectory(path: str, rows: Sequence[Sequence[float]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRAJECTORY_HEADER)
        for row in rows:
            w.writerow([repr(float(v)) if i < len(row) - 1 else int(v) for i, v in enumerate(row)])


def load_scenario_file(path: str) -> EnvConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return EnvConfig.from_json(data)

