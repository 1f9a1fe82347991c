"""Experiment configuration: aircraft, aero model, scenario and PPO settings.

An experiment file references the four component configs either by path
(relative to the experiment file) or inline as JSON objects. The resolved,
fully inlined form is what gets hashed and written next to every run, so a
run can be reproduced from its own output directory.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Any, Mapping

from .aero import AeroModelConfig, from_json as aero_from_json
from .baselines import BaselineController
from .dynamics import AircraftParams
from .env import EnvConfig
from .errors import ConfigError
from .ppo.hyperparams import PPOHyperparams

PACKAGE_PREFIX = "package:"
EXPERIMENT_KEYS = {"label", "aircraft", "aero", "scenario", "ppo", "baseline", "out_dir", "seed", "meta"}


@dataclass
class ExperimentConfig:
    aircraft: AircraftParams
    aero: AeroModelConfig
    scenario: EnvConfig
    ppo: PPOHyperparams
    baseline: BaselineController = field(default_factory=BaselineController)
    label: str = "run"
    out_dir: str | None = None
    seed: int = 0

    def effective(self) -> dict[str, Any]:
        """Fully inlined, JSON-ready form."""
        return {
            "label": self.label,
            "aircraft": self.aircraft.to_json(),
            "aero": self.aero.to_json(),
            "scenario": self.scenario.to_json(),
            "ppo": self.ppo.to_json(),
            "baseline": self.baseline.to_json(),
            "seed": self.seed,
        }

    def sha256(self) -> str:
        return hashlib.sha256(canonical_json(self.effective()).encode("utf-8")).hexdigest()


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def _read_json(path: str) -> Any:
    try:
        if path.startswith(PACKAGE_PREFIX):
            text = resources.files("spinrl").joinpath("data", path[len(PACKAGE_PREFIX):]).read_text("utf-8")
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
    except (OSError, FileNotFoundError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc


def _resolve(ref: Any, base_dir: str, what: str) -> Any:
    if ref is None:
        return None
    if isinstance(ref, Mapping):
        return ref
    if isinstance(ref, str):
        if ref.startswith(PACKAGE_PREFIX) or os.path.isabs(ref):
            return _read_json(ref)
        return _read_json(os.path.join(base_dir, ref))
    raise ConfigError(f"{what}: expected a file path or an inline object, got {type(ref).__name__}")


def _section(what: str, fn: Any, data: Any) -> Any:
    try:
        return fn(data)
    except ConfigError as exc:
        raise ConfigError(f"{what}: {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{what}: {exc}") from exc


def experiment_from_json(data: Mapping[str, Any], base_dir: str = ".") -> ExperimentConfig:
    if not isinstance(data, Mapping):
        raise ConfigError("experiment config must be a JSON object")
    if "effective_config" in data:  # a run manifest
        data = data["effective_config"]
    unknown = set(data) - EXPERIMENT_KEYS
    if unknown:
        raise ConfigError(f"unknown experiment keys {sorted(unknown)}")
    aircraft = _resolve(data.get("aircraft", PACKAGE_PREFIX + "f18_harv.json"), base_dir, "aircraft")
    aero = _resolve(data.get("aero", PACKAGE_PREFIX + "aero_harv.json"), base_dir, "aero")
    scenario = _resolve(data.get("scenario", {}), base_dir, "scenario")
    ppo = _resolve(data.get("ppo", {}), base_dir, "ppo")
    baseline = _resolve(data.get("baseline", {}), base_dir, "baseline")
    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"seed must be a non-negative integer, got {seed!r}")
    # One master seed drives everything; component-level seeds are overwritten.
    return ExperimentConfig(
        aircraft=_section("aircraft", AircraftParams.from_json, aircraft),
        aero=_section("aero", aero_from_json, aero),
        scenario=replace(_section("scenario", EnvConfig.from_json, scenario), seed=seed),
        ppo=replace(_section("ppo", PPOHyperparams.from_json, ppo), seed=seed),
        baseline=_section("baseline", BaselineController.from_json, baseline),
        label=str(data.get("label", "run")),
        out_dir=data.get("out_dir"),
        seed=seed,
    )


def load_experiment(path: str) -> ExperimentConfig:
    """Load an experiment file, a run manifest, or a bare scenario file.

    A bare scenario (no ``scenario`` key) runs with the shipped aircraft and
    aero model and default PPO settings.
    """
    data = _read_json(path)
    base = os.path.dirname(os.path.abspath(path))
    experiment_like = {"scenario", "ppo", "aero", "aircraft", "effective_config"}
    if isinstance(data, Mapping) and not set(data) & experiment_like:
        data = {"scenario": data, "label": os.path.splitext(os.path.basename(path))[0]}
    return experiment_from_json(data, base)


# Physical actuator box; configured limits may be narrower but not wider.
ACTUATOR_BOX = {"elevator": (-0.436, 0.175), "aileron": (-0.436, 0.436), "rudder": (-0.524, 0.524)}


def with_seed(cfg: ExperimentConfig, seed: int) -> ExperimentConfig:
    return replace(cfg, seed=seed, scenario=replace(cfg.scenario, seed=seed), ppo=replace(cfg.ppo, seed=seed))


def cross_validate(cfg: ExperimentConfig) -> None:
    """Checks that span several files; raises on the first violation."""
    for name, (lo, hi) in ACTUATOR_BOX.items():
        clo, chi = getattr(cfg.scenario.limits, name)
        if clo < lo - 1e-12 or chi > hi + 1e-12:
            raise ConfigError(f"scenario.limits.{name} ({clo}, {chi}) exceeds the actuator range ({lo}, {hi})")
    if cfg.ppo.minibatch_size > cfg.ppo.rollout_steps:
        raise ConfigError(
            f"ppo.minibatch_size ({cfg.ppo.minibatch_size}) exceeds ppo.rollout_steps ({cfg.ppo.rollout_steps})"
        )
    if cfg.scenario.hold_steps >= cfg.scenario.episode_len:
        raise ConfigError("scenario.spin_hold covers the whole episode; the agent would never act")
