"""Two-phase shaped reward for spin recovery.

While any body rate is above the threshold the reward only penalises rotation
(rate damping). Once every rate is below it, the reward tracks the target
attitude with per-step bonuses near the target and a penalty on the policy
output. A potential-based shaping term is added in both phases.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, fields
from typing import Any, Mapping, Sequence

from .dynamics import AircraftState
from .errors import ConfigError


class Phase(enum.IntEnum):
    RATE_DAMPING = 1
    ATTITUDE_TRACKING = 2


@dataclass(frozen=True)
class RewardWeights:
    w_p1: float = 0.3
    w_p21: float = 0.3
    w_p22: float = 0.05
    rate_threshold: float = 0.17
    bonus_alpha: float = 5.0
    bonus_beta: float = 3.0
    bonus_mu: float = 3.0
    bonus_band: float = 0.017
    Gamma: float = 0.99

    def __post_init__(self) -> None:
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigError(f"reward weight {f.name} must be a finite number, got {v!r}")
        for name in ("w_p1", "w_p21", "w_p22", "bonus_alpha", "bonus_beta", "bonus_mu", "bonus_band"):
            if getattr(self, name) < 0:
                raise ConfigError(f"reward weight {name} must be >= 0, got {getattr(self, name)}")
        if not self.rate_threshold > 0:
            raise ConfigError(f"rate_threshold must be > 0, got {self.rate_threshold}")
        if not 0.0 < self.Gamma <= 1.0:
            raise ConfigError(f"Gamma must be in (0, 1], got {self.Gamma}")

    @classmethod
    def from_json(cls, data: Mapping[str, Any] | None) -> "RewardWeights":
        data = dict(data or {})
        unknown = set(data) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"unknown reward weight keys {sorted(unknown)}")
        return cls(**data)

    def to_json(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class AttitudeErrors:
    e_alpha: float
    e_beta: float
    e_mu: float

    @classmethod
    def of(cls, x: AircraftState, targets: Sequence[float]) -> "AttitudeErrors":
        alpha_d, beta_d, mu_d = targets
        return cls(x.alpha - alpha_d, x.beta - beta_d, x.mu - mu_d)


@dataclass(frozen=True)
class RewardComponents:
    phase1: float
    phase2: float
    shaping: float

    @property
    def total(self) -> float:
        return self.phase1 + self.phase2 + self.shaping


def phase_of(p: float, q: float, r: float, threshold: float = 0.17) -> Phase:
    """Attitude tracking once every body rate magnitude is below ``threshold``."""
    if max(abs(p), abs(q), abs(r)) < threshold:
        return Phase.ATTITUDE_TRACKING
    return Phase.RATE_DAMPING


def _coupling(p: float, q: float, r: float) -> float:
    return abs(p * q) + abs(q * r) + abs(p * r)


def phase1_reward(p: float, q: float, r: float, w: RewardWeights = RewardWeights()) -> float:
    return -(p * p + q * q + r * r) - w.w_p1 * _coupling(p, q, r)


def phase2_reward(
    err: AttitudeErrors,
    q: float,
    p: float,
    r: float,
    action: Sequence[float],
    w: RewardWeights = RewardWeights(),
) -> float:
    """Attitude-tracking reward.

    ``action`` is the clipped policy output in [-1, 1], not the surface
    deflection, so the penalty weighs the three channels equally.
    """
    e_a = err.e_alpha
    out = -e_a * e_a - w.w_p21 * e_a * q
    out -= w.w_p22 * (p * p + q * q + r * r + _coupling(p, q, r))
    if abs(err.e_alpha) < w.bonus_band:
        out += w.bonus_alpha
    if abs(err.e_beta) < w.bonus_band:
        out += w.bonus_beta
    if abs(err.e_mu) < w.bonus_band:
        out += w.bonus_mu
    out -= sum(a * a for a in action)
    return out


def shaping_potential(e_alpha: float, p: float, q: float, r: float, w: RewardWeights = RewardWeights()) -> float:
    return -e_alpha * e_alpha - w.w_p21 * (p * p + q * q + r * r)


def total_reward(
    x_t: AircraftState,
    x_next: AircraftState,
    action: Sequence[float],
    targets: Sequence[float],
    w: RewardWeights = RewardWeights(),
) -> tuple[float, RewardComponents, Phase]:
    """Reward for the transition ``x_t -> x_next``.

    The phase is decided on ``x_next``. Returns the scalar, its breakdown and
    the phase used.
    """
    phase = phase_of(x_next.p, x_next.q, x_next.r, w.rate_threshold)
    if phase is Phase.RATE_DAMPING:
        r1, r2 = phase1_reward(x_next.p, x_next.q, x_next.r, w), 0.0
    else:
        err = AttitudeErrors.of(x_next, targets)
        r1, r2 = 0.0, phase2_reward(err, x_next.q, x_next.p, x_next.r, action, w)
    alpha_d = targets[0]
    sigma_t = shaping_potential(x_t.alpha - alpha_d, x_t.p, x_t.q, x_t.r, w)
    sigma_next = shaping_potential(x_next.alpha - alpha_d, x_next.p, x_next.q, x_next.r, w)
    parts = RewardComponents(r1, r2, w.Gamma * sigma_next - sigma_t)
    return parts.total, parts, phase
