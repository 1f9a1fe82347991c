"""Nonlinear six-degree-of-freedom rigid-body dynamics in wind axes.

Integrated states are airspeed, aerodynamic angles, body rates, the
velocity-axis angles (bank ``mu``, flight path ``gamma``, heading ``chi``),
the Euler angles and altitude. Both the Euler kinematics and the wind-axis
kinematics are carried; they are not reconciled against each other.

Units are US customary: ft, slug, lbf, seconds, radians.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .aero import AeroModelConfig
from .errors import ConfigError, DomainError, NumericalError

SEA_LEVEL_DENSITY = 0.002377  # slug/ft^3
DENSITY_SCALE_HEIGHT_FT = 32000.0
TRIG_EPS = 1e-6
# The integrator steps through the wind-axis singularity at |gamma| = pi/2 with
# a tighter tolerance; see integrate_step.
INTEGRATOR_TRIG_EPS = 1e-9
DEFAULT_DT = 0.01

# Order of the integrated state vector.
STATE_FIELDS = ("V", "alpha", "beta", "p", "q", "r", "mu", "gamma", "chi", "phi", "theta", "psi", "h")
CORE_FIELDS = STATE_FIELDS[:8]


@dataclass(frozen=True)
class AircraftState:
    V: float
    alpha: float
    beta: float
    p: float
    q: float
    r: float
    mu: float
    gamma: float
    chi: float = 0.0
    phi: float = 0.0
    theta: float = 0.0
    psi: float = 0.0
    h: float = 0.0
    t: float = 0.0

    def as_vector(self) -> tuple[float, ...]:
        """The 13 integrated states in ``STATE_FIELDS`` order (time excluded)."""
        return (
            self.V, self.alpha, self.beta, self.p, self.q, self.r, self.mu, self.gamma,
            self.chi, self.phi, self.theta, self.psi, self.h,
        )

    def core(self) -> tuple[float, ...]:
        return (self.V, self.alpha, self.beta, self.p, self.q, self.r, self.mu, self.gamma)

    @classmethod
    def from_vector(cls, vec: Sequence[float], t: float = 0.0) -> "AircraftState":
        return cls(*(float(v) for v in vec), t=float(t))

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in self.as_vector()) and math.isfinite(self.t)


@dataclass(frozen=True)
class StateDerivative:
    """Time derivative of every integrated state (same field names, per second)."""

    V: float
    alpha: float
    beta: float
    p: float
    q: float
    r: float
    mu: float
    gamma: float
    chi: float
    phi: float
    theta: float
    psi: float
    h: float

    def as_vector(self) -> tuple[float, ...]:
        return tuple(getattr(self, f) for f in STATE_FIELDS)


@dataclass(frozen=True)
class ControlInput:
    delta_e: float = 0.0
    delta_a: float = 0.0
    delta_r: float = 0.0
    eta: float = 0.0


@dataclass(frozen=True)
class ControlLimits:
    elevator: tuple[float, float] = (-0.436, 0.175)
    aileron: tuple[float, float] = (-0.436, 0.436)
    rudder: tuple[float, float] = (-0.524, 0.524)

    def __post_init__(self) -> None:
        for name in ("elevator", "aileron", "rudder"):
            lo, hi = getattr(self, name)
            if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
                raise ConfigError(f"control limits for {name}: min must be < max, got ({lo}, {hi})")

    def channels(self) -> tuple[tuple[float, float], tuple[float, float], tuple[float, float]]:
        return (self.elevator, self.aileron, self.rudder)


@dataclass(frozen=True)
class AircraftParams:
    mass_slug: float
    wing_area_ft2: float
    span_ft: float
    chord_ft: float
    Ix: float
    Iy: float
    Iz: float
    Tm_lbf: float
    gravity_ftps2: float = 32.174
    atmosphere: str = "constant"
    rho0: float = SEA_LEVEL_DENSITY

    def __post_init__(self) -> None:
        for f in fields(self):
            if f.name == "atmosphere":
                continue
            v = getattr(self, f.name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v) or v <= 0:
                raise ConfigError(f"aircraft parameter {f.name} must be a positive finite number, got {v!r}")
        if self.atmosphere not in ("constant", "standard"):
            raise ConfigError(f"atmosphere must be 'constant' or 'standard', got {self.atmosphere!r}")

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "AircraftParams":
        if not isinstance(data, Mapping):
            raise ConfigError("aircraft parameter file must be a JSON object")
        known = {f.name for f in fields(cls)}
        body = {k: v for k, v in data.items() if k != "meta"}
        unknown = set(body) - known
        if unknown:
            raise ConfigError(f"unknown aircraft parameter keys {sorted(unknown)}")
        try:
            return cls(**body)
        except TypeError as exc:
            raise ConfigError(f"aircraft parameters: {exc}") from exc

    def to_json(self) -> dict[str, Any]:
        return asdict(self)


def load_params_file(path: str) -> AircraftParams:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return AircraftParams.from_json(data)


def saturate(u: ControlInput, limits: ControlLimits) -> ControlInput:
    """Clamp each surface deflection to its limits; throttle passes through."""
    (e_lo, e_hi), (a_lo, a_hi), (r_lo, r_hi) = limits.channels()
    return ControlInput(
        min(max(u.delta_e, e_lo), e_hi),
        min(max(u.delta_a, a_lo), a_hi),
        min(max(u.delta_r, r_lo), r_hi),
        u.eta,
    )


def air_density(h: float, params: AircraftParams | None = None) -> float:
    """Air density in slug/ft^3.

    Constant mode ignores altitude. Standard mode is an exponential
    troposphere fit anchored at ``rho0`` at sea level.
    """
    if params is None:
        return SEA_LEVEL_DENSITY
    if params.atmosphere == "constant":
        return params.rho0
    return params.rho0 * math.exp(-max(h, 0.0) / DENSITY_SCALE_HEIGHT_FT)


def _derivative(
    x: Sequence[float],
    u: ControlInput,
    params: AircraftParams,
    aero: AeroModelConfig,
    rho: float,
    eps: float = TRIG_EPS,
) -> tuple[float, ...]:
    V, alpha, beta, p, q, r, mu, gamma, _chi, phi, theta, _psi, _h = x
    if not V > 0.0:
        raise DomainError(f"airspeed must be positive, got V={V!r}")

    cb = math.cos(beta)
    ct = math.cos(theta)
    cg = math.cos(gamma)
    if abs(cb) < eps:
        raise DomainError(f"cos(beta) vanished at beta={beta!r}")
    if abs(ct) < eps:
        raise DomainError(f"cos(theta) vanished at theta={theta!r}")
    if abs(cg) < eps:
        raise DomainError(f"cos(gamma) vanished at gamma={gamma!r}")

    m = params.mass_slug
    g = params.gravity_ftps2
    Ix, Iy, Iz = params.Ix, params.Iy, params.Iz
    b = params.span_ft
    CD, CL, CY, Cl, Cm, Cn = aero.evaluate(
        alpha, beta, p, q, r, V, u.delta_e, u.delta_a, u.delta_r, b, params.chord_ft
    )

    sa, ca = math.sin(alpha), math.cos(alpha)
    sb = math.sin(beta)
    sm, cm = math.sin(mu), math.cos(mu)
    sg = math.sin(gamma)
    tb = sb / cb
    tg = sg / cg
    sp, cp = math.sin(phi), math.cos(phi)
    tt = math.sin(theta) / ct

    thrust = params.Tm_lbf * u.eta
    qS = 0.5 * rho * V * V * params.wing_area_ft2
    mg = m * g
    mV = m * V
    lift = qS * CL
    side = qS * CY

    V_dot = (thrust * ca * cb - qS * CD - mg * sg) / m
    alpha_dot = q - (p * ca + r * sa) * sb / cb + (thrust * sa + lift - mg * cm * cg) / mV
    beta_dot = (-thrust * ca * sb + side + mg * sm * cg) / mV + (p * sa - r * ca)
    p_dot = (Iy - Iz) / Ix * q * r + qS * b * Cl / Ix
    q_dot = (Iz - Ix) / Iy * p * r + qS * params.chord_ft * Cm / Iy
    r_dot = (Ix - Iy) / Iz * p * q + qS * b * Cn / Iz
    phi_dot = p + q * sp * tt + r * cp * tt
    theta_dot = q * cp - r * sp
    psi_dot = (q * sp + r * cp) / ct
    h_dot = V * sg
    # The bare sin(mu)*tan(gamma) term is kept exactly as written in the model.
    mu_dot = (p * ca + r * sa) / cb + (
        lift * tb + thrust * sa + sm * tg - mg * cm * cg * tb + side * cm * tg
    ) / mV
    gamma_dot = (thrust * (sa * cm + ca * sb * sm) - lift * cm - mg * cg - side * sm) / mV
    chi_dot = (thrust * (sa * sm - ca * sb * cm) + qS * (CL * sm + CY * cm)) / (mV * cg)

    return (
        V_dot, alpha_dot, beta_dot, p_dot, q_dot, r_dot, mu_dot, gamma_dot,
        chi_dot, phi_dot, theta_dot, psi_dot, h_dot,
    )


def state_derivative(
    x: AircraftState,
    u: ControlInput,
    params: AircraftParams,
    aero: AeroModelConfig,
    rho: float,
) -> StateDerivative:
    """Evaluate the equations of motion at one state.

    Raises :class:`DomainError` when airspeed is not positive or when
    ``cos(beta)``, ``cos(theta)`` or ``cos(gamma)`` drops below ``1e-6`` in
    magnitude, and :class:`NumericalError` if any rate comes out non-finite.
    """
    rates = _derivative(x.as_vector(), u, params, aero, rho)
    for name, v in zip(STATE_FIELDS, rates):
        if not math.isfinite(v):
            raise NumericalError(f"d{name}/dt is not finite ({v})")
    return StateDerivative(*rates)


def rk4_step(f: Callable[[float, np.ndarray], np.ndarray], t: float, y: np.ndarray, dt: float) -> np.ndarray:
    """One classical Runge-Kutta step for a generic ODE ``y' = f(t, y)``."""
    k1 = f(t, y)
    k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_step(
    x: AircraftState,
    u: ControlInput,
    dt: float,
    params: AircraftParams,
    aero: AeroModelConfig,
    max_splits: int = 2,
) -> AircraftState:
    """Advance the aircraft by one fixed RK4 step of size ``dt``.

    ``u`` must already be saturated. Density is re-evaluated at each stage's
    altitude.

    A flat spin descends almost vertically, so ``gamma`` repeatedly crosses
    -pi/2 where the wind-axis equations are singular. Stages are therefore
    evaluated with the tighter ``INTEGRATOR_TRIG_EPS`` divisor guard, and if a
    stage still lands inside it the step is redone as two half steps (at most
    ``max_splits`` levels deep). A state that converges onto the singularity
    still raises :class:`DomainError`.
    """
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    try:
        return _rk4_aircraft(x, u, dt, params, aero)
    except DomainError:
        if max_splits <= 0:
            raise
        mid = integrate_step(x, u, 0.5 * dt, params, aero, max_splits - 1)
        return integrate_step(mid, u, 0.5 * dt, params, aero, max_splits - 1)


def _rk4_aircraft(
    x: AircraftState,
    u: ControlInput,
    dt: float,
    params: AircraftParams,
    aero: AeroModelConfig,
) -> AircraftState:
    y0 = x.as_vector()
    n = len(y0)
    half = 0.5 * dt

    def f(y: Sequence[float]) -> tuple[float, ...]:
        return _derivative(y, u, params, aero, air_density(y[12], params), INTEGRATOR_TRIG_EPS)

    k1 = f(y0)
    k2 = f([y0[i] + half * k1[i] for i in range(n)])
    k3 = f([y0[i] + half * k2[i] for i in range(n)])
    k4 = f([y0[i] + dt * k3[i] for i in range(n)])
    sixth = dt / 6.0
    y1 = [y0[i] + sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) for i in range(n)]
    for name, v in zip(STATE_FIELDS, y1):
        if not math.isfinite(v):
            raise NumericalError(f"state {name} became non-finite after integration ({v})")
    return AircraftState(*y1, t=x.t + dt)


def euler_from_wind(alpha: float, beta: float, mu: float, gamma: float, chi: float) -> tuple[float, float, float]:
    """Euler angles (phi, theta, psi) of the body frame given wind-axis angles.

    The body frame is obtained from the local level frame by rotating through
    heading ``chi``, flight path ``gamma`` and bank ``mu`` (3-2-1 to the wind
    frame), then through ``-beta`` about z and ``alpha`` about y.
    """

    def rx(a: float) -> np.ndarray:
        c, s = math.cos(a), math.sin(a)
        return np.array([[1.0, 0.0, 0.0], [0.0, c, s], [0.0, -s, c]])

    def ry(a: float) -> np.ndarray:
        c, s = math.cos(a), math.sin(a)
        return np.array([[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]])

    def rz(a: float) -> np.ndarray:
        c, s = math.cos(a), math.sin(a)
        return np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])

    wind_from_level = rx(mu) @ ry(gamma) @ rz(chi)
    body_from_wind = ry(alpha) @ rz(-beta)
    dcm = body_from_wind @ wind_from_level
    theta = -math.asin(max(-1.0, min(1.0, dcm[0, 2])))
    phi = math.atan2(dcm[1, 2], dcm[2, 2])
    psi = math.atan2(dcm[0, 1], dcm[0, 0])
    return phi, theta, psi


def with_time(x: AircraftState, t: float) -> AircraftState:
    return replace(x, t=t)
