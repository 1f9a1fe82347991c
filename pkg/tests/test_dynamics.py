import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spinrl.aero import load_aero_file, zero_model
from spinrl.dynamics import (
    AircraftParams,
    AircraftState,
    ControlInput,
    ControlLimits,
    air_density,
    integrate_step,
    load_params_file,
    rk4_step,
    saturate,
    state_derivative,
)
from spinrl.errors import ConfigError, DomainError

from conftest import AERO_PATH, PARAMS_PATH
from oracles import logistic_solution

# Spin state with Euler angles consistent with (mu, gamma) at zero heading.
SPIN = AircraftState(
    207.576, 1.2375, 0.0382, -0.6163, 0.1784, -1.4645, -1.3508, -1.5075,
    0.0, -0.02482838595689724, -0.31939646033316654, -1.3431036385344697, 8500.0,
)

# Reference derivatives from the extended-precision oracle (tests/oracles.py).
SPIN_DERIV_NEUTRAL = [
    -0.9941497699156459, 0.2663957516466318, -0.11693640442006051, 0.1415173560285501,
    0.047134828983116744, 0.10324904502932337, -1.5391689138050417, -0.004895553789930091,
    -0.46990200039634644, -0.13064551431144006, 0.14198758004697895, -1.5467018512246702,
    -207.16031997395714,
]
SPIN_DERIV_DEFLECTED = [
    -1.2317594918517742, 0.258764499416569, -0.1196073427005825, 0.3769626475741998,
    -0.2197915911077246, 0.17320641982376037, -1.5302643065563941, -0.005836779843965191,
    -0.36138001230111133, -0.13064551431144006, 0.14198758004697895, -1.5467018512246702,
    -207.16031997395714,
]

LIMITS = ControlLimits()


@pytest.fixture(scope="module")
def params():
    return load_params_file(PARAMS_PATH)


@pytest.fixture(scope="module")
def aero():
    return load_aero_file(AERO_PATH)


def level(**kw):
    base = dict(V=300.0, alpha=0.0, beta=0.0, p=0.0, q=0.0, r=0.0, mu=0.0, gamma=0.0)
    base.update(kw)
    return AircraftState(**base)


class TestSaturate:
    def test_elevator_upper_limit(self):
        assert saturate(ControlInput(delta_e=0.5), LIMITS).delta_e == 0.175

    def test_interior_is_identity(self):
        assert saturate(ControlInput(delta_e=0.0), LIMITS).delta_e == 0.0

    def test_rudder_lower_limit(self):
        assert saturate(ControlInput(delta_r=-1.0), LIMITS).delta_r == -0.524

    def test_throttle_untouched(self):
        assert saturate(ControlInput(eta=0.7, delta_a=9.0), LIMITS).eta == 0.7

    @given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
    def test_idempotent_and_bounded(self, e, a, r):
        once = saturate(ControlInput(e, a, r, 0.3), LIMITS)
        assert saturate(once, LIMITS) == once
        for v, (lo, hi) in zip((once.delta_e, once.delta_a, once.delta_r), LIMITS.channels()):
            assert lo <= v <= hi

    @given(st.floats(-0.436, 0.175), st.floats(-0.436, 0.436), st.floats(-0.524, 0.524))
    def test_identity_inside_box(self, e, a, r):
        u = ControlInput(e, a, r, 0.1)
        assert saturate(u, LIMITS) == u

    def test_reversed_limits_rejected(self):
        with pytest.raises(ConfigError, match="elevator"):
            ControlLimits(elevator=(0.2, -0.4))


class TestParams:
    def test_shipped_file_loads(self, params):
        assert params.mass_slug > 0 and params.atmosphere == "constant"

    @pytest.mark.parametrize("field", ["mass_slug", "Ix", "Tm_lbf", "gravity_ftps2"])
    def test_non_positive_rejected(self, params, field):
        data = params.to_json()
        data[field] = 0.0
        with pytest.raises(ConfigError, match=field):
            AircraftParams.from_json(data)

    def test_unknown_key_rejected(self, params):
        with pytest.raises(ConfigError):
            AircraftParams.from_json({**params.to_json(), "wingspan": 1.0})


class TestStateDerivative:
    def test_zero_forces_level_no_speed_change(self, params):
        d = state_derivative(level(), ControlInput(eta=0.0), params, zero_model(), 0.002377)
        assert d.V == 0.0

    def test_gravity_only_flight_path_rate(self, params):
        x = level(V=250.0)
        d = state_derivative(x, ControlInput(eta=0.0), params, zero_model(), 0.002377)
        assert d.gamma == pytest.approx(-params.gravity_ftps2 / 250.0, rel=1e-14)

    def test_pitch_kinematics_wings_level(self, params, aero):
        x = dataclasses.replace(level(q=0.37, r=-1.2), phi=0.0)
        d = state_derivative(x, ControlInput(), params, aero, 0.002377)
        assert d.theta == 0.37

    def test_no_roll_acceleration_without_moment(self, params):
        d = state_derivative(level(p=0.5), ControlInput(), params, zero_model(), 0.002377)
        assert d.p == 0.0

    def test_altitude_rate_positive_in_climb(self, params):
        d = state_derivative(level(gamma=0.1), ControlInput(), params, zero_model(), 0.002377)
        assert d.h == pytest.approx(300.0 * math.sin(0.1))

    @pytest.mark.parametrize(
        "u,expected",
        [
            (ControlInput(0.0, 0.0, 0.0, 0.25), SPIN_DERIV_NEUTRAL),
            (ControlInput(-0.2, 0.1, 0.3, 0.25), SPIN_DERIV_DEFLECTED),
        ],
    )
    def test_spin_state_matches_reference(self, params, aero, u, expected):
        got = state_derivative(SPIN, u, params, aero, 0.002377).as_vector()
        np.testing.assert_allclose(got, expected, rtol=1e-10, atol=1e-12)

    def test_deterministic(self, params, aero):
        a = state_derivative(SPIN, ControlInput(eta=0.25), params, aero, 0.002377)
        b = state_derivative(SPIN, ControlInput(eta=0.25), params, aero, 0.002377)
        assert a == b

    @pytest.mark.parametrize(
        "override",
        [{"theta": math.pi / 2}, {"theta": -math.pi / 2 + 1e-8}, {"beta": math.pi / 2}, {"gamma": -math.pi / 2}],
    )
    def test_singularities_raise(self, params, aero, override):
        x = dataclasses.replace(SPIN, **override)
        with pytest.raises(DomainError):
            state_derivative(x, ControlInput(), params, aero, 0.002377)

    def test_non_positive_airspeed_raises(self, params, aero):
        with pytest.raises(DomainError):
            state_derivative(dataclasses.replace(SPIN, V=0.0), ControlInput(), params, aero, 0.002377)


class TestAtmosphere:
    def test_constant_mode(self, params):
        assert air_density(0.0, params) == 0.002377
        assert air_density(30000.0, params) == 0.002377

    def test_standard_anchor_and_monotone(self, params):
        std = dataclasses.replace(params, atmosphere="standard")
        assert air_density(0.0, std) == air_density(0.0, params)
        hs = np.linspace(0, 40000, 200)
        rho = [air_density(h, std) for h in hs]
        assert all(a >= b for a, b in zip(rho, rho[1:]))


class TestIntegrator:
    def test_constant_rate_exact(self, params):
        # Zero aero and thrust, theta driven only by a constant q at phi = 0.
        x = level(q=0.2, V=300.0)
        x1 = integrate_step(x, ControlInput(), 0.01, params, zero_model())
        assert x1.theta == pytest.approx(0.002, abs=1e-15)
        assert x1.t == pytest.approx(0.01)

    def test_generic_rk4_polynomial_exact(self):
        f = lambda t, y: np.array([3 * t**2 + 2 * t])
        y = rk4_step(f, 0.0, np.array([0.0]), 0.5)
        assert y[0] == pytest.approx(0.5**3 + 0.5**2, abs=1e-15)

    def test_fourth_order_convergence(self):
        f = lambda t, y: 1.5 * y * (1 - y)
        errs = []
        for dt in (0.02, 0.01, 0.005):
            y, t = np.array([0.1]), 0.0
            for _ in range(int(round(2.0 / dt))):
                y = rk4_step(f, t, y, dt)
                t += dt
            errs.append(abs(y[0] - logistic_solution(2.0)))
        orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
        assert all(3.5 <= o <= 4.5 for o in orders), orders

    def test_rejects_bad_dt(self, params, aero):
        with pytest.raises(ValueError):
            integrate_step(SPIN, ControlInput(), 0.0, params, aero)

    def test_spin_is_sustained_with_neutral_surfaces(self, params, aero):
        x = SPIN
        for _ in range(1000):
            x = integrate_step(x, ControlInput(eta=0.25), 0.01, params, aero)
        assert x.is_finite()
        assert x.alpha > 0.9 and abs(x.r) > 1.0

    def test_aircraft_step_converges_at_fourth_order(self, params, aero):
        u = ControlInput(-0.1, 0.05, 0.2, 0.25)

        def run(dt):
            x = SPIN
            for _ in range(int(round(0.4 / dt))):
                x = integrate_step(x, u, dt, params, aero)
            return np.array(x.core())

        ref = run(0.00125)
        errs = [np.max(np.abs(run(dt) - ref)) for dt in (0.02, 0.01, 0.005)]
        orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
        assert all(3.5 <= o <= 4.5 for o in orders), orders
