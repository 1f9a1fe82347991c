import csv
import dataclasses
import math
import os

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spinrl.dynamics import AircraftState, ControlInput, ControlLimits
from spinrl.env import (
    OBS_FIELDS,
    OBS_HIGH,
    OBS_LOW,
    TRAJECTORY_HEADER,
    EnvConfig,
    SpinEnv,
    check_termination,
    decode_observation,
    load_scenario_file,
    normalize_observation,
    scale_action,
    trajectory_row,
    unscale_controls,
    write_trajectory,
)
from spinrl.errors import ConfigError

from conftest import CONFIGS

LIMITS = ControlLimits()
S0 = AircraftState(207.576, 1.2375, 0.0382, -0.6163, 0.1784, -1.4645, -1.3508, -1.5075, h=8500.0)


def make_env(shipped, **kw):
    params, aero = shipped
    return SpinEnv(EnvConfig(**kw), params, aero)


def recovery_controls(x):
    return ControlInput(2.0 * (0.3 - x.alpha) - 0.5 * x.q, 0.0, -x.r)


class TestReset:
    def test_initial_observation(self, shipped):
        env = make_env(shipped)
        v = decode_observation(env.reset())
        assert v[0] == pytest.approx(207.576, abs=1e-9)
        assert v[1] == pytest.approx(1.2375, abs=1e-12)
        assert v[8] == pytest.approx(0.3, abs=1e-12)
        assert env.state.h == 8500.0 and env.steps == 0

    def test_initial_state_inside_envelope(self):
        assert check_termination(S0) is None

    def test_sampled_targets_in_range(self, shipped):
        env = make_env(shipped, target_mode="sampled", seed=4)
        draws = []
        for _ in range(10000):
            env.reset()
            draws.append(env.targets)
        alpha_d = np.array([d[0] for d in draws])
        assert alpha_d.min() >= -0.0873 and alpha_d.max() <= 0.6981
        assert all(d[1] == 0.0 and d[2] == 0.0 for d in draws)
        assert alpha_d.max() - alpha_d.min() > 0.7

    def test_reset_seed_reproducible(self, shipped):
        env = make_env(shipped, target_mode="sampled")
        a = env.reset(seed=9)
        b = env.reset(seed=9)
        assert np.array_equal(a, b)

    @pytest.mark.parametrize(
        "bad", [{"dt": 0.0}, {"episode_len": 0}, {"spin_hold": -1.0}, {"terminal_penalty": 5.0}, {"target_mode": "x"}]
    )
    def test_invalid_config(self, bad):
        with pytest.raises(ConfigError):
            EnvConfig(**bad)


class TestScaleAction:
    def test_upper_corner(self):
        u = scale_action((1, 1, 1), LIMITS, 0.25)
        assert (u.delta_e, u.delta_a, u.delta_r) == (0.175, 0.436, 0.524)

    def test_lower_corner(self):
        u = scale_action((-1, -1, -1), LIMITS, 0.25)
        assert (u.delta_e, u.delta_a, u.delta_r) == (-0.436, -0.436, -0.524)

    def test_midpoint(self):
        assert scale_action((0, 0, 0), LIMITS, 0.25).delta_e == pytest.approx(-0.1305, abs=1e-15)

    def test_clips_before_scaling(self):
        assert scale_action((7, -3, 2), LIMITS, 0.0) == scale_action((1, -1, 1), LIMITS, 0.0)

    def test_eta_from_config(self):
        assert scale_action((0, 0, 0), LIMITS, 0.6).eta == 0.6

    @given(st.floats(-2, 2), st.floats(-2, 2))
    def test_monotone_per_channel(self, a, b):
        lo, hi = sorted((a, b))
        ul, uh = scale_action((lo, lo, lo), LIMITS, 0), scale_action((hi, hi, hi), LIMITS, 0)
        assert ul.delta_e <= uh.delta_e and ul.delta_a <= uh.delta_a and ul.delta_r <= uh.delta_r

    @given(st.tuples(*[st.floats(-1, 1)] * 3))
    def test_unscale_inverts(self, a):
        back = unscale_controls(scale_action(a, LIMITS, 0), LIMITS)
        np.testing.assert_allclose(back, a, atol=1e-12)


class TestObservation:
    def test_fields(self):
        assert len(OBS_FIELDS) == 11 and OBS_FIELDS[-3:] == ("alpha_d", "beta_d", "mu_d")

    def test_upper_airspeed(self):
        assert normalize_observation(dataclasses.replace(S0, V=2000.0), (0.3, 0, 0))[0] == 1.0

    def test_zero_sideslip(self):
        assert normalize_observation(dataclasses.replace(S0, beta=0.0), (0.3, 0, 0))[2] == 0.0

    def test_alpha_upper_bound(self):
        assert normalize_observation(dataclasses.replace(S0, alpha=1.571), (0.3, 0, 0))[1] == 1.0

    def test_out_of_bounds_is_clipped(self):
        obs = normalize_observation(dataclasses.replace(S0, V=5000.0, p=-99.0), (0.3, 0, 0))
        assert obs[0] == 1.0 and obs[3] == -1.0

    def test_round_trip(self):
        rng = np.random.default_rng(0)
        for _ in range(2000):
            raw = rng.uniform(OBS_LOW, OBS_HIGH)
            x = AircraftState(*raw[:8])
            back = decode_observation(normalize_observation(x, raw[8:]))
            np.testing.assert_allclose(back, raw, rtol=1e-12, atol=1e-12)


class TestTermination:
    def test_ground(self):
        assert check_termination(dataclasses.replace(S0, h=-1.0)) == "ground"

    def test_rate(self):
        assert check_termination(dataclasses.replace(S0, p=32.0)) == "rate"

    @pytest.mark.parametrize(
        "override,reason",
        [
            ({"V": 2100.0}, "airspeed"),
            ({"alpha": 1.6}, "alpha"),
            ({"alpha": -0.3}, "alpha"),
            ({"beta": 3.2}, "beta"),
            ({"mu": -3.2}, "mu"),
            ({"gamma": 1.8}, "gamma"),
            ({"q": math.nan}, "non_finite"),
        ],
    )
    def test_each_bound(self, override, reason):
        assert check_termination(dataclasses.replace(S0, **override)) == reason


class TestStep:
    def test_hold_applies_hold_controls(self, shipped):
        env = make_env(shipped)
        env.reset()
        res = env.step((1.0, -1.0, 1.0))
        assert res.info["applied"] == ControlInput(0.0, 0.0, 0.0, 0.25)
        assert res.info["hold"]

    def test_hold_ignores_actions(self, shipped):
        a, b = make_env(shipped), make_env(shipped)
        a.reset(), b.reset()
        rng = np.random.default_rng(1)
        for _ in range(300):
            ra = a.step(rng.uniform(-1, 1, 3))
            rb = b.step(-rng.uniform(-1, 1, 3))
            assert ra.info["state"] == rb.info["state"] and ra.reward == rb.reward

    def test_agent_controls_after_hold(self, shipped):
        env = make_env(shipped, spin_hold=0.02)
        env.reset()
        env.step((0, 0, 0))
        env.step((0, 0, 0))
        res = env.step((1.0, 1.0, 1.0))
        assert not res.info["hold"]
        assert res.info["applied"] == scale_action((1, 1, 1), LIMITS, 0.25)

    def test_envelope_violation_penalty(self, shipped):
        env = make_env(shipped, spin_hold=0.0)
        env.reset()
        env.state = dataclasses.replace(env.state, alpha=1.5705, q=5.0)
        res = env.step((1.0, 0.0, 0.0))
        assert res.terminated and not res.truncated
        assert res.info["failure"] == "alpha"
        c = res.info["components"]
        assert c["terminal"] == -1000.0
        assert res.reward == pytest.approx(c["phase1"] + c["phase2"] + c["shaping"] - 1000.0, abs=1e-9)

    def test_truncation_at_episode_length(self, shipped):
        params, aero = shipped
        env = SpinEnv(load_scenario_file(os.path.join(CONFIGS, "scenarios", "paper_spin.json")), params, aero)
        assert env.config.episode_len == 20000
        env.reset()
        n = 0
        while True:
            res = env.step_controls(recovery_controls(env.state))
            n += 1
            if res.terminated or res.truncated:
                break
        assert n == 20000
        assert res.truncated and not res.terminated
        assert res.info["components"]["terminal"] == 0.0

    def test_step_after_done_raises(self, shipped):
        env = make_env(shipped, episode_len=1)
        env.reset()
        assert env.step((0, 0, 0)).truncated
        with pytest.raises(RuntimeError):
            env.step((0, 0, 0))

    def test_observation_bounded_and_components_sum(self, shipped):
        env = make_env(shipped, spin_hold=0.5, episode_len=400)
        env.reset()
        rng = np.random.default_rng(2)
        done = False
        while not done:
            res = env.step(rng.uniform(-1.5, 1.5, 3))
            assert res.observation.shape == (11,)
            assert np.all(np.abs(res.observation) <= 1.0)
            assert math.isfinite(res.reward)
            assert sum(res.info["components"].values()) == pytest.approx(res.reward, abs=1e-12)
            assert not (res.terminated and res.truncated)
            done = res.terminated or res.truncated

    def test_deterministic(self, shipped):
        def run():
            env = make_env(shipped, target_mode="sampled", spin_hold=0.2, episode_len=300, seed=3)
            env.reset()
            rng = np.random.default_rng(8)
            out = []
            while True:
                res = env.step(rng.uniform(-1, 1, 3))
                out.append((res.observation.tobytes(), res.reward, res.terminated, res.truncated))
                if res.terminated or res.truncated:
                    return out

        assert run() == run()

    def test_angles_wrapped(self, shipped):
        env = make_env(shipped, episode_len=600)
        env.reset()
        for _ in range(600):
            res = env.step((0, 0, 0))
            assert -math.pi <= res.info["state"].mu < math.pi
        assert not res.terminated


def test_trajectory_csv(shipped, tmp_path):
    env = make_env(shipped, spin_hold=0.05, episode_len=20)
    env.reset()
    rows = []
    for _ in range(20):
        rows.append(trajectory_row(env.step((0.1, 0.2, 0.3))))
    path = tmp_path / "traj.csv"
    write_trajectory(str(path), rows)
    with open(path, newline="") as fh:
        table = list(csv.reader(fh))
    assert tuple(table[0]) == TRAJECTORY_HEADER
    assert len(table) == 21
    assert float(table[-1][0]) == pytest.approx(0.2)
    assert table[1][-1] in ("1", "2")


def test_scenario_json_round_trip():
    cfg = EnvConfig(spin_hold=2.0, hold_controls=ControlInput(0.1, 0.0, -0.2), target_mode="sampled")
    assert EnvConfig.from_json(cfg.to_json()) == cfg


def test_scenario_rejects_unknown_key():
    with pytest.raises(ConfigError, match="unknown"):
        EnvConfig.from_json({"dt": 0.01, "wind": 3})
