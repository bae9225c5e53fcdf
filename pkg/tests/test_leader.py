"""Reference paths, desired velocities, ramping, and acceleration bounds."""

import math

import numpy as np
import pytest

from formsim.leader import (
    ReferencePath,
    SingularPathError,
    advance_leader,
    desired_velocities,
    initial_leader_state,
    path_accel_bounds,
    path_position,
    ramped_accelerations,
    ramped_velocities,
)

SINE = ReferencePath(kind="paper_sine")
LINE = ReferencePath(kind="line", speed=1.0)
CIRCLE = ReferencePath(kind="circle", radius=2.0, speed=0.5)


class TestDesiredVelocities:
    def test_sine_path_at_zero(self):
        v, w = desired_velocities(SINE, 0.0)
        assert v == pytest.approx(1.0, abs=1e-12)
        assert w == pytest.approx(-1.0, abs=1e-12)

    def test_line(self):
        for t in (0.0, 1.7, 12.0):
            v, w = desired_velocities(LINE, t)
            assert v == pytest.approx(1.0) and w == 0.0

    def test_circle_curvature(self):
        for t in (0.0, 2.0, 9.0):
            v, w = desired_velocities(CIRCLE, t)
            assert v == pytest.approx(0.5, rel=1e-12)
            assert w == pytest.approx(0.5 / 2.0, rel=1e-12)

    def test_singular_point_rejected(self):
        stopped = ReferencePath(kind="line", speed=0.0)
        with pytest.raises(SingularPathError, match="singular"):
            desired_velocities(stopped, 1.0)

    def test_finite_difference_oracle(self):
        # Central differences of the path position reproduce v_d and w_d.
        # The second difference uses a larger step: at position magnitudes
        # of ~20 m the h^-2 rounding amplification dominates below ~1e-3.
        rng = np.random.default_rng(11)
        h1, h2 = 1e-5, 1e-3
        for path in (SINE, CIRCLE):
            for t in rng.uniform(0.5, 20.0, 100):
                t = float(t)
                xm, ym = path_position(path, t - h1)
                xp, yp = path_position(path, t + h1)
                xd, yd = (xp - xm) / (2 * h1), (yp - ym) / (2 * h1)
                xm2, ym2 = path_position(path, t - h2)
                x0, y0 = path_position(path, t)
                xp2, yp2 = path_position(path, t + h2)
                xdd = (xp2 - 2 * x0 + xm2) / h2**2
                ydd = (yp2 - 2 * y0 + ym2) / h2**2
                v_ref = math.hypot(xd, yd)
                w_ref = (ydd * xd - xdd * yd) / (xd * xd + yd * yd)
                v, w = desired_velocities(path, t)
                assert v == pytest.approx(v_ref, abs=1e-6)
                assert w == pytest.approx(w_ref, abs=1e-6)


class TestRamp:
    def test_starts_from_rest(self):
        for path in (SINE, LINE, CIRCLE):
            v, _ = ramped_velocities(path, 0.0)
            assert v == 0.0

    def test_ramp_value_at_half_second(self):
        v, _ = ramped_velocities(SINE, 0.5)
        v_d = math.sqrt(1.0 + math.sin(0.5) ** 2)
        assert v == pytest.approx(v_d * (1.0 - math.exp(-1.0)), rel=1e-12)

    def test_ramp_saturates(self):
        v, _ = ramped_velocities(LINE, 50.0)
        assert v == pytest.approx(1.0, rel=1e-9)

    def test_disabled_ramp(self):
        path = ReferencePath(kind="line", ramp_enabled=False)
        v, _ = ramped_velocities(path, 0.0)
        assert v == pytest.approx(1.0)

    def test_continuity(self):
        dt = 0.001
        prev, _ = ramped_velocities(SINE, 0.0)
        for k in range(1, 3000):
            v, _ = ramped_velocities(SINE, k * dt)
            assert abs(v - prev) < 3.0 * dt
            prev = v

    def test_rejects_non_positive_tau(self):
        with pytest.raises(ValueError, match="ramp_tau"):
            ReferencePath(kind="line", ramp_tau=0.0)


class TestAccelerations:
    def test_against_finite_differences(self):
        h = 1e-5
        for t in np.linspace(0.2, 25.0, 40):
            t = float(t)
            vm, wm = ramped_velocities(SINE, t - h)
            vp, wp = ramped_velocities(SINE, t + h)
            v_dot, w_dot = ramped_accelerations(SINE, t)
            assert v_dot == pytest.approx((vp - vm) / (2 * h), abs=1e-6)
            assert w_dot == pytest.approx((wp - wm) / (2 * h), abs=1e-6)

    def test_bounds_on_sine_path(self):
        iota1, iota2 = path_accel_bounds(SINE, 30.0)
        assert iota1 <= 2.0 + 1e-9
        assert iota2 <= 2.0 + 1e-9


class TestAdvance:
    def test_pose_integrates_current_velocity(self):
        path = ReferencePath(kind="line", ramp_enabled=False)
        state = initial_leader_state(path)
        out = advance_leader(state, path, 0.0, 0.1)
        assert out.x_r == pytest.approx(0.1)
        assert out.y_r == 0.0
        assert out.v_r == pytest.approx(1.0)

    def test_initial_state_on_path(self):
        state = initial_leader_state(SINE)
        assert (state.x_r, state.y_r) == (0.0, 3.0)
        assert state.theta_r == pytest.approx(0.0)
        assert state.v_r == 0.0
        assert state.omega_r == pytest.approx(-1.0)

    def test_spline_path_roundtrip(self):
        ts = tuple(np.linspace(0.0, 10.0, 8))
        path = ReferencePath(
            kind="waypoint_spline",
            waypoint_times=ts,
            waypoint_xs=tuple(float(t) for t in ts),
            waypoint_ys=tuple(math.sin(t) for t in ts),
        )
        state = initial_leader_state(path)
        t = 0.0
        for _ in range(200):
            state = advance_leader(state, path, t, 0.01)
            t += 0.01
        x_ref, y_ref = path_position(path, t)
        # Ramped start means the pose lags the nominal path slightly.
        assert abs(state.x_r - x_ref) < 0.6
        assert math.isfinite(state.v_r_dot) and math.isfinite(state.omega_r_dot)
