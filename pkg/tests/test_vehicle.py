"""Differential-drive truth model: kinematics, dynamics, disturbances."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from formsim.angles import wrap_angle
from formsim.vehicle import (
    DisturbanceModel,
    RobotState,
    TorquePair,
    VehicleParams,
    dynamics_step,
    kinematics_step,
    kinematics_step_rk4,
    sample_disturbance,
)

PARAMS = VehicleParams(mass=10.0, inertia=5.0, wheel_radius=0.1, half_axle=0.25)


class TestWrapAngle:
    def test_half_turn_stays(self):
        assert wrap_angle(math.pi) == pytest.approx(math.pi)

    def test_negative_half_turn_maps_to_positive(self):
        assert wrap_angle(-math.pi) == pytest.approx(math.pi)

    @given(st.floats(-50.0, 50.0))
    def test_range_and_equivalence(self, a):
        w = wrap_angle(a)
        assert -math.pi < w <= math.pi
        assert math.isclose(math.sin(w), math.sin(a), abs_tol=1e-9)
        assert math.isclose(math.cos(w), math.cos(a), abs_tol=1e-9)


class TestKinematics:
    def test_straight_line(self):
        x, y, theta = kinematics_step((0.0, 0.0, 0.0), v=1.0, omega=0.0, dt=1.0)
        assert (x, y, theta) == (1.0, 0.0, 0.0)

    def test_heading_wraps(self):
        _, _, theta = kinematics_step((0.0, 0.0, math.pi / 2), v=0.0, omega=math.pi, dt=1.0)
        assert theta == pytest.approx(-math.pi / 2)

    def test_arc_against_closed_form(self):
        # Constant (v, omega) traces a circular arc: exact endpoint known.
        pose = (0.0, 0.0, 0.0)
        dt = 0.01
        for _ in range(100):
            pose = kinematics_step(pose, v=1.0, omega=1.0, dt=dt)
        exact = (math.sin(1.0), 1.0 - math.cos(1.0))
        assert pose[0] == pytest.approx(exact[0], abs=0.02)
        assert pose[1] == pytest.approx(exact[1], abs=0.02)

    def test_euler_first_order_convergence(self):
        # Halving dt halves the one-second endpoint error.
        def endpoint_error(dt):
            pose = (0.0, 0.0, 0.5)
            steps = int(round(1.0 / dt))
            for _ in range(steps):
                pose = kinematics_step(pose, v=1.3, omega=0.8, dt=dt)
            xe = 0.0 + 1.3 / 0.8 * (math.sin(0.5 + 0.8) - math.sin(0.5))
            ye = 0.0 - 1.3 / 0.8 * (math.cos(0.5 + 0.8) - math.cos(0.5))
            return math.hypot(pose[0] - xe, pose[1] - ye)

        errors = [endpoint_error(dt) for dt in (0.02, 0.01, 0.005)]
        for coarse, fine in zip(errors, errors[1:]):
            assert coarse / fine == pytest.approx(2.0, rel=0.15)

    def test_rk4_much_more_accurate_than_euler(self):
        dt = 0.01
        p_euler = p_rk4 = (0.0, 0.0, 0.0)
        for _ in range(100):
            p_euler = kinematics_step(p_euler, 1.0, 1.0, dt)
            p_rk4 = kinematics_step_rk4(p_rk4, 1.0, 1.0, dt)
        exact = (math.sin(1.0), 1.0 - math.cos(1.0))
        err_e = math.hypot(p_euler[0] - exact[0], p_euler[1] - exact[1])
        err_r = math.hypot(p_rk4[0] - exact[0], p_rk4[1] - exact[1])
        assert err_r < err_e / 1000.0


class TestDynamics:
    def test_rest_stays_at_rest(self):
        s = RobotState(1.0, 2.0, 0.3, 0.0, 0.0)
        out = dynamics_step(s, TorquePair(0.0, 0.0), PARAMS, (0.0, 0.0), 0.01)
        assert out == RobotState(1.0, 2.0, 0.3, 0.0, 0.0)

    def test_equal_torques_accelerate_linear_only(self):
        params = VehicleParams(mass=1.0, inertia=1.0, wheel_radius=1.0, half_axle=0.5)
        s = RobotState(0.0, 0.0, 0.0, 0.0, 0.2)
        out = dynamics_step(s, TorquePair(0.5, 0.5), params, (0.0, 0.0), 0.1)
        assert out.v == pytest.approx(0.1, abs=1e-15)
        assert out.omega == 0.2

    def test_opposite_torques_accelerate_angular_only(self):
        params = VehicleParams(mass=1.0, inertia=1.0, wheel_radius=1.0, half_axle=0.5)
        s = RobotState(0.0, 0.0, 0.0, 0.7, 0.0)
        out = dynamics_step(s, TorquePair(-1.0, 1.0), params, (0.0, 0.0), 0.1)
        assert out.omega == pytest.approx(0.1, abs=1e-15)
        assert out.v == 0.7

    def test_pose_advances_with_prestep_velocity(self):
        s = RobotState(0.0, 0.0, 0.0, 2.0, 0.0)
        out = dynamics_step(s, TorquePair(5.0, 5.0), PARAMS, (0.0, 0.0), 0.1)
        assert out.x == pytest.approx(0.2)
        assert out.v > 2.0

    def test_disturbance_enters_velocities(self):
        s = RobotState(0.0, 0.0, 0.0, 0.0, 0.0)
        out = dynamics_step(s, TorquePair(0.0, 0.0), PARAMS, (1.0, 0.5), 0.1)
        assert out.v == pytest.approx(0.1 * 1.0 / PARAMS.mass)
        assert out.omega == pytest.approx(0.1 * 0.5 / PARAMS.inertia)

    def test_rejects_non_finite(self):
        s = RobotState(0.0, 0.0, 0.0, math.nan, 0.0)
        with pytest.raises(ValueError, match="finite"):
            dynamics_step(s, TorquePair(0.0, 0.0), PARAMS, (0.0, 0.0), 0.01)

    def test_rejects_bad_params(self):
        with pytest.raises(ValueError, match="mass"):
            VehicleParams(mass=0.0, inertia=1.0, wheel_radius=0.1, half_axle=0.2)


class TestDisturbance:
    def test_zero(self):
        model = DisturbanceModel(bound_linear=1.0, bound_angular=1.0, waveform="zero")
        assert sample_disturbance(model, 3.0) == (0.0, 0.0)

    def test_constant_returns_bounds(self):
        model = DisturbanceModel(bound_linear=0.3, bound_angular=0.2, waveform="constant")
        assert sample_disturbance(model, 0.0) == (0.3, 0.2)

    def test_sinusoid_bounded_by_amplitude(self):
        model = DisturbanceModel(
            bound_linear=1.0, bound_angular=1.0, waveform="sinusoid", amplitude=0.5, frequency=2.0
        )
        for t in np.linspace(0, 10, 100):
            d1, d2 = sample_disturbance(model, float(t))
            assert abs(d1) <= 0.5 and abs(d2) <= 0.5

    def test_samples_never_exceed_bounds_bulk(self):
        rng = np.random.default_rng(7)
        waveforms = ("zero", "constant", "sinusoid")
        for _ in range(200):
            model = DisturbanceModel(
                bound_linear=float(rng.uniform(0, 2)),
                bound_angular=float(rng.uniform(0, 2)),
                waveform=waveforms[rng.integers(3)],
                amplitude=float(rng.uniform(0, 5)),
                frequency=float(rng.uniform(0.1, 10)),
                phase=float(rng.uniform(-3, 3)),
            )
            for t in rng.uniform(0, 100, 500):
                d1, d2 = sample_disturbance(model, float(t))
                assert abs(d1) <= model.bound_linear + 1e-12
                assert abs(d2) <= model.bound_angular + 1e-12
