"""Shunting dynamics: bounds, equilibria, identities, low-pass behavior."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from formsim.shunting import ShuntingParams, ShuntingState, f_pos, g_neg, shunting_step

P = ShuntingParams(decay=4.0, upper=2.0, lower=2.0)


class TestSplit:
    @pytest.mark.parametrize("e,f,g", [(3.0, 3.0, 0.0), (-3.0, 0.0, 3.0), (0.0, 0.0, 0.0)])
    def test_values(self, e, f, g):
        assert f_pos(e) == f
        assert g_neg(e) == g

    @given(st.floats(-1e6, 1e6))
    def test_split_identity_exact(self, e):
        assert -e + f_pos(e) - g_neg(e) == 0.0


class TestStep:
    def test_zero_input_decays_at_passive_rate(self):
        state = ShuntingState(v_s=1.5)
        out = shunting_step(state, P, 0.0, 0.25)
        assert out.v_s == pytest.approx(1.5 * math.exp(-4.0 * 0.25), rel=1e-12)

    def test_zero_stays_zero(self):
        assert shunting_step(ShuntingState(0.0), P, 0.0, 0.1).v_s == 0.0

    def test_positive_equilibrium(self):
        # dV/dt = 0 with held input e gives V* = B e / (A + e) for e > 0.
        state = ShuntingState(0.0)
        for _ in range(400):
            state = shunting_step(state, P, 2.0, 0.01)
        assert state.v_s == pytest.approx(2.0 * 2.0 / (4.0 + 2.0), abs=1e-9)

    def test_negative_equilibrium(self):
        state = ShuntingState(0.0)
        for _ in range(400):
            state = shunting_step(state, P, -2.0, 0.01)
        assert state.v_s == pytest.approx(-2.0 * 2.0 / (4.0 + 2.0), abs=1e-9)

    def test_rejects_bad_dt(self):
        with pytest.raises(ValueError):
            shunting_step(ShuntingState(0.0), P, 1.0, 0.0)


class TestBoundedness:
    def test_bulk_random_sequences_stay_inside(self):
        # 100k updates across random parameter sets, inputs, and steps.
        rng = np.random.default_rng(42)
        for _ in range(100):
            params = ShuntingParams(
                decay=float(rng.uniform(0.1, 10)),
                upper=float(rng.uniform(0.1, 8)),
                lower=float(rng.uniform(0.1, 8)),
            )
            state = ShuntingState(float(rng.uniform(-params.lower, params.upper)))
            inputs = rng.normal(0.0, 50.0, 1000)
            steps = rng.uniform(1e-4, 5.0, 1000)
            for e, dt in zip(inputs, steps):
                state = shunting_step(state, params, float(e), float(dt))
                assert -params.lower <= state.v_s <= params.upper

    @given(
        st.floats(0.1, 10), st.floats(0.1, 8), st.floats(0.1, 8),
        st.floats(-1e3, 1e3), st.floats(1e-6, 100.0),
    )
    def test_single_step_stays_inside(self, a, b, d, e, dt):
        params = ShuntingParams(decay=a, upper=b, lower=d)
        out = shunting_step(ShuntingState(0.0), params, e, dt)
        assert -d <= out.v_s <= b


class TestSignFollowing:
    def test_positive_input_positive_output(self):
        state = ShuntingState(0.0)
        for _ in range(100):
            state = shunting_step(state, P, 1.0, 0.01)
        assert 0.0 < state.v_s <= P.upper

    def test_negative_input_negative_output(self):
        state = ShuntingState(0.0)
        for _ in range(100):
            state = shunting_step(state, P, -1.0, 0.01)
        assert -P.lower <= state.v_s < 0.0


class TestLowPass:
    def test_output_amplitude_non_increasing_in_frequency(self):
        def steady_amplitude(freq):
            dt = 0.005
            state = ShuntingState(0.0)
            values = []
            for k in range(int(40.0 / dt)):
                e = 2.0 * math.sin(2.0 * math.pi * freq * k * dt)
                state = shunting_step(state, P, e, dt)
                if k * dt > 20.0:
                    values.append(state.v_s)
            return max(values) - min(values)

        amps = [steady_amplitude(f) for f in (0.2, 1.0, 5.0)]
        assert amps[0] >= amps[1] >= amps[2]


class TestFineStepOracle:
    def test_exact_update_matches_fine_euler(self):
        # Reference: explicit Euler at dt/100 on the same piecewise-held
        # input sequence; agreement within 1e-4 over 10 s.  Inputs span the
        # controllers' operating range (the reference's own bias grows as
        # (A + |e|)^2, so unbounded inputs would test Euler, not the step).
        rng = np.random.default_rng(3)
        dt = 0.01
        inputs = rng.uniform(-3.0, 3.0, 1000)
        state = ShuntingState(0.0)
        v_ref = 0.0
        worst = 0.0
        for e in inputs:
            state = shunting_step(state, P, float(e), dt)
            f, g = f_pos(float(e)), g_neg(float(e))
            for _ in range(100):
                v_ref += (dt / 100.0) * (-P.decay * v_ref + (P.upper - v_ref) * f - (P.lower + v_ref) * g)
            worst = max(worst, abs(state.v_s - v_ref))
        assert worst < 1e-4
