import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memanticipation import device
from memanticipation.device import MemristorParams, MemristorState, Orientation
from oracles import f_direct

P = device.FIG6
volts = st.floats(-10, 10, allow_nan=False)
resist = st.floats(P.M_on, P.M_off, allow_nan=False)


def f_ref(M, u, p=P):
    return f_direct(M, u, p.beta, p.U_on, p.U_off, p.M_on, p.M_off)


class TestParams:
    def test_defaults_are_fig6(self):
        assert (P.M_on, P.M_off, P.U_on, P.U_off, P.beta) == (1e3, 0.5e9, 1.4, -0.1, 1e16)

    @pytest.mark.parametrize(
        "kw",
        [dict(M_on=0.0), dict(M_on=1e9), dict(U_on=-0.1), dict(U_off=0.2), dict(U_off=0.0), dict(beta=-1.0)],
    )
    def test_rejects_invalid(self, kw):
        with pytest.raises(ValueError):
            MemristorParams(**kw)

    def test_measured_presets(self):
        assert device.PRESETS["measured_left"].U_off == -0.2
        assert device.PRESETS["measured_right"].U_on == 1.9


class TestMemristance:
    @pytest.mark.parametrize("M", [0.5e9, 1e3])
    def test_returns_state(self, M):
        assert device.memristance(MemristorState(M)) == M

    def test_current_is_ohmic(self):
        assert device.current(MemristorState(1e3), 1.5) == pytest.approx(1.5e-3)


class TestStateDerivative:
    def test_dead_zone(self):
        assert device.state_derivative(MemristorState(1e6), 0.5, P) == 0.0

    def test_set_direction(self):
        assert device.state_derivative(MemristorState(1e6), 2.0, P) == pytest.approx(-6e15)

    def test_reset_direction(self):
        assert device.state_derivative(MemristorState(1e6), -0.5, P) == pytest.approx(4e15)

    def test_lower_bound_window(self):
        assert device.state_derivative(MemristorState(P.M_on), 2.0, P) == 0.0

    def test_upper_bound_window(self):
        assert device.state_derivative(MemristorState(P.M_off), -0.5, P) == 0.0

    def test_unit_step_zero(self):
        assert device.unit_step(0.0) == 0.0
        assert device.unit_step(1e-300) == 1.0

    @given(resist, volts)
    def test_matches_direct_formula(self, M, u):
        assert device.state_derivative(MemristorState(M), u, P) == pytest.approx(f_ref(M, u), rel=1e-12, abs=0)

    @given(resist, st.floats(P.U_off, P.U_on))
    def test_dead_zone_property(self, M, u):
        assert device.state_derivative(MemristorState(M), u, P) == 0.0

    @given(st.floats(P.M_on, P.M_off, exclude_min=True), st.floats(P.U_on, 10, exclude_min=True))
    def test_set_is_monotone(self, M, u):
        assert device.state_derivative(MemristorState(M), u, P) < 0

    @given(st.floats(P.M_on, P.M_off, exclude_max=True), st.floats(-10, P.U_off, exclude_max=True))
    def test_reset_is_monotone(self, M, u):
        assert device.state_derivative(MemristorState(M), u, P) > 0


class TestAdvance:
    def test_full_switch(self):
        s = device.advance_state(MemristorState(0.5e9), 2.0, 1.0, P)
        assert s.M == P.M_on

    def test_dead_zone_holds(self):
        assert device.advance_state(MemristorState(0.5e9), 0.0, 123.0, P).M == 0.5e9

    def test_clamps_above(self):
        assert device.advance_state(MemristorState(P.M_off), -5.0, 1.0, P).M == P.M_off

    def test_linear_slew_inside_bounds(self):
        # 1 ns at 2 V moves 6e6 ohm
        s = device.advance_state(MemristorState(1e8), 2.0, 1e-9, P)
        assert s.M == pytest.approx(1e8 - 6e6)

    def test_rejects_nonpositive_dt(self):
        with pytest.raises(ValueError):
            device.advance_state(MemristorState(1e8), 2.0, 0.0, P)

    def test_keeps_orientation(self):
        s = device.advance_state(MemristorState(1e8, Orientation.FLIPPED), 0.0, 1.0, P)
        assert s.orientation is Orientation.FLIPPED

    @settings(max_examples=50)
    @given(resist, st.lists(st.tuples(volts, st.floats(1e-12, 1e-3)), min_size=1, max_size=40))
    def test_clamp_invariant(self, M, steps):
        s = MemristorState(M)
        for u, dt in steps:
            s = device.advance_state(s, u, dt, P)
            assert P.M_on <= s.M <= P.M_off

    @settings(max_examples=50)
    @given(resist, st.lists(st.tuples(volts, st.floats(1e-12, 1e-6)), min_size=1, max_size=40))
    def test_orientation_antisymmetry(self, M, steps):
        normal, flipped = M, M
        for u, dt in steps:
            normal = device.advance(normal, device.device_voltage(-u, Orientation.NORMAL), dt, P)
            flipped = device.advance(flipped, device.device_voltage(u, Orientation.FLIPPED), dt, P)
            assert normal == flipped

    @given(resist, volts)
    def test_passive(self, M, u):
        assert u * device.current(MemristorState(M), u) >= 0


class TestIVSweep:
    def test_triangle_switches_at_thresholds(self):
        res = device.iv_sweep(P, device.triangle(2.0, -1.0, 3.0))
        on = np.argmax(res.M < P.M_off)
        assert res.u[on] == pytest.approx(P.U_on, abs=5e-3)
        off = on + np.argmax(res.M[on:] == P.M_off)
        assert res.u[off] == pytest.approx(P.U_off, abs=5e-3)
        assert res.full_hysteresis

    def test_pinched_at_origin(self):
        res = device.iv_sweep(P, device.triangle(2.0, -1.0, 3.0))
        assert np.all(res.i[res.u == 0] == 0)

    def test_loop_has_two_branches(self):
        res = device.iv_sweep(P, device.triangle(2.0, -1.0, 3.0))
        up = (res.t < 1.0) & (np.abs(res.u - 1.0) < 1e-3)
        down = (res.t > 1.0) & (res.t < 2.0) & (np.abs(res.u - 1.0) < 1e-3)
        assert res.i[down].min() > 100 * res.i[up].max()

    def test_subthreshold_is_linear(self):
        with pytest.warns(UserWarning):
            res = device.iv_sweep(P, device.triangle(1.0, -0.05, 3.0))
        assert not res.full_hysteresis
        np.testing.assert_allclose(res.i, res.u / P.M_off, rtol=1e-15, atol=0)

    def test_compliance_caps_on_branch(self):
        res = device.iv_sweep(P, device.triangle(2.0, -1.0, 3.0))
        k = np.argmin(np.abs(res.u - 1.5) + (res.t > 1.0) * 10)
        assert res.M[k] == P.M_on
        assert res.i[k] == pytest.approx(100e-6)

    def test_csv(self, tmp_path):
        res = device.iv_sweep(P, device.triangle(2.0, -1.0, 3.0), dt=0.1)
        path = tmp_path / "iv.csv"
        res.to_csv(path)
        rows = path.read_text().splitlines()
        assert rows[0] == "u_volts,i_amps,M_ohms"
        assert len(rows) == len(res.u) + 1

    def test_flipped_device_sees_negated_ramp(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            a = device.iv_sweep(P, device.triangle(2.0, -1.0), orientation=Orientation.FLIPPED)
            b = device.iv_sweep(P, [(t, -u) for t, u in device.triangle(2.0, -1.0)])
        np.testing.assert_array_equal(a.M, b.M)

    @pytest.mark.parametrize("pts", [[(0.0, 0.0)], [(0.0, 0.0), (0.0, 1.0)]])
    def test_bad_ramp(self, pts):
        with pytest.raises(ValueError):
            device.iv_sweep(P, pts)
