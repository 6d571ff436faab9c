import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memanticipation import glyphs, oscillator, signals
from memanticipation.signals import BitPattern, FrameSequence, PulseSpec

T_R = oscillator.nominal(oscillator.FIG6).T_r
DT = oscillator.dt_max(oscillator.FIG6)
W = 0.5 * T_R


class TestPulseSpec:
    @pytest.mark.parametrize("slots,width", [((0.0,), 0.0), ((0.0, W / 2), W), ((1.0, 0.0), W)])
    def test_invalid(self, slots, width):
        with pytest.raises(ValueError):
            PulseSpec(2.1, width, slots)

    def test_back_to_back_allowed(self):
        PulseSpec(2.1, W, (0.0, W))


class TestUnipolar:
    def test_single_pulse(self):
        w = signals.unipolar_train(PulseSpec(2.1, W, (0.0,)), DT, 2 * T_R)
        assert w.at(T_R / 4) == -2.1
        assert w.at(T_R) == 0.0

    def test_empty(self):
        w = signals.unipolar_train(PulseSpec(2.1, W, ()), DT, T_R)
        assert w.n > 0 and np.all(w.values == 0)

    def test_three_pulses_active_time(self):
        w = signals.unipolar_train(PulseSpec(2.1, W, (0.0, T_R, 2 * T_R)), DT, 4 * T_R)
        assert np.count_nonzero(w.values) * DT == pytest.approx(3 * W, rel=1e-9)
        np.testing.assert_array_equal(w.active_mask(), w.values != 0)

    def test_default_duration_covers_ringing(self):
        w = signals.unipolar_train(PulseSpec(2.1, W, (0.0, T_R)), DT)
        assert w.duration >= T_R + 2 * W


class TestBitTrain:
    def test_zeros_equal_unipolar(self):
        slots = (0.0, T_R, 2 * T_R)
        a = signals.bit_train(BitPattern((0, 0, 0), slots), 2.1, W, DT, 4 * T_R)
        b = signals.unipolar_train(PulseSpec(2.1, W, slots), DT, 4 * T_R)
        np.testing.assert_array_equal(a.values, b.values)

    def test_one_is_positive(self):
        w = signals.bit_train(BitPattern((1,), (0.0,)), 2.1, W, DT, T_R)
        assert w.at(T_R / 4) == 2.1

    def test_asymmetric_amplitudes(self):
        w = signals.bit_train(BitPattern((0, 1), (0.0, T_R)), (1.9, 2.1), W, DT, 3 * T_R)
        assert w.at(T_R / 4) == -1.9
        assert w.at(T_R + T_R / 4) == 2.1

    def test_symbols(self):
        assert BitPattern((0, 1, 1), (0, 1, 2)).symbols == (-1, 1, 1)

    @pytest.mark.parametrize("bits,slots", [((0, 2), (0, 1)), ((0,), (0, 1))])
    def test_invalid_pattern(self, bits, slots):
        with pytest.raises(ValueError):
            BitPattern(bits, slots)

    @settings(max_examples=30)
    @given(st.lists(st.integers(0, 1), max_size=8))
    def test_zero_outside_slots(self, bits):
        slots = tuple(k * T_R for k in range(len(bits)))
        w = signals.bit_train(BitPattern(bits, slots), 2.1, W, DT)
        assert np.all(w.values[~w.active_mask()] == 0)
        assert np.all(np.abs(w.values[w.active_mask()]) == 2.1)


class TestEncodeFrames:
    def test_black_frame_is_bit0(self):
        fr = FrameSequence(np.zeros((1, 9, 5)), (0.0,))
        w = signals.encode_frames(fr, 2.1, W, DT, 2 * T_R)
        ref = signals.unipolar_train(PulseSpec(2.1, W, (0.0,)), DT, 2 * T_R)
        assert w.values.shape == (9, 5, ref.n)
        assert np.all(w.values == ref.values)

    def test_mid_gray_is_silent(self):
        fr = FrameSequence(np.full((1, 2, 2), 0.5), (0.0,))
        assert np.all(signals.encode_frames(fr, 2.1, W, DT, T_R).values == 0)

    def test_gray_is_affine(self):
        assert signals.gray_amplitude(0.75, 2.1) == pytest.approx(1.05)
        assert signals.gray_amplitude(0.25, (1.9, 2.1)) == pytest.approx(-0.95)

    def test_digit_structure(self):
        img = glyphs.glyph(3)
        slots = signals.schedule(T_R, 3, 2)
        w = signals.encode_frames(signals.repeat_frame(img, slots), 2.1, W, DT)
        assert w.values.reshape(45, -1).shape[0] == 45
        for t in slots:
            np.testing.assert_array_equal(w.at(t + W / 2), 2.1 * (2 * img - 1))

    @settings(max_examples=20)
    @given(st.lists(st.integers(0, 1), min_size=6, max_size=6), st.lists(st.integers(0, 1), min_size=6, max_size=6))
    def test_binary_frames_equal_pixelwise_bit_trains(self, f0, f1):
        frames = np.array([f0, f1], dtype=float).reshape(2, 2, 3)
        slots = (0.0, T_R)
        w = signals.encode_frames(FrameSequence(frames, slots), 2.1, W, DT, 3 * T_R)
        for y in range(2):
            for x in range(3):
                ref = signals.bit_train(BitPattern(frames[:, y, x].astype(int), slots), 2.1, W, DT, 3 * T_R)
                np.testing.assert_array_equal(w.values[y, x], ref.values)


class TestFrameSequence:
    def test_clamps(self):
        fr = FrameSequence(np.array([[[-1.0, 2.0]]]), (0.0,))
        assert fr.frames.min() == 0.0 and fr.frames.max() == 1.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            FrameSequence(np.zeros((2, 3, 3)), (0.0,))

    def test_schedule(self):
        s = signals.schedule(1.0, 3, 2)
        assert s == (0.5, 1.5, 2.5, 5.5, 6.5)


class TestNoise:
    def frames(self):
        return signals.repeat_frame(np.full((9, 5), 0.5), (0.0, 1.0, 2.0))

    def test_sigma_zero_identity(self):
        fr = self.frames()
        np.testing.assert_array_equal(signals.add_noise(fr, 0.0, 1).frames, fr.frames)

    def test_negative_sigma(self):
        with pytest.raises(ValueError):
            signals.add_noise(self.frames(), -0.1)

    def test_seeded_reproducible(self):
        a = signals.add_noise(self.frames(), 0.1, 7).frames
        b = signals.add_noise(self.frames(), 0.1, 7).frames
        assert a.tobytes() == b.tobytes()
        assert not np.array_equal(a, signals.add_noise(self.frames(), 0.1, 8).frames)

    def test_golden_values(self):
        # frozen regression values for seed 7
        a = signals.add_noise(self.frames(), 0.1, 7).frames
        np.testing.assert_allclose(a[0, 0, :3], GOLDEN_SEED7, rtol=0, atol=1e-15)

    def test_empirical_std(self):
        fr = signals.repeat_frame(np.full((100, 100), 0.5), (0.0,))
        noisy = signals.add_noise(fr, 0.1, 3).frames
        assert np.std(noisy) == pytest.approx(0.1, rel=0.05)
        assert np.all((noisy >= 0) & (noisy <= 1))


GOLDEN_SEED7 = [0.5001230153357482, 0.529874553750847, 0.47258621446377824]


class TestFailure:
    def base(self):
        return signals.repeat_frame(glyphs.glyph(3), signals.schedule(T_R, 3, 2))

    def test_replaces_only_that_slot(self):
        fr = self.base()
        out = signals.inject_failure(fr, 2, np.zeros((9, 5)))
        diff = [not np.array_equal(a, b) for a, b in zip(fr.frames, out.frames)]
        assert diff == [False, False, True, False, False]

    def test_inverted_flips_polarity(self):
        fr = self.base()
        out = signals.inject_failure(fr, 1, 1 - fr.frames[1])
        a = signals.encode_frames(fr, 2.1, W, DT)
        b = signals.encode_frames(out, 2.1, W, DT)
        t = fr.slot_times[1] + W / 2
        np.testing.assert_array_equal(b.at(t), -a.at(t))

    def test_involution(self):
        fr = self.base()
        out = signals.inject_failure(signals.inject_failure(fr, 2, np.zeros((9, 5))), 2, fr.frames[2])
        np.testing.assert_array_equal(out.frames, fr.frames)

    def test_bad_index(self):
        with pytest.raises(IndexError):
            signals.inject_failure(self.base(), 5, np.zeros((9, 5)))

    def test_bad_shape(self):
        with pytest.raises(ValueError):
            signals.inject_failure(self.base(), 0, np.zeros((5, 9)))
