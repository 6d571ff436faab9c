"""Excitation waveforms: pulse trains, bit trains and encoded image sequences."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


def _grid_index(t: float, dt: float) -> int:
    """First sample index ``k`` with ``k*dt >= t`` (robust to round-off)."""
    x = t / dt
    r = round(x)
    if abs(x - r) < 1e-6:
        return int(r)
    return int(math.ceil(x))


@dataclass
class Waveform:
    """Uniformly sampled source voltage; the last axis of ``values`` is time.

    ``values[..., k]`` is held over ``[k*dt, (k+1)*dt)``. ``slot_times`` and
    ``width`` record the pulse schedule the waveform was built from.
    """

    values: np.ndarray
    dt: float
    slot_times: tuple = ()
    width: float = 0.0

    @property
    def n(self) -> int:
        return self.values.shape[-1]

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.n)

    @property
    def duration(self) -> float:
        return self.n * self.dt

    def at(self, t: float):
        k = int(math.floor(t / self.dt + 1e-9))
        if not 0 <= k < self.n:
            return np.zeros(self.values.shape[:-1]) if self.values.ndim > 1 else 0.0
        return self.values[..., k]

    def active_mask(self) -> np.ndarray:
        """Boolean mask of samples inside any slot window."""
        mask = np.zeros(self.n, dtype=bool)
        for k0, k1 in slot_ranges(self.slot_times, self.width, self.dt, self.n):
            mask[k0:k1] = True
        return mask


def slot_ranges(slot_times, width, dt, n):
    for t in slot_times:
        k0 = _grid_index(t, dt)
        k1 = _grid_index(t + width, dt)
        yield max(k0, 0), min(k1, n)


def _check_slots(slot_times, width):
    if width <= 0:
        raise ValueError("pulse width must be positive")
    ts = np.asarray(slot_times, dtype=float)
    if len(ts) > 1 and np.any(np.diff(ts) < width * (1 - 1e-9)):
        raise ValueError("slots must be increasing and spaced by at least the pulse width")


@dataclass(frozen=True)
class PulseSpec:
    """Unipolar train of rectangular pulses of amplitude ``-e0``."""

    e0: float
    width: float
    slot_times: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "slot_times", tuple(float(t) for t in self.slot_times))
        _check_slots(self.slot_times, self.width)


@dataclass(frozen=True)
class BitPattern:
    bits: tuple
    slot_times: tuple

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))
        object.__setattr__(self, "slot_times", tuple(float(t) for t in self.slot_times))
        if len(self.bits) != len(self.slot_times):
            raise ValueError("bits and slot_times differ in length")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("bits must be 0 or 1")

    @property
    def symbols(self) -> tuple:
        return tuple(2 * b - 1 for b in self.bits)


@dataclass
class FrameSequence:
    """Timed grayscale frames, shape ``(n_frames, height, width)``, values in [0, 1]."""

    frames: np.ndarray
    slot_times: tuple = field(default=())

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=float)
        if frames.ndim == 2:
            frames = frames[None]
        if frames.ndim != 3:
            raise ValueError("frames must be a stack of 2-D images")
        self.frames = np.clip(frames, 0.0, 1.0)
        self.slot_times = tuple(float(t) for t in self.slot_times)
        if len(self.slot_times) != len(self.frames):
            raise ValueError(f"{len(self.frames)} frames but {len(self.slot_times)} slot times")

    @property
    def shape(self) -> tuple[int, int]:
        return self.frames.shape[1], self.frames.shape[2]

    def __len__(self) -> int:
        return len(self.frames)

    def copy(self) -> "FrameSequence":
        return FrameSequence(self.frames.copy(), self.slot_times)


def schedule(
    spacing: float,
    n_train: int = 3,
    n_test: int = 2,
    gap: float | None = None,
    lead: float | None = None,
) -> tuple:
    """Slot times for a training burst followed by an incomplete test burst.

    ``gap`` is measured from the last training slot to the first test slot
    (default three spacings); ``lead`` is the quiet time before the first slot
    (default half a spacing).
    """
    gap = 3 * spacing if gap is None else gap
    lead = 0.5 * spacing if lead is None else lead
    times = [lead + k * spacing for k in range(n_train)]
    if n_test:
        start = (times[-1] + gap) if times else lead
        times += [start + k * spacing for k in range(n_test)]
    return tuple(times)


def _n_samples(slot_times, spacing, dt, duration):
    if duration is None:
        end = (slot_times[-1] if slot_times else 0.0) + 2 * spacing
        duration = end
    return _grid_index(duration, dt)


def _train(amplitudes, slot_times, width, dt, duration, spacing=None):
    _check_slots(slot_times, width)
    spacing = 2 * width if spacing is None else spacing
    n = _n_samples(slot_times, spacing, dt, duration)
    amplitudes = np.asarray(amplitudes, dtype=float)
    values = np.zeros(amplitudes.shape[:-1] + (n,)) if amplitudes.ndim > 1 else np.zeros(n)
    for j, (k0, k1) in enumerate(slot_ranges(slot_times, width, dt, n)):
        values[..., k0:k1] = amplitudes[..., j, None] if amplitudes.ndim > 1 else amplitudes[j]
    return Waveform(values, dt, tuple(slot_times), width)


def unipolar_train(spec: PulseSpec, dt: float, duration: float | None = None) -> Waveform:
    """Negative rectangular pulses ``-e0`` at the slot times, zero elsewhere."""
    return _train([-spec.e0] * len(spec.slot_times), spec.slot_times, spec.width, dt, duration)


def _split_amplitude(e0):
    if isinstance(e0, (tuple, list)):
        e_zero, e_one = e0
    else:
        e_zero = e_one = e0
    return abs(float(e_zero)), abs(float(e_one))


def bit_train(pattern: BitPattern, e0, width: float, dt: float, duration: float | None = None) -> Waveform:
    """Bipolar train: bit 0 -> ``-e0``, bit 1 -> ``+e0``.

    ``e0`` may be a ``(bit0_amplitude, bit1_amplitude)`` pair for asymmetric
    drive; magnitudes are used.
    """
    e_zero, e_one = _split_amplitude(e0)
    amps = [e_one if b else -e_zero for b in pattern.bits]
    return _train(amps, pattern.slot_times, width, dt, duration)


def gray_amplitude(gray, e0):
    """Affine gray-to-amplitude map: 0 -> bit-0 pulse, 1 -> bit-1 pulse, 0.5 -> 0."""
    e_zero, e_one = _split_amplitude(e0)
    x = 2.0 * np.asarray(gray, dtype=float) - 1.0
    return np.where(x >= 0, e_one * x, e_zero * x)


def encode_frames(frames: FrameSequence, e0, width: float, dt: float, duration: float | None = None) -> Waveform:
    """One waveform per pixel; ``values`` has shape ``(height, width, n)``."""
    amps = gray_amplitude(frames.frames, e0)  # (n_frames, H, W)
    amps = np.moveaxis(amps, 0, -1)  # (H, W, n_frames)
    return _train(amps, frames.slot_times, width, dt, duration)


def add_noise(frames: FrameSequence, sigma: float, seed=None) -> FrameSequence:
    """Zero-mean Gaussian gray-level noise, clamped to [0, 1]."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        return frames.copy()
    rng = np.random.default_rng(seed)
    noisy = frames.frames + rng.normal(0.0, sigma, size=frames.frames.shape)
    return FrameSequence(noisy, frames.slot_times)


def inject_failure(frames: FrameSequence, slot_index: int, failure_frame) -> FrameSequence:
    if not 0 <= slot_index < len(frames):
        raise IndexError(f"slot {slot_index} out of range for {len(frames)} frames")
    failure = np.asarray(failure_frame, dtype=float)
    if failure.shape != frames.shape:
        raise ValueError(f"failure frame shape {failure.shape} != {frames.shape}")
    out = frames.copy()
    out.frames[slot_index] = np.clip(failure, 0.0, 1.0)
    return out


def repeat_frame(image, slot_times: Sequence[float]) -> FrameSequence:
    image = np.asarray(image, dtype=float)
    return FrameSequence(np.repeat(image[None], len(slot_times), axis=0), tuple(slot_times))
