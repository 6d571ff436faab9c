"""Bit-array anticipator: one bit anticipator per pixel of an image sequence."""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import oscillator, pgm
from .anticipator import (
    FIG6_E0,
    BankResult,
    BitAnticipator,
    envelope,
    run_bank,
)
from .signals import FrameSequence, add_noise, encode_frames, inject_failure


@dataclass(frozen=True)
class AnticipatorBank:
    """A ``height x width`` grid of identically configured bit anticipators."""

    shape: tuple
    anticipator: BitAnticipator = field(default_factory=BitAnticipator)
    e0: object = FIG6_E0

    @property
    def T_r(self) -> float:
        return self.anticipator.T_r

    @property
    def U_d(self) -> float:
        return self.anticipator.U_d


@dataclass
class OutputFrame:
    t: float
    gray: np.ndarray  # (H, W) in [0, 1]
    states: np.ndarray | None = None  # (H, W) of SlotState, slot frames only

    def bits(self) -> np.ndarray:
        return quantize(self.gray)


def quantize(gray) -> np.ndarray:
    return (np.asarray(gray) > 0.5).astype(int)


def hamming(a, b) -> int:
    return int(np.count_nonzero(quantize(a) != quantize(b)))


def gray_out(env0, env1, u_scale: float):
    """Output gray from branch envelopes: bit-1 activity brightens, bit-0 darkens."""
    return np.clip(0.5 + (np.asarray(env1) - np.asarray(env0)) / (2.0 * u_scale), 0.0, 1.0)


@dataclass
class SequenceResult:
    frames: FrameSequence  # the input actually applied
    slot_frames: list
    fade_frames: list
    bank: BankResult
    dt: float

    @property
    def final(self) -> OutputFrame:
        return self.slot_frames[-1]

    def report_rows(self):
        for k, fr in enumerate(self.slot_frames):
            H, W = fr.gray.shape
            env0 = self.bank.env0[:, k].reshape(H, W)
            env1 = self.bank.env1[:, k].reshape(H, W)
            for y in range(H):
                for x in range(W):
                    yield (k, x, y, fr.states[y, x].value, env0[y, x], env1[y, x], fr.gray[y, x])

    def write_report(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["slot", "pixel_x", "pixel_y", "state", "env0_V", "env1_V", "gray_out"])
            for k, x, y, s, e0, e1, g in self.report_rows():
                w.writerow([k, x, y, s, repr(float(e0)), repr(float(e1)), repr(float(g))])

    def write_frames(self, directory, prefix: str = "output") -> list[Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = []
        for k, fr in enumerate(self.slot_frames):
            p = directory / f"{prefix}_slot_{k:03d}.pgm"
            pgm.write_pgm(p, fr.gray)
            paths.append(p)
        return paths

    def write_animation(self, directory, prefix: str = "anim") -> list[Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = []
        for k, fr in enumerate(self.fade_frames):
            p = directory / f"{prefix}_{k:05d}.pgm"
            pgm.write_pgm(p, fr.gray)
            paths.append(p)
        return paths


def _run_chunks(anticipator, E, dt, slot_times, workers):
    if workers <= 1 or len(E) < 2:
        return run_bank(anticipator, E, dt, slot_times, record_current=False)
    chunks = np.array_split(np.arange(len(E)), min(workers, len(E)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda idx: run_bank(anticipator, E[idx], dt, slot_times, record_current=False), chunks))
    # reassemble in pixel order, independent of completion order
    cat = lambda name: np.concatenate([getattr(r, name) for r in parts], axis=0)
    states = [sum((r.states[j] for r in parts), []) for j in range(len(slot_times))]
    first = parts[0]
    return BankResult(
        t=first.t,
        u0=cat("u0"),
        u1=cat("u1"),
        M0=cat("M0"),
        M1=cat("M1"),
        i0=None,
        i1=None,
        slot_times=first.slot_times,
        slot_ends=first.slot_ends,
        env0=cat("env0"),
        env1=cat("env1"),
        states=states,
    )


def run_sequence(
    bank: AnticipatorBank,
    frames: FrameSequence,
    dt: float | None = None,
    frames_per_period: int = 8,
    tail_periods: float = 3.0,
    workers: int = 1,
) -> SequenceResult:
    """Drive the bank with an image sequence and reconstruct output frames.

    One output frame is judged at the end of every input slot; fade frames are
    additionally sampled ``frames_per_period`` times per ringing period over
    the whole run.
    """
    if tuple(frames.shape) != tuple(bank.shape):
        raise ValueError(f"frames are {frames.shape}, bank is {tuple(bank.shape)}")
    ant = bank.anticipator
    T_r = bank.T_r
    dt = oscillator.dt_max(ant.params) if dt is None else dt
    last = frames.slot_times[-1] if len(frames) else 0.0
    duration = last + (tail_periods + 1) * T_r
    wave = encode_frames(frames, bank.e0, 0.5 * T_r, dt, duration)
    H, W = frames.shape
    E = wave.values.reshape(H * W, -1)

    res = _run_chunks(ant, E, dt, frames.slot_times, workers)

    slot_frames = []
    for j, t in enumerate(frames.slot_times):
        g = gray_out(res.env0[:, j], res.env1[:, j], ant.U_d).reshape(H, W)
        st = np.array(res.states[j], dtype=object).reshape(H, W)
        slot_frames.append(OutputFrame(t=float(res.t[res.slot_ends[j]]), gray=g, states=st))

    env0 = envelope(res.u0, dt, T_r)
    env1 = envelope(res.u1, dt, T_r)
    stride = max(1, int(round(T_r / frames_per_period / dt)))
    fade = [
        OutputFrame(t=float(res.t[k]), gray=gray_out(env0[:, k], env1[:, k], ant.U_d).reshape(H, W))
        for k in range(0, len(res.t), stride)
    ]
    return SequenceResult(frames=frames, slot_frames=slot_frames, fade_frames=fade, bank=res, dt=dt)


@dataclass
class NoiseReport:
    sigma: float
    seed: object
    input_hamming: list  # noisy input frame vs clean frame, per slot
    output_hamming: list  # output slot frame vs clean frame, per slot

    @property
    def final_hamming(self) -> int:
        return self.output_hamming[-1]


def run_noisy(bank, frames: FrameSequence, sigma: float, seed=None, dt=None, **kw):
    noisy = add_noise(frames, sigma, seed)
    result = run_sequence(bank, noisy, dt, **kw)
    report = NoiseReport(
        sigma=sigma,
        seed=seed,
        input_hamming=[hamming(a, b) for a, b in zip(noisy.frames, frames.frames)],
        output_hamming=[hamming(fr.gray, ref) for fr, ref in zip(result.slot_frames, frames.frames)],
    )
    return result, report


@dataclass
class FailureReport:
    slot_index: int
    output_hamming: list  # output slot frame vs clean frame, per slot

    @property
    def final_hamming(self) -> int:
        return self.output_hamming[-1]

    @property
    def post_failure_hamming(self) -> list:
        return self.output_hamming[self.slot_index + 1 :]


def run_with_failure(bank, frames: FrameSequence, slot_index: int, failure_frame=None, dt=None, **kw):
    """Replace one input frame by a failure image; the default failure is the inverted frame."""
    if not 0 <= slot_index < len(frames):
        raise IndexError(f"slot {slot_index} out of range for {len(frames)} frames")
    if failure_frame is None:
        failure_frame = 1.0 - frames.frames[slot_index]
    disturbed = inject_failure(frames, slot_index, failure_frame)
    result = run_sequence(bank, disturbed, dt, **kw)
    report = FailureReport(
        slot_index=slot_index,
        output_hamming=[hamming(fr.gray, ref) for fr, ref in zip(result.slot_frames, frames.frames)],
    )
    return result, report


def demo_sequence(image, T_r: float, n_train: int = 3, n_test: int = 2, gap_periods: float = 3.0) -> FrameSequence:
    """The training-then-repeat schedule used in the image demonstrations."""
    from .signals import repeat_frame, schedule

    return repeat_frame(image, schedule(T_r, n_train, n_test, gap=gap_periods * T_r))
