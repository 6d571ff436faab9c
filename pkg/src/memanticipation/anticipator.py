"""Bit anticipator: two mirrored resonators plus a tristate digitizer.

Branch 0 is the resonator in normal orientation and anticipates negative
pulses (bit 0); branch 1 has the device flipped and the offset source
inverted, and anticipates positive pulses (bit 1). Both branches see the
same input ``e(t)``.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import oscillator
from .device import MemristorState, Orientation
from .oscillator import BatchIntegrator, CircuitState, OscillatorParams
from .signals import PulseSpec, Waveform, _grid_index, unipolar_train

DEFAULT_U_D = 3.8
FIG6_E0 = 2.1
# Amplitudes used on the hardware board: bit 0 pulses at -1.9 V, bit 1 at +2.1 V.
MEASURED_E0 = (1.9, 2.1)


class SlotState(enum.Enum):
    NONE = "NONE"
    ZERO = "ZERO"
    ONE = "ONE"
    ERROR = "ERROR"


class ErrorPolicy(enum.Enum):
    IGNORE = "ignore"
    RESET = "reset"


class NotFound(RuntimeError):
    """No offset in the search range gives switching on exactly the n-th pulse."""


@dataclass(frozen=True)
class HardwareReadout:
    """Board-level digitizer: divider ``R2`` in series with the device, comparator at ``V_com``.

    Kept as a documented alternative; the ideal threshold digitizer is the default.
    """

    R2: float = 10e3
    V_com: float = -0.1

    def voltage(self, u, M):
        return np.asarray(u) * self.R2 / (self.R2 + np.asarray(M))


HARDWARE = HardwareReadout()


def classify_slot(osc0: bool, osc1: bool) -> SlotState:
    if osc0 and osc1:
        return SlotState.ERROR
    if osc0:
        return SlotState.ZERO
    if osc1:
        return SlotState.ONE
    return SlotState.NONE


def trailing_max(x, w: int) -> np.ndarray:
    """Maximum over the trailing window ``x[..., k-w+1 : k+1]`` for every ``k``.

    Uses the van Herk/Gil-Werman block decomposition, linear in ``len(x)``.
    The window is truncated at the start of the record.
    """
    x = np.asarray(x, dtype=float)
    if w < 1:
        raise ValueError("window must hold at least one sample")
    n = x.shape[-1]
    lead = np.full(x.shape[:-1] + (w - 1,), -np.inf)
    y = np.concatenate([lead, x], axis=-1)
    tail = (-y.shape[-1]) % w
    if tail:
        y = np.concatenate([y, np.full(x.shape[:-1] + (tail,), -np.inf)], axis=-1)
    blocks = y.reshape(x.shape[:-1] + (-1, w))
    g = np.maximum.accumulate(blocks, axis=-1).reshape(y.shape)
    h = np.maximum.accumulate(blocks[..., ::-1], axis=-1)[..., ::-1].reshape(y.shape)
    return np.maximum(h[..., :n], g[..., w - 1 : w - 1 + n])


def envelope(u, dt: float, T_r: float) -> np.ndarray:
    return trailing_max(np.abs(u), window_samples(dt, T_r))


def window_samples(dt: float, T_r: float) -> int:
    return max(1, int(round(T_r / dt)))


def detect_oscillation(u, dt: float, T_r: float, U_d: float) -> np.ndarray:
    """Per-sample flag: trailing ``T_r`` peak of ``|u|`` exceeds ``U_d``.

    This is a magnitude rule; a DC level above ``U_d`` also reads as oscillating.
    """
    u = np.asarray(u, dtype=float)
    if u.shape[-1] * dt < T_r * (1 - 1e-9):
        raise ValueError("segment shorter than one ringing period")
    return envelope(u, dt, T_r) > U_d


def count_pulses(flags, start: int = 0, stop: int | None = None) -> int:
    """Number of contiguous high runs of a boolean record within ``[start, stop)``."""
    f = np.asarray(flags, dtype=bool)[start:stop].astype(np.int8)
    if f.size == 0:
        return 0
    return int(f[0] + np.count_nonzero(np.diff(f) == 1))


@dataclass(frozen=True)
class BitAnticipator:
    """Two mirrored anticipation two-ports sharing R, L, C and offset magnitude.

    ``states`` holds the (branch 0, branch 1) circuit states; ``None`` means
    both branches rest at their DC operating point with the device off.
    """

    params: OscillatorParams = field(default_factory=OscillatorParams)
    U_d: float = DEFAULT_U_D
    error_policy: ErrorPolicy = ErrorPolicy.IGNORE
    states: tuple | None = None

    def __post_init__(self):
        if not self.U_d > 0:
            raise ValueError("digitization threshold must be positive")
        if self.params.orientation is not Orientation.NORMAL:
            object.__setattr__(self, "params", replace(self.params, orientation=Orientation.NORMAL))
        if isinstance(self.error_policy, str):
            object.__setattr__(self, "error_policy", ErrorPolicy(self.error_policy))

    @property
    def branch0(self) -> OscillatorParams:
        return self.params

    @property
    def branch1(self) -> OscillatorParams:
        return self.params.mirrored()

    @property
    def T_r(self) -> float:
        return oscillator.nominal(self.params).T_r

    def initial_states(self) -> tuple[CircuitState, CircuitState]:
        if self.states is not None:
            return self.states
        return oscillator.equilibrium(self.branch0), oscillator.equilibrium(self.branch1)

    def with_states(self, s0: CircuitState, s1: CircuitState) -> "BitAnticipator":
        return replace(self, states=(s0, s1))


def reset_states(anticipator: BitAnticipator, t: float = 0.0) -> tuple[CircuitState, CircuitState]:
    M_off = anticipator.params.memristor.M_off
    return (
        CircuitState(0.0, 0.0, MemristorState(M_off, Orientation.NORMAL), t),
        CircuitState(0.0, 0.0, MemristorState(M_off, Orientation.FLIPPED), t),
    )


def apply_error_policy(anticipator: BitAnticipator, state: SlotState, t: float = 0.0) -> BitAnticipator:
    """React to a slot classification. Only ERROR under the reset policy changes anything."""
    if state is SlotState.ERROR and anticipator.error_policy is ErrorPolicy.RESET:
        return anticipator.with_states(*reset_states(anticipator, t))
    return anticipator


@dataclass
class BankResult:
    """Raw batched run. Arrays have shape ``(pixels, n + 1)``; index 0 is the initial state."""

    t: np.ndarray
    u0: np.ndarray
    u1: np.ndarray
    M0: np.ndarray
    M1: np.ndarray
    i0: np.ndarray | None
    i1: np.ndarray | None
    slot_times: tuple
    slot_ends: np.ndarray  # trajectory index at which each slot is judged
    env0: np.ndarray  # (pixels, slots) peak |u0| over the slot's trailing window
    env1: np.ndarray
    states: list  # per slot: list of SlotState per pixel


def run_bank(
    anticipator: BitAnticipator,
    E: np.ndarray,
    dt: float,
    slot_times: Sequence[float] = (),
    spacing: float | None = None,
    initial: tuple | None = None,
    record_current: bool = True,
) -> BankResult:
    """Drive ``len(E)`` identical bit anticipators, pixel ``p`` with ``E[p]``.

    Each slot is judged at ``t_mu + spacing`` (default one ringing period)
    from the trailing-window envelopes of both outputs. With the reset error
    policy, pixels judged ERROR restart from the reset state right there.
    """
    E = np.atleast_2d(np.asarray(E, dtype=float))
    P, n = E.shape
    T_r = anticipator.T_r
    spacing = T_r if spacing is None else spacing
    w = window_samples(dt, T_r)
    U_d = anticipator.U_d

    if initial is None:
        s0, s1 = anticipator.initial_states()
        initial = tuple([s0] * P), tuple([s1] * P)
    init0, init1 = initial
    signs = np.concatenate([np.ones(P), -np.ones(P)])
    integ = BatchIntegrator(
        anticipator.params,
        signs,
        dt,
        [s.i_L for s in init0] + [s.i_L for s in init1],
        [s.u_C for s in init0] + [s.u_C for s in init1],
        [s.mem.M for s in init0] + [s.mem.M for s in init1],
    )

    I = np.empty((2 * P, n + 1)) if record_current else None
    V = np.empty((2 * P, n + 1))
    Ms = np.empty((2 * P, n + 1))
    if I is not None:
        I[:, 0] = integ.i_L
    V[:, 0] = integ.u_C
    Ms[:, 0] = integ.M

    ends = np.array([min(_grid_index(t + spacing, dt), n) for t in slot_times], dtype=int)
    order = np.argsort(ends, kind="stable")
    env0 = np.zeros((P, len(slot_times)))
    env1 = np.zeros((P, len(slot_times)))
    states: list = [None] * len(slot_times)

    E2 = np.concatenate([E, E], axis=0)
    pos = 0
    checkpoints = [(int(ends[j]), int(j)) for j in order] + [(n, -1)]
    for stop, j in checkpoints:
        if stop > pos:
            Iseg, Vseg, Mseg = integ.run(E2[:, pos:stop], record_current=record_current)
            if I is not None:
                I[:, pos + 1 : stop + 1] = Iseg
            V[:, pos + 1 : stop + 1] = Vseg
            Ms[:, pos + 1 : stop + 1] = Mseg
            pos = stop
        if j < 0:
            break
        lo = max(0, stop - w + 1)
        env0[:, j] = np.abs(V[:P, lo : stop + 1]).max(axis=1)
        env1[:, j] = np.abs(V[P:, lo : stop + 1]).max(axis=1)
        slot_states = [classify_slot(a > U_d, b > U_d) for a, b in zip(env0[:, j], env1[:, j])]
        states[j] = slot_states
        if anticipator.error_policy is ErrorPolicy.RESET:
            bad = np.array([s is SlotState.ERROR for s in slot_states])
            if bad.any():
                both = np.concatenate([bad, bad])
                integ.i_L = np.where(both, 0.0, integ.i_L)
                integ.u_C = np.where(both, 0.0, integ.u_C)
                integ.M = np.where(both, anticipator.params.memristor.M_off, integ.M)
                # the reset state is what the next sample continues from
                if I is not None:
                    I[:, stop] = integ.i_L
                V[:, stop] = integ.u_C
                Ms[:, stop] = integ.M

    t = dt * np.arange(n + 1)
    return BankResult(
        t=t,
        u0=V[:P],
        u1=V[P:],
        M0=Ms[:P],
        M1=Ms[P:],
        i0=None if I is None else I[:P],
        i1=None if I is None else I[P:],
        slot_times=tuple(slot_times),
        slot_ends=ends,
        env0=env0,
        env1=env1,
        states=states,
    )


@dataclass
class TristateOutput:
    slot_times: tuple
    states: list
    env0: np.ndarray
    env1: np.ndarray

    def lines(self) -> list[str]:
        return [f"{k},{s.value}" for k, s in enumerate(self.states)]

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("".join(line + "\n" for line in self.lines()))


@dataclass
class AnticipatorRun:
    t: np.ndarray
    e: np.ndarray
    u0: np.ndarray
    u1: np.ndarray
    M0: np.ndarray
    M1: np.ndarray
    i0: np.ndarray
    i1: np.ndarray
    output: TristateOutput
    anticipator: BitAnticipator  # carries the final branch states
    U_d: float
    dt: float

    @property
    def digital0(self) -> np.ndarray:
        return self.u0 <= -self.U_d

    @property
    def digital1(self) -> np.ndarray:
        return self.u1 >= self.U_d

    def index(self, t: float) -> int:
        return min(_grid_index(t, self.dt), len(self.t) - 1)

    def zero_pulses(self, t_start: float = 0.0) -> int:
        return count_pulses(self.digital0, self.index(t_start))

    def one_pulses(self, t_start: float = 0.0) -> int:
        return count_pulses(self.digital1, self.index(t_start))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t_s", "e_V", "u0_V", "u1_V", "M0_ohms", "M1_ohms", "digital0", "digital1"])
            d0 = self.digital0.astype(int)
            d1 = self.digital1.astype(int)
            for k in range(len(self.t)):
                w.writerow(
                    [
                        repr(float(self.t[k])),
                        repr(float(self.e[k])),
                        repr(float(self.u0[k])),
                        repr(float(self.u1[k])),
                        repr(float(self.M0[k])),
                        repr(float(self.M1[k])),
                        int(d0[k]),
                        int(d1[k]),
                    ]
                )


def run(
    anticipator: BitAnticipator,
    excitation: Waveform,
    dt: float | None = None,
    slot_times: Sequence[float] | None = None,
) -> AnticipatorRun:
    """Feed one source waveform to both branches and classify every slot.

    Slots default to the excitation's own schedule; pass ``slot_times`` to
    also judge slots where no pulse is applied.
    """
    values, dt = oscillator.sample_excitation(excitation, dt)
    if slot_times is None:
        slot_times = getattr(excitation, "slot_times", ())
    s0, s1 = anticipator.initial_states()
    res = run_bank(anticipator, values[None, :], dt, slot_times, initial=((s0,), (s1,)))
    n = len(values)
    e = np.append(values, values[-1] if n else 0.0)
    states = [s[0] for s in res.states]
    t_end = s0.t + dt * n
    final = anticipator.with_states(
        CircuitState(float(res.i0[0, -1]), float(res.u0[0, -1]), MemristorState(float(res.M0[0, -1]), Orientation.NORMAL), t_end),
        CircuitState(float(res.i1[0, -1]), float(res.u1[0, -1]), MemristorState(float(res.M1[0, -1]), Orientation.FLIPPED), t_end),
    )
    return AnticipatorRun(
        t=s0.t + res.t,
        e=e,
        u0=res.u0[0],
        u1=res.u1[0],
        M0=res.M0[0],
        M1=res.M1[0],
        i0=res.i0[0],
        i1=res.i1[0],
        output=TristateOutput(tuple(slot_times), states, res.env0[0], res.env1[0]),
        anticipator=final,
        U_d=anticipator.U_d,
        dt=dt,
    )


@dataclass(frozen=True)
class Calibration:
    offset: float
    degenerate: bool = False


def _switches(params: OscillatorParams, e0: float, pulses: int, offset: float, dt: float) -> bool:
    p = replace(params, U_offset=offset, orientation=Orientation.NORMAL)
    T_r = oscillator.nominal(p).T_r
    slots = [0.5 * T_r + k * T_r for k in range(pulses)]
    duration = 0.5 * T_r + (pulses + 1) * T_r
    wave = unipolar_train(PulseSpec(e0, 0.5 * T_r, tuple(slots)), dt, duration)
    traj = oscillator.simulate(p, None, wave, dt)
    return bool(traj.M.min() <= 2 * p.memristor.M_on)


def calibrate_offset(
    params: OscillatorParams,
    e0: float = FIG6_E0,
    n: int = 3,
    u_max: float | None = None,
    tol: float = 1e-3,
    dt: float | None = None,
) -> Calibration:
    """Smallest offset for which ``n`` resonant training pulses switch the bit-0 branch and ``n - 1`` do not.

    Switching means the memristance falls to at most ``2*M_on``. Switching is
    assumed monotone in the offset. If ``n - 1`` pulses already switch with no
    offset, the drive is too strong to tune: the result is 0 and flagged
    ``degenerate``. Raises NotFound if no offset in ``[0, u_max]`` (default
    ``U_on``) works.
    """
    if n < 1:
        raise ValueError("need at least one training pulse")
    dt = oscillator.dt_max(params) if dt is None else dt
    u_max = params.memristor.U_on if u_max is None else u_max

    def ok(pulses, offset):
        return _switches(params, e0, pulses, offset, dt)

    if ok(n, 0.0):
        return Calibration(0.0, degenerate=ok(n - 1, 0.0))
    if not ok(n, u_max):
        raise NotFound(f"{n} pulses of {e0} V never switch for offsets up to {u_max} V")
    lo, hi = 0.0, u_max
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(n, mid):
            hi = mid
        else:
            lo = mid
    if ok(n - 1, hi):
        raise NotFound(f"offset {hi:.4g} V switches after {n - 1} pulses already")
    return Calibration(hi)


def training_excitation(
    anticipator: BitAnticipator,
    train_bits: Sequence[int],
    test_bits: Sequence[int],
    e0=FIG6_E0,
    dt: float | None = None,
    gap_periods: float = 3.0,
    tail_periods: float = 3.0,
):
    """Bit train for a training burst followed by a test burst at ``T_r`` spacing.

    Returns ``(waveform, probe_slots)`` where the probe slots extend the test
    burst by the slots at which the missing pulses would have arrived.
    """
    from .signals import BitPattern, bit_train, schedule

    T_r = anticipator.T_r
    dt = oscillator.dt_max(anticipator.params) if dt is None else dt
    times = schedule(T_r, len(train_bits), len(test_bits), gap=gap_periods * T_r)
    pattern = BitPattern(tuple(train_bits) + tuple(test_bits), times)
    last = times[-1] if times else 0.0
    duration = last + tail_periods * T_r + T_r
    wave = bit_train(pattern, e0, 0.5 * T_r, dt, duration)
    n_probe = max(0, int(math.floor(tail_periods)))
    probes = tuple(times) + tuple(last + k * T_r for k in range(1, n_probe + 1))
    return wave, probes
