"""Voltage-controlled threshold memristor.

The state variable is the memristance itself. Between the two threshold
voltages the device is a constant resistor; above ``U_on`` it drifts towards
``M_on`` and below ``U_off`` towards ``M_off``, with a slew rate proportional
to the overdrive.
"""
from __future__ import annotations

import csv
import enum
import warnings
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np


class Orientation(enum.Enum):
    """Polarity of the device in its circuit. ``value`` is the voltage sign."""

    NORMAL = 1
    FLIPPED = -1

    @property
    def sign(self) -> int:
        return self.value


@dataclass(frozen=True)
class MemristorParams:
    """Threshold memristor parameters.

    Parameters
    ----------
    M_on, M_off : float
        Low and high ohmic bounds (ohm).
    U_on, U_off : float
        Set and reset threshold voltages (V), ``U_off < 0 < U_on``.
    beta : float
        Switching rate constant (ohm / (V s)). Zero freezes the device.
    """

    M_on: float = 1e3
    M_off: float = 0.5e9
    U_on: float = 1.4
    U_off: float = -0.1
    beta: float = 1e16

    def __post_init__(self):
        if not 0 < self.M_on < self.M_off:
            raise ValueError(f"need 0 < M_on < M_off, got {self.M_on}, {self.M_off}")
        if not self.U_off < 0 < self.U_on:
            raise ValueError(f"need U_off < 0 < U_on, got {self.U_off}, {self.U_on}")
        # beta == 0 is allowed: frozen-device runs used for linear checks
        if self.beta < 0:
            raise ValueError(f"beta must be non-negative, got {self.beta}")

    def frozen(self) -> "MemristorParams":
        return replace(self, beta=0.0)


# Simulation parameter set of the bit anticipator study.
FIG6 = MemristorParams()
# Measured Ag/TiO2-x/Al cells. The right-hand cell switches at -1.9 V / +0.2 V
# at its terminals; it is stored here in its own frame and is meant to be used
# with Orientation.FLIPPED.
MEASURED_LEFT = MemristorParams(U_on=1.4, U_off=-0.2)
MEASURED_RIGHT = MemristorParams(U_on=1.9, U_off=-0.2)

PRESETS = {
    "fig6": FIG6,
    "measured": MEASURED_LEFT,
    "measured_left": MEASURED_LEFT,
    "measured_right": MEASURED_RIGHT,
}


@dataclass(frozen=True)
class MemristorState:
    M: float
    orientation: Orientation = Orientation.NORMAL


def initial_state(params: MemristorParams, orientation=Orientation.NORMAL) -> MemristorState:
    return MemristorState(params.M_off, orientation)


def unit_step(x):
    """Unit step with ``step(0) == 0``."""
    return np.greater(x, 0).astype(float)


def device_voltage(u_terminal, orientation: Orientation):
    """Voltage seen by the device's switching physics for a terminal voltage."""
    return orientation.sign * u_terminal


def drive(u, params: MemristorParams):
    """Threshold drive ``g(u)``: zero in the dead zone, linear overdrive outside."""
    u = np.asarray(u, dtype=float)
    return params.beta * (
        unit_step(u - params.U_on) * (params.U_on - u) + unit_step(params.U_off - u) * (params.U_off - u)
    )


def derivative(M, u, params: MemristorParams):
    """Array form of dM/dt. Window terms stop the drift at the bounds."""
    M = np.asarray(M, dtype=float)
    u = np.asarray(u, dtype=float)
    window = unit_step(u) * unit_step(M - params.M_on) + unit_step(-u) * unit_step(params.M_off - M)
    return drive(u, params) * window


def advance(M, u, dt, params: MemristorParams):
    """Array form of :func:`advance_state`.

    For constant ``u`` the rate is constant until a bound is hit, so the
    exact solution is a linear slew followed by a clamp.
    """
    return np.clip(M + derivative(M, u, params) * dt, params.M_on, params.M_off)


def memristance(state: MemristorState) -> float:
    return state.M


def current(state: MemristorState, u: float) -> float:
    return u / state.M


def state_derivative(state: MemristorState, u: float, params: MemristorParams) -> float:
    """dM/dt for device voltage ``u`` given in the device's normal frame.

    A flipped device must be fed the negated terminal voltage; see
    :func:`device_voltage`.
    """
    return float(derivative(state.M, u, params))


def advance_state(state: MemristorState, u: float, dt: float, params: MemristorParams) -> MemristorState:
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    return replace(state, M=float(advance(state.M, u, dt, params)))


@dataclass
class IVSweep:
    """Result of a quasi-static current-voltage sweep."""

    t: np.ndarray
    u: np.ndarray
    i: np.ndarray
    M: np.ndarray
    full_hysteresis: bool

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["u_volts", "i_amps", "M_ohms"])
            for row in zip(self.u, self.i, self.M):
                writer.writerow([repr(float(v)) for v in row])


def ramp(points: Sequence[tuple[float, float]], dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Sample a piecewise-linear ``(time, voltage)`` breakpoint list every ``dt``."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
        raise ValueError("ramp needs at least two (time, voltage) breakpoints")
    if np.any(np.diff(pts[:, 0]) <= 0):
        raise ValueError("ramp breakpoint times must be strictly increasing")
    n = int(round((pts[-1, 0] - pts[0, 0]) / dt)) + 1
    t = pts[0, 0] + dt * np.arange(n)
    return t, np.interp(t, pts[:, 0], pts[:, 1])


def triangle(u_max: float, u_min: float, period: float = 3.0) -> list[tuple[float, float]]:
    """Breakpoints for 0 -> u_max -> u_min -> 0 with constant slew."""
    span = abs(u_max) + abs(u_max - u_min) + abs(u_min)
    t1 = period * abs(u_max) / span
    t2 = t1 + period * abs(u_max - u_min) / span
    return [(0.0, 0.0), (t1, u_max), (t2, u_min), (period, 0.0)]


def iv_sweep(
    params: MemristorParams,
    points: Sequence[tuple[float, float]],
    i_compliance: float = 100e-6,
    dt: float = 1e-3,
    orientation: Orientation = Orientation.NORMAL,
    M0: float | None = None,
) -> IVSweep:
    """Quasi-static i-u sweep with a current-compliance limited source meter.

    At every sample the device is first advanced under the applied voltage and
    then the (compliance-capped) current is recorded. A ramp that does not
    cross both thresholds yields a curve without hysteresis and a warning.
    """
    if i_compliance <= 0:
        raise ValueError("compliance current must be positive")
    t, u = ramp(points, dt)
    u_dev = device_voltage(u, orientation)
    crosses = bool(np.any(u_dev > params.U_on) and np.any(u_dev < params.U_off))
    if not crosses:
        warnings.warn("sweep does not cross both thresholds; no full hysteresis loop", stacklevel=2)

    M = np.empty_like(u)
    m = params.M_off if M0 is None else M0
    for k in range(len(u)):
        m = float(advance(m, u_dev[k], dt, params))
        M[k] = m
    i = np.minimum(np.abs(u) / M, i_compliance) * np.sign(u)
    return IVSweep(t=t, u=u, i=i, M=M, full_hysteresis=crosses)
