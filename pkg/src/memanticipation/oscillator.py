"""Damped memristive resonator (the anticipation two-port).

State is the inductor current ``i_L`` and capacitor voltage ``u_C``; the
memristor sits in parallel with the capacitor and the series chain
``e(t) + U`` drives the R-L branch::

    di_L/dt = (e + s*U - R*i_L - u_C) / L
    du_C/dt = (i_L - u_C/M) / C

where ``s`` is the orientation sign. At fixed ``M`` the system is linear and
its eigenstructure, transfer function and rectangular-pulse response are
available in closed form.
"""
from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass, field, replace
from typing import Iterator, Sequence

import numpy as np

from . import device
from .device import MemristorParams, MemristorState, Orientation

STEPS_PER_PERIOD = 2000


class OverdampedError(ValueError):
    """Raised when the resonator has no ringing frequency for the given M."""


class StepTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class OscillatorParams:
    R: float = 100.0
    L: float = 100e-3
    C: float = 150e-9
    U_offset: float = 0.0
    memristor: MemristorParams = field(default_factory=MemristorParams)
    orientation: Orientation = Orientation.NORMAL

    def __post_init__(self):
        for name in ("R", "L", "C"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value}")

    @property
    def omega_0(self) -> float:
        return 1.0 / math.sqrt(self.L * self.C)

    @property
    def Z(self) -> float:
        return math.sqrt(self.L / self.C)

    @property
    def source_offset(self) -> float:
        """Offset voltage actually seen by the R-L chain (sign follows orientation)."""
        return self.orientation.sign * self.U_offset

    def mirrored(self) -> "OscillatorParams":
        flipped = Orientation.FLIPPED if self.orientation is Orientation.NORMAL else Orientation.NORMAL
        return replace(self, orientation=flipped)

    def with_memristor(self, **changes) -> "OscillatorParams":
        return replace(self, memristor=replace(self.memristor, **changes))


FIG6 = OscillatorParams()


@dataclass(frozen=True)
class CircuitState:
    i_L: float
    u_C: float
    mem: MemristorState
    t: float = 0.0


@dataclass(frozen=True)
class EigenStructure:
    gamma: float
    omega_r: float
    omega_0: float
    lam: complex
    T_r: float


def system_matrix(params: OscillatorParams, M: float) -> np.ndarray:
    return np.array(
        [[-params.R / params.L, -1.0 / params.L], [1.0 / params.C, -1.0 / (M * params.C)]]
    )


def eigen_analysis(params: OscillatorParams, M: float) -> EigenStructure:
    """Damping, ringing frequency and period at a frozen memristance.

    ``M`` may be ``math.inf`` (open device). Raises OverdampedError when the
    eigenvalues are real.
    """
    if not M > 0:
        raise ValueError(f"memristance must be positive, got {M}")
    w0 = params.omega_0
    # gamma = w0/2 (r + 1/m) with r = R/Z, m = M/Z, written without Z
    gamma = params.R / (2 * params.L) + 1.0 / (2 * M * params.C)
    wr2 = w0 * w0 * (params.R / M + 1.0) - gamma * gamma
    if wr2 <= 0:
        raise OverdampedError(f"no ringing: omega_r^2 = {wr2:.6g} for M = {M:.6g} ohm")
    wr = math.sqrt(wr2)
    return EigenStructure(gamma=gamma, omega_r=wr, omega_0=w0, lam=complex(-gamma, wr), T_r=2 * math.pi / wr)


def nominal(params: OscillatorParams) -> EigenStructure:
    """Eigenstructure in the high ohmic state, which sets the design period."""
    return eigen_analysis(params, params.memristor.M_off)


def dt_max(params: OscillatorParams) -> float:
    return nominal(params).T_r / STEPS_PER_PERIOD


def transfer_function(params: OscillatorParams, M: float, p: complex) -> complex:
    """Voltage gain from the source to the capacitor at complex frequency ``p``."""
    eig = eigen_analysis(params, M)
    lam = eig.lam
    den = (p - lam) * (p - lam.conjugate())
    if abs(den) <= 1e-12 * abs(lam) ** 2:
        raise ValueError(f"p = {p} is a pole of H")
    return eig.omega_0**2 / den


def _pulse_coefficient(params: OscillatorParams, eig: EigenStructure) -> complex:
    # partial-fraction weight of the pole lambda in H(p)/p, doubled
    lam = eig.lam
    a = lam + params.R / params.L
    return 2 * eig.omega_0**2 / (a * a - eig.omega_0**2) * a / lam


def pulse_response_closed_form(
    params: OscillatorParams,
    M: float,
    pulse_times: Sequence[float],
    e0: float,
    t,
    width: float | None = None,
    amplitudes: Sequence[float] | None = None,
):
    """Capacitor voltage for a rectangular pulse train at frozen memristance.

    By default every pulse has source amplitude ``-e0``; ``amplitudes`` gives
    signed per-pulse source amplitudes instead. ``width`` defaults to half the
    ringing period. The circuit is assumed to rest at its DC operating point
    before the first pulse, so a nonzero offset adds ``s*U*H(0)``.

    Past a pulse's tail each pulse contributes ``a*Re{K exp(lam*(t - t_mu))}``
    with ``K = c*(1 - exp(-lam*width))``; inside the pulse the step response
    ``a*(H(0) + Re{c exp(lam*(t - t_mu))})`` is used, ``c`` being the doubled
    residue of ``H(p)/p`` at ``lam``.
    """
    eig = eigen_analysis(params, M)
    lam = eig.lam
    w = 0.5 * eig.T_r if width is None else width
    if amplitudes is None:
        amplitudes = [-e0] * len(pulse_times)
    if len(amplitudes) != len(pulse_times):
        raise ValueError("need one amplitude per pulse")
    c = _pulse_coefficient(params, eig)
    h0 = eig.omega_0**2 / abs(lam) ** 2
    K = c * (1 - cmath.exp(-lam * w))

    t = np.asarray(t, dtype=float)
    u = np.full(t.shape, params.source_offset * h0)
    for t_mu, a in zip(pulse_times, amplitudes):
        tau = t - t_mu
        inside = (tau >= 0) & (tau < w)
        after = tau >= w
        u[inside] += a * (h0 + np.real(c * np.exp(lam * tau[inside])))
        u[after] += a * np.real(K * np.exp(lam * tau[after]))
    return u


def equilibrium(params: OscillatorParams, M: float | None = None, t: float = 0.0) -> CircuitState:
    """DC operating point with the offset source alone."""
    M = params.memristor.M_off if M is None else M
    src = params.source_offset
    return CircuitState(
        i_L=src / (params.R + M),
        u_C=src * M / (params.R + M),
        mem=MemristorState(M, params.orientation),
        t=t,
    )


def energy(params: OscillatorParams, i_L, u_C):
    return 0.5 * params.L * np.square(i_L) + 0.5 * params.C * np.square(u_C)


def rk4(i, v, M, src, R, L, C, h):
    """One classical RK4 step of the electrical subsystem with M and src held."""

    def f(i, v):
        return (src - R * i - v) / L, (i - v / M) / C

    k1i, k1v = f(i, v)
    k2i, k2v = f(i + 0.5 * h * k1i, v + 0.5 * h * k1v)
    k3i, k3v = f(i + 0.5 * h * k2i, v + 0.5 * h * k2v)
    k4i, k4v = f(i + h * k3i, v + h * k3v)
    return (
        i + h / 6.0 * (k1i + 2.0 * k2i + 2.0 * k3i + k4i),
        v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
    )


class BatchIntegrator:
    """Steps many identically dimensioned resonators in lockstep.

    Every resonator has its own orientation sign; R, L, C, the offset
    magnitude and the memristor model are shared. All arithmetic is
    elementwise, so a resonator's trajectory does not depend on what else is
    in the batch.
    """

    def __init__(self, params: OscillatorParams, signs, dt: float, i_L, u_C, M):
        limit = dt_max(params)
        if dt > limit * (1 + 1e-9):
            raise StepTooLarge(f"dt = {dt:.6g} s exceeds dt_max = {limit:.6g} s")
        if dt <= 0:
            raise ValueError("dt must be positive")
        self.params = params
        self.dt = dt
        self.signs = np.asarray(signs, dtype=float)
        self.i_L = np.array(i_L, dtype=float)
        self.u_C = np.array(u_C, dtype=float)
        self.M = np.array(M, dtype=float)

    def step(self, e) -> None:
        p = self.params
        src = e + self.signs * p.U_offset
        self.i_L, self.u_C = rk4(self.i_L, self.u_C, self.M, src, p.R, p.L, p.C, self.dt)
        self.M = device.advance(self.M, self.signs * self.u_C, self.dt, p.memristor)

    def run(self, E: np.ndarray, record_current: bool = True):
        """Advance through the columns of ``E`` (shape ``(batch, n)``).

        Returns arrays of shape ``(batch, n)`` holding the state after each
        step: ``(i_L, u_C, M)``.
        """
        n = E.shape[1]
        shape = (len(self.u_C), n)
        I = np.empty(shape) if record_current else None
        V = np.empty(shape)
        Ms = np.empty(shape)
        for k in range(n):
            self.step(E[:, k])
            if I is not None:
                I[:, k] = self.i_L
            V[:, k] = self.u_C
            Ms[:, k] = self.M
        return I, V, Ms


def step(state: CircuitState, params: OscillatorParams, e_in: float, dt: float) -> CircuitState:
    """Advance one circuit by one step of the fixed-step integrator."""
    sign = params.orientation.sign
    integ = BatchIntegrator(params, [sign], dt, [state.i_L], [state.u_C], [state.mem.M])
    integ.step(np.array([e_in], dtype=float))
    return CircuitState(
        i_L=float(integ.i_L[0]),
        u_C=float(integ.u_C[0]),
        mem=replace(state.mem, M=float(integ.M[0])),
        t=state.t + dt,
    )


@dataclass
class Trajectory:
    """Sampled simulation result; index 0 is the initial state.

    ``e[k]`` is the source value held over ``[t[k], t[k+1])``.
    """

    t: np.ndarray
    e: np.ndarray
    i_L: np.ndarray
    u_C: np.ndarray
    M: np.ndarray
    orientation: Orientation = Orientation.NORMAL

    def __len__(self) -> int:
        return len(self.t)

    def state(self, k: int) -> CircuitState:
        return CircuitState(
            float(self.i_L[k]), float(self.u_C[k]), MemristorState(float(self.M[k]), self.orientation), float(self.t[k])
        )

    def states(self) -> Iterator[CircuitState]:
        for k in range(len(self)):
            yield self.state(k)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t_s", "e_in_V", "i_L_A", "u_C_V", "M_ohms"])
            for row in zip(self.t, self.e, self.i_L, self.u_C, self.M):
                w.writerow([repr(float(x)) for x in row])


def sample_excitation(excitation, dt: float | None):
    """Return ``(values, dt)`` on the integrator grid.

    ``excitation`` is either an object with ``values`` and ``dt`` attributes
    or a bare array sampled at ``dt``. A finer excitation is decimated by
    zero-order hold.
    """
    if hasattr(excitation, "values") and hasattr(excitation, "dt"):
        values = np.asarray(excitation.values, dtype=float)
        src_dt = float(excitation.dt)
        if dt is None:
            return values, src_dt
        if src_dt > dt * (1 + 1e-9):
            raise ValueError(f"excitation sampled at {src_dt:.6g} s is coarser than dt = {dt:.6g} s")
        if math.isclose(src_dt, dt, rel_tol=1e-9):
            return values, dt
        n = int(math.floor(len(values) * src_dt / dt + 1e-9))
        idx = np.floor(np.arange(n) * dt / src_dt + 1e-9).astype(int)
        return values[idx], dt
    if dt is None:
        raise ValueError("dt is required for a bare sample array")
    return np.asarray(excitation, dtype=float), dt


def simulate(
    params: OscillatorParams,
    initial: CircuitState | None,
    excitation,
    dt: float | None = None,
) -> Trajectory:
    """Run one resonator through a sampled source waveform.

    With ``initial=None`` the circuit starts at its DC operating point.
    """
    values, dt = sample_excitation(excitation, dt)
    if initial is None:
        initial = equilibrium(params)
    sign = params.orientation.sign
    integ = BatchIntegrator(params, [sign], dt, [initial.i_L], [initial.u_C], [initial.mem.M])
    I, V, Ms = integ.run(values[None, :])
    n = len(values)
    t = initial.t + dt * np.arange(n + 1)
    e = np.append(values, values[-1] if n else 0.0)
    return Trajectory(
        t=t,
        e=e,
        i_L=np.concatenate([[initial.i_L], I[0]]),
        u_C=np.concatenate([[initial.u_C], V[0]]),
        M=np.concatenate([[initial.mem.M], Ms[0]]),
        orientation=params.orientation,
    )
