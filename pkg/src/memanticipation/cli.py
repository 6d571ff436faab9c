"""Command-line front end.

Every command writes its outputs plus ``run_meta.txt`` (the fully resolved
parameters) into ``--out``. Values come from, in increasing priority: the
built-in preset, the ``--config`` file, explicit flags.

Exit codes: 0 success, 2 invalid input, 3 simulation failure.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import sys
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import anticipator as antmod
from . import array, device, glyphs, oscillator, pgm, signals, svg

EXIT_OK, EXIT_INVALID, EXIT_SIMULATION = 0, 2, 3

PRESETS = {
    "fig6": oscillator.FIG6,
    "measured_left": replace(oscillator.FIG6, memristor=device.MEASURED_LEFT),
    "measured_right": replace(
        oscillator.FIG6, memristor=device.MEASURED_RIGHT, orientation=device.Orientation.FLIPPED
    ),
}

# option name -> (type, default); None default means "taken from the preset"
_CIRCUIT = {
    "R": float,
    "L": float,
    "C": float,
    "U_offset": float,
    "beta": float,
    "M_on": float,
    "M_off": float,
    "U_on": float,
    "U_off": float,
}
_COMMON = {
    "preset": (str, "fig6"),
    "dt": (float, None),
    "seed": (int, 7),
    "U_d": (float, antmod.DEFAULT_U_D),
    "e0": (float, antmod.FIG6_E0),
    "error_policy": (str, "ignore"),
}


class UsageError(ValueError):
    pass


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value file; flags override its entries")
    p.add_argument("--out", default=None, help="output directory (default: ./out)")
    p.add_argument("--preset", choices=sorted(PRESETS), default=None)
    for name in _CIRCUIT:
        p.add_argument(_flag(name), dest=name, type=float, default=None)
    p.add_argument("--dt", type=float, default=None, help="integration step (s); default T_r/2000")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--U-d", dest="U_d", type=float, default=None, help="digitization threshold (V)")
    p.add_argument("--e0", type=float, default=None, help="pulse amplitude (V)")
    p.add_argument("--error-policy", dest="error_policy", choices=["ignore", "reset"], default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="memanticipation", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="eigenstructure and |H(jw)| table")
    _add_common(p)
    p.add_argument("--M", type=float, default=None, help="memristance to analyze (ohm)")
    p.add_argument("--M-preset", dest="M_preset", choices=["on", "off"], default=None)
    p.add_argument("--omega-min", dest="omega_min", type=float, default=None)
    p.add_argument("--omega-max", dest="omega_max", type=float, default=None)
    p.add_argument("--points", type=int, default=None)

    p = sub.add_parser("sweep", help="quasi-static i-u hysteresis sweep")
    _add_common(p)
    p.add_argument("--u-max", dest="u_max", type=float, default=None)
    p.add_argument("--u-min", dest="u_min", type=float, default=None)
    p.add_argument("--period", type=float, default=None, help="sweep duration (s)")
    p.add_argument("--sweep-dt", dest="sweep_dt", type=float, default=None)
    p.add_argument("--compliance", type=float, default=None, help="current compliance (A)")

    p = sub.add_parser("simulate", help="single resonator driven by a negative pulse train")
    _add_common(p)
    p.add_argument("--pulses", type=int, default=None)
    p.add_argument("--spacing", type=float, default=None, help="slot spacing in units of T_r")
    p.add_argument("--periods", type=float, default=None, help="run length after the last pulse, in T_r")
    p.add_argument("--frozen", action="store_true", default=None, help="hold M fixed (beta = 0)")

    p = sub.add_parser("bit", help="bit anticipator: training burst then incomplete test burst")
    _add_common(p)
    p.add_argument("--train", default=None, help="training bits, e.g. 0,0,0")
    p.add_argument("--test", default=None, help="test bits, e.g. 0,0")
    p.add_argument("--gap", type=float, default=None, help="training-to-test gap in T_r")
    p.add_argument("--tail", type=float, default=None, help="probe periods after the test burst")

    p = sub.add_parser("image", help="bit-array anticipation of an image sequence")
    _add_common(p)
    p.add_argument("--manifest", default=None, help="frame manifest (slot_time_s, pgm_path per line)")
    p.add_argument("--digit", type=int, default=None, help="bundled glyph used when no manifest is given")
    p.add_argument("--n-train", dest="n_train", type=int, default=None)
    p.add_argument("--n-test", dest="n_test", type=int, default=None)
    p.add_argument("--gap", type=float, default=None, help="training-to-test gap in T_r")
    p.add_argument("--sigma", type=float, default=None, help="Gaussian gray-level noise std")
    p.add_argument("--failure-slot", dest="failure_slot", type=int, default=None)
    p.add_argument("--failure", default=None, help="PGM used as the failure frame (default: inverted frame)")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--animation", action="store_true", default=None, help="also dump fade frames")
    return parser


_COMMAND_DEFAULTS = {
    "analyze": {
        "M": (float, None),
        "M_preset": (str, None),
        "omega_min": (float, 1e2),
        "omega_max": (float, 1e5),
        "points": (int, 301),
    },
    "sweep": {
        "u_max": (float, 2.0),
        "u_min": (float, -1.0),
        "period": (float, 3.0),
        "sweep_dt": (float, 1e-3),
        "compliance": (float, 100e-6),
    },
    "simulate": {"pulses": (int, 3), "spacing": (float, 1.0), "periods": (float, 5.0), "frozen": (bool, False)},
    "bit": {"train": (str, "0,0,0"), "test": (str, "0,0"), "gap": (float, 3.0), "tail": (float, 3.0)},
    "image": {
        "manifest": (str, None),
        "digit": (int, 3),
        "n_train": (int, 3),
        "n_test": (int, 2),
        "gap": (float, 3.0),
        "sigma": (float, 0.0),
        "failure_slot": (int, None),
        "failure": (str, None),
        "workers": (int, 1),
        "animation": (bool, False),
    },
}


def _read_config(path) -> dict:
    """Flat ``key = value`` entries; section headers are optional and ignored."""
    text = Path(path).read_text()
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    if not text.lstrip().startswith("["):
        text = "[run]\n" + text
    cp.read_string(text)
    out = {}
    for section in cp.sections():
        out.update(cp[section])
    return out


def _convert(key: str, raw, kind):
    if raw is None or kind is None:
        return raw
    if kind is bool:
        return raw if isinstance(raw, bool) else str(raw).strip().lower() in ("1", "true", "yes", "on")
    try:
        return kind(raw)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad value for {key}: {raw!r}") from exc


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, config file and flags into one flat dict."""
    cfg = _read_config(args.config) if args.config else {}
    cmd_defaults = _COMMAND_DEFAULTS[args.command]
    known = set(_CIRCUIT) | set(_COMMON) | set(cmd_defaults) | {"out"}
    unknown = sorted(set(cfg) - known)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")

    def pick(key, kind, default):
        flag = getattr(args, key, None)
        if flag is not None:
            return flag
        if key in cfg:
            return _convert(key, cfg[key], kind)
        return default

    out = {"command": args.command}
    out["out"] = pick("out", str, "out")
    for key, (kind, default) in _COMMON.items():
        out[key] = pick(key, kind, default)
    if out["preset"] not in PRESETS:
        raise UsageError(f"unknown preset {out['preset']!r}")
    for key in _CIRCUIT:
        out[key] = pick(key, float, None)
    for key, (kind, default) in cmd_defaults.items():
        out[key] = pick(key, kind, default)
    return out


def build_params(cfg: dict) -> oscillator.OscillatorParams:
    base = PRESETS[cfg["preset"]]
    mem = {k: cfg[k] for k in ("beta", "M_on", "M_off", "U_on", "U_off") if cfg.get(k) is not None}
    circ = {k: cfg[k] for k in ("R", "L", "C", "U_offset") if cfg.get(k) is not None}
    memristor = replace(base.memristor, **mem)
    return replace(base, memristor=memristor, **circ)


def _fill_resolved(cfg: dict, params: oscillator.OscillatorParams) -> None:
    m = params.memristor
    cfg.update(R=params.R, L=params.L, C=params.C, U_offset=params.U_offset)
    cfg.update(beta=m.beta, M_on=m.M_on, M_off=m.M_off, U_on=m.U_on, U_off=m.U_off)
    cfg["orientation"] = params.orientation.name.lower()
    if cfg["dt"] is None:
        cfg["dt"] = oscillator.dt_max(params)


def write_meta(out: Path, cfg: dict) -> None:
    # the output location is not a parameter; leaving it out keeps reruns comparable
    lines = [f"{k} = {cfg[k]!r}" for k in sorted(cfg) if k != "out"]
    (out / "run_meta.txt").write_text("\n".join(lines) + "\n")


def _csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, (int, str)) else repr(float(v)) for v in row])


def _bits(text: str) -> list[int]:
    text = text.strip()
    if not text:
        return []
    try:
        bits = [int(b) for b in text.replace(" ", "").split(",") if b != ""]
    except ValueError as exc:
        raise UsageError(f"bits must be a comma separated list of 0/1, got {text!r}") from exc
    if any(b not in (0, 1) for b in bits):
        raise UsageError(f"bits must be 0 or 1, got {text!r}")
    return bits


def cmd_analyze(cfg, params, out: Path) -> list[str]:
    m = params.memristor
    if cfg["M"] is not None and cfg["M_preset"] is not None:
        raise UsageError("give either --M or --M-preset, not both")
    if cfg["M_preset"] is not None:
        cfg["M"] = m.M_on if cfg["M_preset"] == "on" else m.M_off
        cfg["M_preset"] = None  # resolved; keeps run_meta identical to the --M spelling
    Ms = [cfg["M"]] if cfg["M"] is not None else [m.M_on, m.M_off]
    if any(not M > 0 for M in Ms):
        raise UsageError("memristance must be positive")
    lines = []
    eigs = []
    for M in Ms:
        e = oscillator.eigen_analysis(params, M)
        eigs.append(e)
        lines.append(
            f"M = {M:.6g} ohm: gamma = {e.gamma:.4f} rad/s, omega_r = {e.omega_r:.4f} rad/s, "
            f"omega_0 = {e.omega_0:.4f} rad/s, T_r = {e.T_r * 1e6:.1f} us"
        )
    (out / "eigen.txt").write_text("\n".join(lines) + "\n")
    omega = np.geomspace(cfg["omega_min"], cfg["omega_max"], cfg["points"])
    cols = [np.abs([oscillator.transfer_function(params, M, 1j * w) for w in omega]) for M in Ms]
    _csv(out / "transfer.csv", ["omega_rad_s"] + [f"abs_H_M{M:.6g}" for M in Ms], zip(omega, *cols))
    svg.line_plot(
        out / "transfer.svg",
        [(f"M = {M:.3g} ohm", np.log10(omega), c) for M, c in zip(Ms, cols)],
        title="|H(j omega)|",
        xlabel="log10 omega (rad/s)",
        ylabel="|H|",
    )
    return lines


def cmd_sweep(cfg, params, out: Path) -> list[str]:
    pts = device.triangle(cfg["u_max"], cfg["u_min"], cfg["period"])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = device.iv_sweep(params.memristor, pts, cfg["compliance"], cfg["sweep_dt"], params.orientation)
    res.to_csv(out / "iv.csv")
    svg.line_plot(out / "iv.svg", [("i(u)", res.u, res.i)], title="i-u sweep", xlabel="u (V)", ylabel="i (A)")
    lines = [f"samples = {len(res.u)}", f"full_hysteresis = {res.full_hysteresis}"]
    lines += [f"warning: {w.message}" for w in caught]
    return lines


def cmd_simulate(cfg, params, out: Path) -> list[str]:
    if cfg["frozen"]:
        params = replace(params, memristor=params.memristor.frozen())
        cfg["beta"] = 0.0
    if cfg["pulses"] < 0 or cfg["spacing"] <= 0 or cfg["periods"] < 0:
        raise UsageError("pulses must be >= 0 and spacing/periods positive")
    T_r = oscillator.nominal(params).T_r
    slots = signals.schedule(cfg["spacing"] * T_r, cfg["pulses"], 0)
    duration = (slots[-1] if slots else 0.0) + (cfg["periods"] + 1) * T_r
    wave = signals.unipolar_train(signals.PulseSpec(cfg["e0"], 0.5 * T_r, slots), cfg["dt"], duration)
    traj = oscillator.simulate(params, None, wave, cfg["dt"])
    traj.to_csv(out / "trajectory.csv")
    svg.line_plot(
        out / "trajectory.svg",
        [("u_C", traj.t, traj.u_C), ("e", traj.t, traj.e)],
        title="resonator response",
        xlabel="t (s)",
        ylabel="V",
    )
    peaks = []
    for k, t0 in enumerate(slots):
        t1 = slots[k + 1] if k + 1 < len(slots) else t0 + cfg["spacing"] * T_r
        m = (traj.t >= t0) & (traj.t < t1)
        peaks.append(float(np.abs(traj.u_C[m]).max()))
    return [f"T_r = {T_r * 1e6:.1f} us", f"peaks_V = {[round(p, 4) for p in peaks]}", f"M_min = {traj.M.min():.6g}"]


def cmd_bit(cfg, params, out: Path) -> list[str]:
    train, test = _bits(cfg["train"]), _bits(cfg["test"])
    ant = antmod.BitAnticipator(params, cfg["U_d"], cfg["error_policy"])
    wave, probes = antmod.training_excitation(ant, train, test, cfg["e0"], cfg["dt"], cfg["gap"], cfg["tail"])
    res = antmod.run(ant, wave, cfg["dt"], probes)
    res.to_csv(out / "waveform.csv")
    res.output.write(out / "slots.txt")
    svg.line_plot(
        out / "bit.svg",
        [("u0", res.t, res.u0), ("u1", res.t, res.u1), ("e", res.t, res.e)],
        title="bit anticipator",
        xlabel="t (s)",
        ylabel="V",
    )
    t_test = wave.slot_times[len(train)] if test else res.t[-1]
    return res.output.lines() + [
        f"zero_pulses_after_test = {res.zero_pulses(t_test)}",
        f"one_pulses_after_test = {res.one_pulses(t_test)}",
        f"M0_min = {res.M0.min():.6g}",
        f"M1_min = {res.M1.min():.6g}",
    ]


def cmd_image(cfg, params, out: Path) -> list[str]:
    ant = antmod.BitAnticipator(params, cfg["U_d"], cfg["error_policy"])
    if cfg["manifest"]:
        frames = pgm.read_manifest(cfg["manifest"])
    else:
        if cfg["digit"] not in range(10):
            raise UsageError("digit must be 0..9")
        times = signals.schedule(ant.T_r, cfg["n_train"], cfg["n_test"], gap=cfg["gap"] * ant.T_r)
        frames = signals.repeat_frame(glyphs.glyph(cfg["digit"]), times)
    bank = array.AnticipatorBank(frames.shape, ant, cfg["e0"])
    kw = {"workers": cfg["workers"]}
    reference = frames.frames[-1]
    lines = []
    if cfg["failure_slot"] is not None:
        failure = pgm.read_pgm(cfg["failure"]) if cfg["failure"] else None
        res, rep = array.run_with_failure(bank, frames, cfg["failure_slot"], failure, cfg["dt"], **kw)
        lines.append(f"failure_slot = {rep.slot_index}")
    elif cfg["sigma"] > 0:
        res, rep = array.run_noisy(bank, frames, cfg["sigma"], cfg["seed"], cfg["dt"], **kw)
        lines.append(f"input_hamming = {rep.input_hamming}")
    else:
        res = array.run_sequence(bank, frames, cfg["dt"], **kw)
    pgm.write_manifest(out / "input.txt", res.frames, prefix="input")
    res.write_frames(out)
    res.write_report(out / "report.csv")
    if cfg["animation"]:
        res.write_animation(out / "animation")
    hams = [array.hamming(fr.gray, reference) for fr in res.slot_frames]
    lines.append(f"output_hamming = {hams}")
    lines.append(f"final_hamming = {hams[-1]}")
    lines += [f"slot {k}: " + " ".join(f"{s.value}={int(np.sum(fr.states == s))}" for s in antmod.SlotState)
              for k, fr in enumerate(res.slot_frames)]
    return lines


COMMANDS = {
    "analyze": cmd_analyze,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "bit": cmd_bit,
    "image": cmd_image,
}

_SIMULATION_ERRORS = (oscillator.OverdampedError, oscillator.StepTooLarge, antmod.NotFound, FloatingPointError)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        params = build_params(cfg)
        _fill_resolved(cfg, params)
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        lines = COMMANDS[args.command](cfg, params, out)
        write_meta(out, cfg)
    except _SIMULATION_ERRORS as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_SIMULATION
    except (ValueError, OSError, KeyError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    for line in lines:
        print(line)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
