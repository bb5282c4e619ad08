"""Command-line front end.

    python -m nanolev <command> [flags] [--config run.json] [--seed N] [--out DIR]

Parameters come from built-in defaults, then the ``--config`` JSON file,
then explicit flags. Units at this boundary are Torr, Hz/GHz and nm, with
unit-suffixed keys everywhere; everything inside the library is SI.

Every command writes its artifacts to ``--out`` (default ``.``), saves the
run summary as ``<command>.json`` there, and prints the same summary as a
single JSON line on stdout. A summary file is itself a valid ``--config``.

Exit status: 0 success, 1 model/domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import io
from .constants import GHZ, K_B, NM, TORR
from .dynamics import TrapModel, escape_experiment, simulate
from .errors import FitError
from .gaskin import (GasEnvironment, ParticleModel, damping_factor, knudsen_number,
                     mean_free_path, radius_from_damping, viscosity)
from .nvesr import NvThermometer, calibrate_strain, fit_esr, splitting_to_temperature
from .psdfit import estimate_psd, fit_psd
from .thermosense import (O2Calibration, fit_o2_calibration, fit_pressure_temperature,
                          infer_pressure, o2_count_difference)

REQUIRED = object()


def _bool(text):
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


PARTICLE = [
    ("radius_nm", float, 47.0, "hydrodynamic radius (nm)"),
    ("density", float, 3510.0, "particle density (kg/m^3)"),
]
GAS = [
    ("gas", str, "air", "gas species: air, oxygen, helium"),
    ("pressure_torr", float, 760.0, "gas pressure (Torr)"),
    ("temp_k", float, 296.0, "gas / effective bath temperature (K)"),
]

COMMANDS = {
    "simulate": ("simulate center-of-mass motion in a harmonic trap", PARTICLE + GAS + [
        ("trap_freq_hz", float, 100e3, "trap frequency Omega_x/2pi (Hz)"),
        ("gamma0_hz", float, None, "damping Gamma0/2pi (Hz); default from the gas model"),
        ("dt", float, None, "time step (s); default 1/50 of the shortest time scale"),
        ("n_steps", int, 200000, "number of samples"),
        ("seed", int, 0, "random seed"),
    ]),
    "psd": ("Welch PSD of a trajectory CSV", [
        ("input", str, REQUIRED, "trajectory CSV (time_s,x_m,v_mps)"),
        ("segment_length", int, 4096, "samples per segment"),
        ("overlap", float, 0.5, "segment overlap fraction"),
    ]),
    "fit-psd": ("fit the thermal oscillator model to a PSD CSV", [
        ("input", str, REQUIRED, "PSD CSV (freq_hz,psd_m2_per_hz)"),
        ("s0_guess", float, None, "initial S0"),
        ("gamma0_guess_hz", float, None, "initial Gamma0/2pi (Hz)"),
        ("trap_freq_guess_hz", float, None, "initial Omega_x/2pi (Hz)"),
        ("fmin_hz", float, None, "lowest frequency used"),
        ("fmax_hz", float, None, "highest frequency used"),
    ]),
    "size": ("hydrodynamic size from the damping rate", [
        ("gamma0_hz", float, REQUIRED, "damping Gamma0/2pi (Hz)"),
        ("density", float, 3510.0, "particle density (kg/m^3)"),
    ] + GAS + [
        ("in_equilibrium", _bool, True, "particle in thermal equilibrium with the gas"),
    ]),
    "fit-esr": ("double-Gaussian fit of an ESR scan CSV", [
        ("input", str, REQUIRED, "ESR CSV (freq_hz,i_pl[,sigma])"),
        ("strain_hz", float, None, "strain shift (Hz); if given, also report temperature"),
        ("pressure_torr", float, 0.0, "gas pressure for the pressure shift (Torr)"),
    ]),
    "temp": ("temperature from a zero-field splitting", [
        ("d_ghz", float, REQUIRED, "measured D (GHz)"),
        ("strain_hz", float, 0.0, "strain shift (Hz)"),
        ("pressure_torr", float, 0.0, "gas pressure (Torr)"),
    ]),
    "calibrate-strain": ("strain shift from a trap-power series", [
        ("input", str, REQUIRED, "calibration CSV (power_w,d_hz)"),
        ("pressure_torr", float, 760.0, "gas pressure (Torr)"),
        ("room_temp_k", float, 296.0, "temperature at zero trap power (K)"),
    ]),
    "fit-tp": ("fit T = T0 + alpha/P", [
        ("input", str, REQUIRED, "CSV (pressure_torr,temperature_k)"),
    ]),
    "o2": ("oxygen count-difference calibration", [
        ("input", str, None, "CSV (pressure_torr,delta_counts_per_s) to fit"),
        ("fit_intercept", _bool, True, "fit a free intercept"),
        ("slope_per_torr", float, 100.0, "slope (photons/Torr/s) when not fitting"),
        ("intercept", float, 0.0, "intercept (photons/s) when not fitting"),
        ("pressure_torr", float, None, "forward: pressure (Torr) -> counts"),
        ("counts", float, None, "inverse: counts (photons/s) -> pressure"),
    ]),
    "escape": ("Monte Carlo escape from a Gaussian well", PARTICLE + [
        ("barrier_k", float, 8 * 296.0, "barrier depth E_b/k_B (K)"),
        ("waist_nm", float, 1000.0, "Gaussian well waist (nm)"),
        ("gamma0_hz", float, None, "damping Gamma0/2pi (Hz); default half the trap frequency"),
        ("temp_k", float, 296.0, "effective temperature (K)"),
        ("max_time_s", float, 1.0, "censoring time per trial (s)"),
        ("n_trials", int, 100, "number of trials"),
        ("dt", float, None, "time step (s)"),
        ("workers", int, 1, "worker threads"),
        ("seed", int, 0, "random seed"),
    ]),
}


class UsageError(Exception):
    pass


def build_parser():
    parser = argparse.ArgumentParser(prog="nanolev", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (helptext, params) in COMMANDS.items():
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--out", default=".", help="output directory")
        names = {pname for pname, *_ in params}
        for pname, ptype, default, phelp in params:
            extra = "" if default in (None, REQUIRED) else f" [default {default}]"
            p.add_argument("--" + pname.replace("_", "-"), dest=pname, type=ptype,
                           default=argparse.SUPPRESS, help=phelp + extra)
        if "seed" not in names:
            p.add_argument("--seed", dest="seed", type=int, default=argparse.SUPPRESS,
                           help="accepted for uniformity; unused by this command")
    return parser


def load_config(path, command):
    """Read a flat parameter dict, or the ``config`` of a previous run summary."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise UsageError(f"{path}: config must be a JSON object")
    if "config" in data and "command" in data:
        if data["command"] != command:
            raise UsageError(f"{path}: summary is for {data['command']!r}, not {command!r}")
        data = data["config"]
    return data


def resolve(command, args):
    _, params = COMMANDS[command]
    spec = {pname: (ptype, default) for pname, ptype, default, _ in params}
    cfg = {k: d for k, (_, d) in spec.items()}
    if args.config:
        loaded = load_config(args.config, command)
        unknown = sorted(set(loaded) - set(spec))
        if unknown:
            raise UsageError(f"unknown config key(s) for {command}: {unknown}")
        for k, v in loaded.items():
            if v is None:
                cfg[k] = None
                continue
            try:
                cfg[k] = spec[k][0](v)
            except (TypeError, ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"config key {k!r}: {exc}") from None
    for k in spec:
        if hasattr(args, k):
            cfg[k] = getattr(args, k)
    missing = [k for k, v in cfg.items() if v is REQUIRED]
    if missing:
        raise UsageError(f"missing required parameter(s): "
                         + ", ".join("--" + m.replace("_", "-") for m in missing))
    return cfg


# ---------------------------------------------------------------- commands

def _gas(cfg):
    return GasEnvironment(cfg["gas"], cfg["pressure_torr"] * TORR, cfg["temp_k"])


def cmd_simulate(cfg, out):
    particle = ParticleModel(cfg["radius_nm"] * NM, cfg["density"])
    env = _gas(cfg)
    gamma0 = (2 * math.pi * cfg["gamma0_hz"] if cfg["gamma0_hz"] is not None
              else damping_factor(particle, env))
    trap = TrapModel(2 * math.pi * cfg["trap_freq_hz"])
    dt = cfg["dt"]
    if dt is None:
        dt = 0.02 * min(2 * math.pi / trap.omega_x, 1.0 / gamma0)
    traj = simulate(particle, trap, gamma0, cfg["temp_k"], dt, cfg["n_steps"], cfg["seed"])
    path = io.write_trajectory(out / "trajectory.csv", traj)
    return {
        "n_samples": len(traj), "dt_s": dt,
        "gamma0_rad_s": gamma0, "omega_x_rad_s": trap.omega_x, "mass_kg": particle.mass,
        "variance_m2": float(np.var(traj.positions)),
        "equipartition_variance_m2": K_B * cfg["temp_k"] / (particle.mass * trap.omega_x**2),
    }, [path]


def cmd_psd(cfg, out):
    traj = io.read_trajectory(cfg["input"])
    psd = estimate_psd(traj, cfg["segment_length"], cfg["overlap"])
    path = io.write_psd(out / "psd.csv", psd)
    return {"n_bins": len(psd.frequencies), "n_averages": psd.n_averages,
            "integral_m2": psd.integral(), "variance_m2": float(np.var(traj.positions))}, [path]


def cmd_fit_psd(cfg, out):
    psd = io.read_psd(cfg["input"])
    guesses = (cfg["s0_guess"], cfg["gamma0_guess_hz"], cfg["trap_freq_guess_hz"])
    if any(g is not None for g in guesses) and not all(g is not None for g in guesses):
        raise UsageError("give all three of --s0-guess, --gamma0-guess-hz, "
                         "--trap-freq-guess-hz or none")
    guess = None
    if guesses[0] is not None:
        guess = (guesses[0], 2 * math.pi * guesses[1], 2 * math.pi * guesses[2])
    path = out / "fit_psd.json"
    try:
        res = fit_psd(psd, guess, fmin=cfg["fmin_hz"], fmax=cfg["fmax_hz"])
    except FitError as exc:
        if exc.best is not None:
            io.write_json(path, exc.best.as_record())
        raise
    rec = res.as_record()
    rec["gamma0_hz"] = res.gamma0 / (2 * math.pi)
    rec["trap_freq_hz"] = res.omega_x / (2 * math.pi)
    io.write_json(path, rec)
    return rec, [path]


def cmd_size(cfg, out):
    env = _gas(cfg)
    r = radius_from_damping(2 * math.pi * cfg["gamma0_hz"], cfg["density"], env,
                            in_equilibrium=cfg["in_equilibrium"])
    particle = ParticleModel(r, cfg["density"])
    return {
        "radius_nm": r / NM, "diameter_nm": 2 * r / NM,
        "mean_free_path_nm": mean_free_path(env) / NM,
        "knudsen": knudsen_number(particle, env),
        "viscosity_pa_s": viscosity(env), "mass_kg": particle.mass,
    }, []


def cmd_fit_esr(cfg, out):
    spec = io.read_esr(cfg["input"])
    res = fit_esr(spec)
    rec = res.as_record()
    rec["d_ghz"] = res.d_splitting / GHZ
    if cfg["strain_hz"] is not None:
        th = NvThermometer(strain_shift=cfg["strain_hz"])
        rec["temperature_k"] = splitting_to_temperature(
            res.d_splitting, th, cfg["pressure_torr"] * TORR)
    path = io.write_json(out / "fit_esr.json", rec)
    return rec, [path]


def cmd_temp(cfg, out):
    th = NvThermometer(strain_shift=cfg["strain_hz"])
    p = cfg["pressure_torr"] * TORR
    t = splitting_to_temperature(cfg["d_ghz"] * GHZ, th, p)
    return {"temperature_k": t,
            "d_corrected_ghz": (cfg["d_ghz"] * GHZ - th.shift_hz(p)) / GHZ}, []


def cmd_calibrate_strain(cfg, out):
    obs = io.read_calibration(cfg["input"])
    cal = calibrate_strain(obs, NvThermometer(), cfg["pressure_torr"] * TORR,
                           cfg["room_temp_k"])
    rec = cal.as_record()
    path = io.write_json(out / "calibration.json", rec)
    return rec, [path]


def cmd_fit_tp(cfg, out):
    model = fit_pressure_temperature(io.read_pressure_temperature(cfg["input"]))
    rec = {"t0_k": model.t0, "alpha_k_torr": model.alpha_k_torr, "alpha_k_pa": model.alpha,
           "residual_rms_k": model.residual_rms,
           "max_relative_residual": model.max_relative_residual, "n_points": model.n_points}
    path = io.write_json(out / "fit_tp.json", rec)
    return rec, [path]


def cmd_o2(cfg, out):
    artifacts = []
    if cfg["input"] is not None:
        p, c = io.read_o2_counts(cfg["input"])
        calib = fit_o2_calibration(p, c, fit_intercept=cfg["fit_intercept"])
        rec = calib.as_record()
        artifacts.append(io.write_json(out / "o2_calibration.json", rec))
    else:
        calib = O2Calibration.from_torr(cfg["slope_per_torr"], cfg["intercept"])
        rec = calib.as_record()
    if cfg["pressure_torr"] is not None:
        rec["delta_counts_per_s"] = o2_count_difference(calib, cfg["pressure_torr"] * TORR)
    if cfg["counts"] is not None:
        rec["inferred_pressure_torr"] = infer_pressure(calib, cfg["counts"]) / TORR
    return rec, artifacts


def cmd_escape(cfg, out):
    particle = ParticleModel(cfg["radius_nm"] * NM, cfg["density"])
    trap = TrapModel.gaussian(particle, cfg["barrier_k"] * K_B, cfg["waist_nm"] * NM)
    gamma0 = (2 * math.pi * cfg["gamma0_hz"] if cfg["gamma0_hz"] is not None
              else 0.5 * trap.omega_x)
    st = escape_experiment(particle, trap, gamma0, cfg["temp_k"], cfg["max_time_s"],
                           cfg["n_trials"], cfg["seed"], dt=cfg["dt"], workers=cfg["workers"])
    path = io.write_csv(out / "escape.csv", {
        "trial": np.arange(st.n_trials), "time_s": st.times, "escaped": st.escaped})
    return {
        "n_trials": st.n_trials, "n_escaped": st.n_escaped,
        "escape_fraction": st.escape_fraction, "mean_escape_time_s": st.mean_escape_time,
        "rate_per_s": st.rate, "rate_stderr_per_s": st.rate_stderr,
        "omega_x_rad_s": trap.omega_x, "gamma0_rad_s": gamma0, "dt_s": st.dt,
        "barrier_over_kt": cfg["barrier_k"] / cfg["temp_k"] if cfg["temp_k"] > 0 else None,
    }, [path]


HANDLERS = {
    "simulate": cmd_simulate, "psd": cmd_psd, "fit-psd": cmd_fit_psd, "size": cmd_size,
    "fit-esr": cmd_fit_esr, "temp": cmd_temp, "calibrate-strain": cmd_calibrate_strain,
    "fit-tp": cmd_fit_tp, "o2": cmd_o2, "escape": cmd_escape,
}


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        cfg = resolve(args.command, args)
    except (UsageError, OSError, json.JSONDecodeError) as exc:
        print(f"nanolev {args.command}: usage error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        result, artifacts = HANDLERS[args.command](cfg, out)
    except UsageError as exc:
        print(f"nanolev {args.command}: usage error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, FitError, np.linalg.LinAlgError, OSError) as exc:
        print(f"nanolev {args.command}: error: {exc}", file=sys.stderr)
        return 1
    summary = {"command": args.command, "config": cfg, "result": result,
               "artifacts": [p.name for p in artifacts]}
    io.write_json(out / f"{args.command}.json", summary)
    print(io.dumps(summary))
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
