"""CSV and JSON artifacts.

CSV: comma separated, mandatory header row, '.' decimal, UTF-8, LF line
endings, floats written with ``repr`` so they round-trip exactly.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .constants import TORR
from .dynamics import Trajectory
from .errors import DomainError
from .nvesr import EsrSpectrum
from .psdfit import PsdEstimate


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(path, columns):
    """``columns`` maps header name -> sequence; all sequences equal length."""
    names = list(columns)
    data = [np.asarray(columns[n]) for n in names]
    n = {len(d) for d in data}
    if len(n) != 1:
        raise DomainError("CSV columns must have equal length")
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*data):
            w.writerow([_fmt(v) for v in row])
    return path


def read_csv(path, required, optional=()):
    """Return {column: float array} for the required and present optional columns."""
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DomainError(f"{path}: empty file, header row required")
    header = [h.strip() for h in rows[0]]
    missing = [c for c in required if c not in header]
    if missing:
        raise DomainError(f"{path}: missing column(s) {missing}; header is {header}")
    body = [r for r in rows[1:] if r and any(cell.strip() for cell in r)]
    out = {}
    for col in list(required) + [c for c in optional if c in header]:
        j = header.index(col)
        try:
            out[col] = np.array([float(r[j]) for r in body])
        except (ValueError, IndexError) as exc:
            raise DomainError(f"{path}: bad value in column {col!r}: {exc}") from None
    return out


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dumps(obj, indent=None):
    return json.dumps(_clean(obj), indent=indent, allow_nan=False)


def write_json(path, obj):
    path = Path(path)
    path.write_text(dumps(obj, indent=2) + "\n", encoding="utf-8")
    return path


# ---- typed artifacts

def write_trajectory(path, traj):
    return write_csv(path, {"time_s": traj.times, "x_m": traj.positions,
                            "v_mps": traj.velocities})


def read_trajectory(path, seed=-1):
    cols = read_csv(path, ["time_s", "x_m", "v_mps"])
    t = cols["time_s"]
    if len(t) < 2:
        raise DomainError(f"{path}: trajectory needs at least two samples")
    dt = (t[-1] - t[0]) / (len(t) - 1)
    return Trajectory(float(dt), cols["x_m"], cols["v_mps"], seed)


def write_psd(path, psd):
    return write_csv(path, {"freq_hz": psd.frequencies, "psd_m2_per_hz": psd.values})


def read_psd(path, n_averages=1):
    cols = read_csv(path, ["freq_hz", "psd_m2_per_hz"])
    return PsdEstimate(cols["freq_hz"], cols["psd_m2_per_hz"], n_averages)


def write_esr(path, spec):
    cols = {"freq_hz": spec.frequencies, "i_pl": spec.i_pl}
    if spec.sigma is not None:
        cols["sigma"] = spec.sigma
    return write_csv(path, cols)


def read_esr(path):
    cols = read_csv(path, ["freq_hz", "i_pl"], optional=["sigma"])
    return EsrSpectrum(cols["freq_hz"], cols["i_pl"], cols.get("sigma"))


def read_calibration(path):
    cols = read_csv(path, ["power_w", "d_hz"])
    return np.column_stack([cols["power_w"], cols["d_hz"]])


def read_pressure_temperature(path):
    """(pressure_Pa, temperature_K) pairs from a pressure_torr, temperature_k file."""
    cols = read_csv(path, ["pressure_torr", "temperature_k"])
    return np.column_stack([cols["pressure_torr"] * TORR, cols["temperature_k"]])


def read_o2_counts(path):
    """(pressure_Pa, counts/s) arrays from a pressure_torr, delta_counts_per_s file."""
    cols = read_csv(path, ["pressure_torr", "delta_counts_per_s"])
    return cols["pressure_torr"] * TORR, cols["delta_counts_per_s"]
