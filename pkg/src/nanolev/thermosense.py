"""Macroscopic sensing models.

* Particle temperature vs gas pressure in the molecular regime,
  T = T0 + alpha / P.
* Oxygen sensing by the photon-count difference between oxygen and helium,
  linear in pressure.
* Thickness of the fluorescence-quenched surface shell from a count ratio,
  assuming uniformly distributed emitters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import TORR
from .errors import DomainError


@dataclass(frozen=True)
class PressureTempModel:
    t0: float          # K
    alpha: float       # K Pa
    residual_rms: float = 0.0
    max_relative_residual: float = 0.0
    n_points: int = 0

    def __post_init__(self):
        if not self.t0 > 0:
            raise DomainError(f"t0 must be positive, got {self.t0}")
        if self.alpha < 0:
            raise DomainError(f"alpha must be non-negative, got {self.alpha}")

    def predict(self, pressure):
        p = np.asarray(pressure, dtype=float)
        if np.any(p <= 0):
            raise DomainError("pressure must be positive")
        out = self.t0 + self.alpha / p
        return float(out) if out.ndim == 0 else out

    @property
    def alpha_k_torr(self):
        return self.alpha / TORR


def fit_pressure_temperature(points):
    """Unweighted least squares of T against 1/P.

    ``points`` are (pressure_Pa, temperature_K) pairs. A fit returning a
    negative alpha (temperature falling in vacuum) is rejected.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
        raise DomainError("need at least two (pressure, temperature) points")
    p, t = pts[:, 0], pts[:, 1]
    if np.any(p <= 0):
        raise DomainError("pressures must be positive")
    if len(np.unique(p)) < 2:
        raise np.linalg.LinAlgError("all pressures identical: T0 and alpha are not separable")
    X = np.column_stack([np.ones_like(p), 1.0 / p])
    coef, *_ = np.linalg.lstsq(X, t, rcond=None)
    resid = t - X @ coef
    return PressureTempModel(
        t0=float(coef[0]), alpha=float(coef[1]),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        max_relative_residual=float(np.max(np.abs(resid / t))),
        n_points=len(p),
    )


@dataclass(frozen=True)
class O2Calibration:
    slope: float            # photons / s / Pa
    intercept: float = 0.0  # photons / s
    stderr_slope: float = 0.0
    stderr_intercept: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.slope) or not math.isfinite(self.intercept):
            raise DomainError("slope and intercept must be finite")

    @classmethod
    def from_torr(cls, slope_per_torr, intercept=0.0):
        return cls(slope_per_torr / TORR, intercept)

    @property
    def slope_per_torr(self):
        return self.slope * TORR

    def as_record(self):
        return {
            "slope_photons_per_torr_s": self.slope_per_torr,
            "slope_photons_per_pa_s": self.slope,
            "intercept_photons_per_s": self.intercept,
            "stderr_slope_photons_per_torr_s": self.stderr_slope * TORR,
            "stderr_intercept_photons_per_s": self.stderr_intercept,
        }


def o2_count_difference(calib, pressure):
    """Oxygen-minus-helium count rate (photons/s) at oxygen pressure ``pressure`` (Pa).

    Linear model only; saturation at high pressure (finite number of NV
    centers) is not represented.
    """
    p = np.asarray(pressure, dtype=float)
    if np.any(p < 0):
        raise DomainError("pressure must be non-negative")
    out = calib.slope * p + calib.intercept
    return float(out) if out.ndim == 0 else out


def infer_pressure(calib, counts):
    """Oxygen pressure (Pa) from a count difference; inverse of ``o2_count_difference``."""
    if calib.slope == 0:
        raise DomainError("calibration slope is zero; pressure is not identifiable")
    c = np.asarray(counts, dtype=float)
    p = (c - calib.intercept) / calib.slope
    if np.any(p < 0):
        raise DomainError("counts imply a negative pressure")
    return float(p) if p.ndim == 0 else p


def fit_o2_calibration(pressures, counts, fit_intercept=True):
    """Straight-line calibration from (pressure_Pa, count difference) pairs."""
    p = np.asarray(pressures, dtype=float)
    c = np.asarray(counts, dtype=float)
    n_par = 2 if fit_intercept else 1
    if p.shape != c.shape or len(p) < n_par + 1:
        raise DomainError(f"need at least {n_par + 1} matching points")
    X = np.column_stack([p, np.ones_like(p)]) if fit_intercept else p[:, None]
    coef, *_ = np.linalg.lstsq(X, c, rcond=None)
    resid = c - X @ coef
    s2 = float(resid @ resid) / (len(p) - n_par)
    cov = np.linalg.inv(X.T @ X) * s2
    se = np.sqrt(np.diag(cov))
    if fit_intercept:
        return O2Calibration(float(coef[0]), float(coef[1]), float(se[0]), float(se[1]))
    return O2Calibration(float(coef[0]), 0.0, float(se[0]), 0.0)


def surface_shell_thickness(count_ratio, radius):
    """Shell thickness r - r_inner with r_inner = r * ratio**(1/3)."""
    ratio = np.asarray(count_ratio, dtype=float)
    if np.any(ratio <= 0) or np.any(ratio > 1):
        raise DomainError(f"count ratio must lie in (0, 1], got {count_ratio}")
    if not radius > 0:
        raise DomainError(f"radius must be positive, got {radius}")
    out = radius * (1.0 - np.cbrt(ratio))
    return float(out) if out.ndim == 0 else out
