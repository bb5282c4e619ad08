"""Power spectral density of the center-of-mass motion and its fit.

The displacement PSD of a damped harmonic oscillator driven by thermal
noise, per Hz and two-sided, is

    S_x(w) = S0 Gamma0 / ((Omega_x^2 - w^2)^2 + w^2 Gamma0^2),   S0 = 2 kB T / m,  w = 2 pi f

Its integral over f in (-inf, inf) is kB T / (m Omega_x^2). Spectra
estimated from data are one-sided (f >= 0), so ``model_psd`` returns twice
the expression above by default; ``onesided=False`` gives the bare form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares
from scipy.integrate import trapezoid
from scipy.signal import welch

from .errors import DomainError, FitError

LOW_CONFIDENCE_RATIO = 3.0
MAX_ITERATIONS = 200
STEP_TOLERANCE = 1e-10


@dataclass(frozen=True, eq=False)
class PsdEstimate:
    frequencies: np.ndarray
    values: np.ndarray
    n_averages: int = 1

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if f.shape != v.shape or f.ndim != 1:
            raise DomainError("frequencies and values must be 1-D arrays of equal length")
        if np.any(np.diff(f) <= 0):
            raise DomainError("frequencies must be strictly increasing")
        if np.any(v < 0):
            raise DomainError("PSD values must be non-negative")
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "values", v)

    def integral(self):
        return float(trapezoid(self.values, self.frequencies))


@dataclass(frozen=True)
class PsdFitResult:
    s0: float
    gamma0: float
    omega_x: float
    stderr_s0: float
    stderr_gamma0: float
    stderr_omega_x: float
    residual_norm: float
    converged: bool = True
    low_confidence: bool = False
    n_iterations: int = 0
    message: str = field(default="", compare=False)

    def as_record(self):
        return {
            "s0": self.s0,
            "gamma0_rad_s": self.gamma0,
            "omega_x_rad_s": self.omega_x,
            "stderr_s0": self.stderr_s0,
            "stderr_gamma0_rad_s": self.stderr_gamma0,
            "stderr_omega_x_rad_s": self.stderr_omega_x,
            "residual_norm": self.residual_norm,
            "converged": self.converged,
            "low_confidence": self.low_confidence,
        }


def model_psd(s0, gamma0, omega_x, frequencies, onesided=True):
    """Thermal oscillator PSD in m^2/Hz at frequencies in Hz."""
    w = 2 * np.pi * np.asarray(frequencies, dtype=float)
    sides = 2.0 if onesided else 1.0
    return sides * s0 * gamma0 / ((omega_x**2 - w**2) ** 2 + (w * gamma0) ** 2)


def peak_frequency(gamma0, omega_x):
    """Frequency (Hz) of the PSD maximum; 0 when Gamma0^2 >= 2 Omega_x^2."""
    arg = omega_x**2 - 0.5 * gamma0**2
    return math.sqrt(arg) / (2 * math.pi) if arg > 0 else 0.0


def locate_peak(psd, half_window=10):
    """Peak frequency (Hz) of an estimated PSD, refined past the bin grid.

    A parabola is fitted to log-PSD over +/- ``half_window`` bins around the
    largest positive-frequency bin; averaged-periodogram noise makes the raw
    argmax wander by a few bins on a broad peak.
    """
    f, v = psd.frequencies, psd.values
    pos = np.flatnonzero(f > 0)
    k = int(pos[np.argmax(v[pos])])
    lo, hi = max(k - half_window, pos[0]), min(k + half_window, len(f) - 1)
    if hi - lo < 2 or np.any(v[lo:hi + 1] <= 0):
        return float(f[k])
    c2, c1, _ = np.polyfit(f[lo:hi + 1] - f[k], np.log(v[lo:hi + 1]), 2)
    if c2 >= 0:
        return float(f[k])
    return float(np.clip(f[k] - c1 / (2 * c2), f[lo], f[hi]))


def estimate_psd(traj, segment_length, overlap=0.5):
    """Welch estimate of the position PSD (one-sided, Hann window, m^2/Hz)."""
    x = np.asarray(traj.positions if hasattr(traj, "positions") else traj, dtype=float)
    dt = traj.dt
    segment_length = int(segment_length)
    if segment_length < 8:
        raise DomainError("segment_length must be at least 8 samples")
    if len(x) < segment_length:
        raise DomainError(f"trajectory of {len(x)} samples shorter than one segment "
                          f"({segment_length})")
    if not 0.0 <= overlap <= 0.9:
        raise DomainError(f"overlap must lie in [0, 0.9], got {overlap}")
    noverlap = int(round(overlap * segment_length))
    step = segment_length - noverlap
    n_avg = (len(x) - segment_length) // step + 1
    f, p = welch(x, fs=1.0 / dt, window="hann", nperseg=segment_length,
                 noverlap=noverlap, detrend="constant", scaling="density",
                 return_onesided=True)
    return PsdEstimate(f, p, n_avg)


def _jacobian_log(log_params, w, data):
    s0, g, om = np.exp(log_params)
    denom = (om**2 - w**2) ** 2 + (w * g) ** 2
    model = 2.0 * s0 * g / denom
    ratio = data / model
    # d model / d ln(param), divided by model
    d_ls0 = np.ones_like(w)
    d_lg = 1.0 - 2.0 * (w * g) ** 2 / denom
    d_lom = -4.0 * om**2 * (om**2 - w**2) / denom
    return -ratio[:, None] * np.column_stack([d_ls0, d_lg, d_lom])


def _residual_log(log_params, w, data):
    s0, g, om = np.exp(log_params)
    model = 2.0 * s0 * g / ((om**2 - w**2) ** 2 + (w * g) ** 2)
    return data / model - 1.0


def initial_guess(psd):
    """Seed (s0, gamma0, omega_x) from the peak location, width and height."""
    f = psd.frequencies
    v = psd.values
    k = int(np.argmax(v))
    peak = v[k]
    half = 0.5 * peak
    above = v >= half
    lo = k
    while lo > 0 and above[lo - 1]:
        lo -= 1
    hi = k
    while hi < len(v) - 1 and above[hi + 1]:
        hi += 1
    if k == 0 or f[k] <= 0:
        # overdamped: no interior peak; corner frequency ~ Omega^2 / Gamma
        f_corner = max(f[hi], f[1] if len(f) > 1 else f[0])
        omega = 2 * np.pi * f_corner
        gamma = omega
        s0 = 0.5 * peak * omega**4 / gamma
        return s0, gamma, omega
    omega = 2 * np.pi * f[k]
    fwhm = max(f[hi] - f[lo], f[1] - f[0])
    gamma = 2 * np.pi * fwhm
    s0 = 0.5 * peak * omega**2 * gamma
    return s0, gamma, omega


def fit_psd(psd, initial_guess_params=None, fmin=None, fmax=None):
    """Fit the thermal oscillator model to a PSD estimate.

    Residuals are relative, (data - model)/model, i.e. weights 1/model^2,
    and the fit runs in log-parameters so all three stay positive. Results
    with Gamma0 > 3 Omega_x are flagged ``low_confidence``. Raises
    ``FitError`` (with ``best``) if the solver hits its iteration limit.
    """
    f = psd.frequencies
    v = psd.values
    mask = (f > 0) & (v > 0)
    if fmin is not None:
        mask &= f >= fmin
    if fmax is not None:
        mask &= f <= fmax
    f, v = f[mask], v[mask]
    if len(f) < 4:
        raise DomainError("need at least 4 positive-frequency PSD bins to fit")
    sub = PsdEstimate(f, v, psd.n_averages)
    guess = initial_guess(sub) if initial_guess_params is None else initial_guess_params
    guess = tuple(float(g) for g in guess)
    if any(not (g > 0 and math.isfinite(g)) for g in guess):
        raise DomainError(f"initial guess must be positive, got {guess}")
    if f[-1] < 2 * guess[2] / (2 * np.pi):
        raise DomainError(
            f"PSD extends to {f[-1]:.4g} Hz but must cover twice the guessed trap "
            f"frequency ({2 * guess[2] / (2 * np.pi):.4g} Hz)")

    w = 2 * np.pi * f
    sol = least_squares(_residual_log, np.log(guess), jac=_jacobian_log, args=(w, v),
                        method="lm", xtol=STEP_TOLERANCE, ftol=1e-15, gtol=1e-15,
                        max_nfev=MAX_ITERATIONS)
    params = np.exp(sol.x)
    dof = max(len(f) - 3, 1)
    s2 = 2.0 * sol.cost / dof
    try:
        cov = np.linalg.inv(sol.jac.T @ sol.jac) * s2
        se_log = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    except np.linalg.LinAlgError:
        se_log = np.full(3, np.inf)
    se = params * se_log
    converged = bool(sol.status > 0)
    s0, g, om = (float(p) for p in params)
    result = PsdFitResult(
        s0=s0, gamma0=g, omega_x=om,
        stderr_s0=float(se[0]), stderr_gamma0=float(se[1]), stderr_omega_x=float(se[2]),
        residual_norm=float(np.sqrt(2.0 * sol.cost)),
        converged=converged,
        low_confidence=bool(g > LOW_CONFIDENCE_RATIO * om),
        n_iterations=int(sol.nfev),
        message=str(sol.message),
    )
    if not converged:
        raise FitError(f"PSD fit did not converge: {sol.message}", best=result)
    return result
