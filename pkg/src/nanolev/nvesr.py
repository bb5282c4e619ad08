"""ESR spectra of NV ensembles and NV thermometry.

Spectra are normalized fluorescence I_PL(f) with two Gaussian dips at
D - E and D + E (E is half the dip separation). The zero-field splitting D
maps to temperature through a cubic polynomial plus additive shifts from
gas pressure and particle strain. The strain shift of a particle is
calibrated from a power series by requiring that its temperature
extrapolates to room temperature at zero trapping power.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq, least_squares
from scipy.signal import find_peaks

from .constants import BAR, GHZ, MHZ, ROOM_TEMPERATURE
from .errors import CalibrationError, DomainError, FitError

# ---------------------------------------------------------------- spectra


@dataclass(frozen=True, eq=False)
class EsrSpectrum:
    frequencies: np.ndarray
    i_pl: np.ndarray
    sigma: np.ndarray | None = None

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        y = np.asarray(self.i_pl, dtype=float)
        if f.shape != y.shape or f.ndim != 1:
            raise DomainError("frequencies and i_pl must be 1-D arrays of equal length")
        if np.any(np.diff(f) <= 0):
            raise DomainError("frequencies must be strictly increasing")
        if np.any(y <= 0) or np.any(y > 1.2):
            raise DomainError("i_pl values must lie in (0, 1.2]")
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "i_pl", y)
        if self.sigma is not None:
            s = np.asarray(self.sigma, dtype=float)
            if s.shape != f.shape or np.any(s <= 0):
                raise DomainError("sigma must be positive and match frequencies")
            object.__setattr__(self, "sigma", s)


_PARAM_NAMES = ("d_splitting", "e_splitting", "a1", "a2", "sigma1", "sigma2", "baseline")


@dataclass(frozen=True)
class EsrFitResult:
    d_splitting: float
    e_splitting: float
    a1: float
    a2: float
    sigma1: float
    sigma2: float
    baseline: float
    contrast: float
    standard_errors: dict = field(default_factory=dict, compare=False)
    degenerate: bool = False
    converged: bool = True
    residual_rms: float = 0.0

    def curve(self, frequencies):
        return model_esr(self.d_splitting, self.e_splitting, self.a1, self.a2,
                         self.sigma1, self.sigma2, self.baseline, frequencies)

    def as_record(self):
        rec = {
            "d_hz": self.d_splitting, "e_hz": self.e_splitting,
            "a1": self.a1, "a2": self.a2,
            "sigma1_hz": self.sigma1, "sigma2_hz": self.sigma2,
            "baseline": self.baseline, "contrast": self.contrast,
            "degenerate": self.degenerate, "converged": self.converged,
            "residual_rms": self.residual_rms,
        }
        for k, v in self.standard_errors.items():
            rec[f"stderr_{k}"] = v
        return rec


def model_esr(d, e, a1, a2, sigma1, sigma2, baseline, frequencies):
    """Double-Gaussian dip profile, dips at d - e and d + e."""
    if sigma1 <= 0 or sigma2 <= 0:
        raise DomainError("Gaussian widths must be positive")
    f = np.asarray(frequencies, dtype=float)
    return (baseline
            - a1 * np.exp(-((f - (d - e)) ** 2) / (2 * sigma1**2))
            - a2 * np.exp(-((f - (d + e)) ** 2) / (2 * sigma2**2)))


def _scaled_model(p, x):
    d, e, a1, a2, s1, s2, b = p
    g1 = np.exp(-((x - (d - e)) ** 2) / (2 * s1**2))
    g2 = np.exp(-((x - (d + e)) ** 2) / (2 * s2**2))
    return b - a1 * g1 - a2 * g2, g1, g2


def _scaled_jac(p, x):
    d, e, a1, a2, s1, s2, b = p
    _, g1, g2 = _scaled_model(p, x)
    u1 = x - (d - e)
    u2 = x - (d + e)
    dg1_dc = g1 * u1 / s1**2      # derivative w.r.t. dip centre
    dg2_dc = g2 * u2 / s2**2
    J = np.empty((len(x), 7))
    J[:, 0] = -a1 * dg1_dc - a2 * dg2_dc
    J[:, 1] = a1 * dg1_dc - a2 * dg2_dc
    J[:, 2] = -g1
    J[:, 3] = -g2
    J[:, 4] = -a1 * g1 * u1**2 / s1**3
    J[:, 5] = -a2 * g2 * u2**2 / s2**3
    J[:, 6] = 1.0
    return J


def _noise_level(y):
    d = np.diff(y)
    mad = np.median(np.abs(d - np.median(d)))
    return max(1.4826 * mad / math.sqrt(2), 1e-12)


def _find_dips(x, y, baseline, threshold=5.0):
    """Two deepest resolvable local minima, searched over growing smoothing windows.

    A dip counts when both its depth below the baseline and its prominence
    exceed ``threshold`` times the noise of the smoothed curve. Returns the
    dip indices (0, 1 or 2 of them) and the smoothed curve they refer to.
    """
    n = len(y)
    noise = _noise_level(y)
    best = ([], y.copy())
    win = 1
    while win <= max(1, n // 10):
        ys = np.convolve(y, np.ones(win) / win, mode="same") if win > 1 else y.copy()
        # edges of a 'same' convolution are biased low; never pick dips there
        edge = win // 2
        if edge:
            ys[:edge] = y[:edge]
            ys[-edge:] = y[-edge:]
        level = threshold * noise / math.sqrt(win)
        # upper-quartile level of the raw data sits well above a smoothed flat
        # curve, so depth is measured against the smoothed curve's own level
        base_s = min(baseline, float(np.median(ys[ys >= np.median(ys)])))
        peaks, _ = find_peaks(-ys, prominence=level)
        peaks = [p for p in peaks if base_s - ys[p] > level and edge <= p < n - edge]
        peaks.sort(key=lambda p: ys[p])
        if len(peaks) >= 2:
            return sorted(peaks[:2]), ys
        if len(peaks) > len(best[0]):
            best = (peaks, ys)
        win = 2 * win + 1
    return sorted(best[0]), best[1]


def _half_width(x, ys, idx, baseline):
    depth = baseline - ys[idx]
    level = baseline - 0.5 * depth
    lo = idx
    while lo > 0 and ys[lo] < level:
        lo -= 1
    hi = idx
    while hi < len(ys) - 1 and ys[hi] < level:
        hi += 1
    fwhm = max(x[hi] - x[lo], 2 * (x[1] - x[0]))
    return fwhm / 2.3548


def _double_guesses(x, y, ys, dips, b0):
    """Starting points for the two-dip fit: the detected minima plus two
    symmetric splits of the broad dip seen in a heavily smoothed curve."""
    dx = x[1] - x[0]
    guesses = []
    i1, i2 = dips
    guesses.append([0.5 * (x[i1] + x[i2]), 0.5 * (x[i2] - x[i1]),
                    max(b0 - ys[i1], 1e-6), max(b0 - ys[i2], 1e-6),
                    _half_width(x, ys, i1, b0), _half_width(x, ys, i2, b0), b0])
    win = max(3, len(y) // 10) | 1
    yh = np.convolve(y, np.ones(win) / win, mode="same")
    yh[: win // 2] = y[: win // 2]
    yh[-(win // 2):] = y[-(win // 2):]
    k = int(np.argmin(yh))
    depth = max(b0 - yh[k], 1e-6)
    half = max(_half_width(x, yh, k, b0) * 1.1774, 2 * dx)   # HWHM
    for frac in (0.5, 0.8):
        e = frac * half
        guesses.append([x[k], e, depth, depth, max(half - e, 2 * dx) / 1.1774,
                        max(half - e, 2 * dx) / 1.1774, b0])
    return [np.array(g, dtype=float) for g in guesses]


def fit_esr(spec, max_nfev=2000):
    """Least-squares double-Gaussian fit of an ESR scan.

    Starts from the baseline (median of the upper quartile) and the two
    deepest local minima, plus a couple of symmetric starts; the lowest
    cost wins. With fewer than two resolvable dips a single Gaussian
    (e = 0) is fitted and the result is flagged ``degenerate``. Standard
    errors come from the Gauss-Newton curvature at the optimum.
    """
    f = spec.frequencies
    y = spec.i_pl
    if len(f) < 8:
        raise DomainError("ESR spectrum needs at least 8 points")
    f_ref = 0.5 * (f[0] + f[-1])
    x = (f - f_ref) / MHZ
    span = x[-1] - x[0]
    dx = float(np.min(np.diff(x)))
    w = 1.0 / (spec.sigma if spec.sigma is not None else np.ones_like(y))

    upper = y[y >= np.quantile(y, 0.75)]
    b0 = float(np.median(upper))
    dips, ys = _find_dips(x, y, b0)
    degenerate = len(dips) < 2

    lower = np.array([x[0], 0.0, 0.0, 0.0, dx, dx, 0.0])
    upper_b = np.array([x[-1], span, 2.0, 2.0, span, span, 2.0])
    if not degenerate:
        free = np.arange(7)
        starts = _double_guesses(x, y, ys, dips, b0)
    else:
        free = np.array([0, 2, 4, 6])
        i1 = dips[0] if dips else int(np.argmin(ys))
        starts = [np.array([x[i1], 0.0, max(b0 - ys[i1], 1e-6), 0.0,
                            _half_width(x, ys, i1, b0), 1.0, b0])]

    def expand(q, template):
        p = template.copy()
        p[free] = q
        if degenerate:
            p[1] = 0.0
            p[3] = 0.0
            p[5] = p[4]
        return p

    best = None
    for p0 in starts:
        p0 = np.clip(p0, lower + 1e-9, upper_b - 1e-9)

        def resid(q, p0=p0):
            return (_scaled_model(expand(q, p0), x)[0] - y) * w

        def jac(q, p0=p0):
            return _scaled_jac(expand(q, p0), x)[:, free] * w[:, None]

        sol = least_squares(resid, p0[free], jac=jac, bounds=(lower[free], upper_b[free]),
                            method="trf", x_scale="jac", xtol=1e-12, ftol=1e-12, gtol=1e-12,
                            max_nfev=max_nfev)
        if best is None or (sol.status > 0, -sol.cost) > (best[0].status > 0, -best[0].cost):
            best = (sol, p0)
    sol, p0 = best
    p = expand(sol.x, p0)

    n_free = len(free)
    dof = max(len(x) - n_free, 1)
    chi2 = float(np.sum(sol.fun**2))
    scale = chi2 / dof if spec.sigma is None else 1.0
    se = np.full(7, np.nan)
    try:
        cov = np.linalg.pinv(sol.jac.T @ sol.jac) * scale
        se[free] = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    except np.linalg.LinAlgError:
        pass
    if degenerate:
        se[1] = se[3] = 0.0
        se[5] = se[4]

    d, e, a1, a2, s1, s2, b = p
    unit = np.array([MHZ, MHZ, 1, 1, MHZ, MHZ, 1])
    stderr = {name: float(v * u) for name, v, u in zip(_PARAM_NAMES, se, unit)}

    grid = np.linspace(x[0], x[-1], max(4000, 20 * len(x)))
    grid = np.concatenate([grid, np.clip([d - e, d + e], x[0], x[-1])])
    fitted_min = float(np.min(_scaled_model(p, grid)[0]))
    contrast = max(b - fitted_min, 0.0)

    result = EsrFitResult(
        d_splitting=float(f_ref + d * MHZ), e_splitting=float(e * MHZ),
        a1=float(a1), a2=float(a2), sigma1=float(s1 * MHZ), sigma2=float(s2 * MHZ),
        baseline=float(b), contrast=contrast, standard_errors=stderr,
        degenerate=degenerate, converged=bool(sol.status > 0),
        residual_rms=float(np.sqrt(np.mean((_scaled_model(p, x)[0] - y) ** 2))),
    )
    if sol.status <= 0:
        raise FitError(f"ESR fit did not converge: {sol.message}", best=result)
    return result


# ---------------------------------------------------------------- thermometry

VALID_RANGE = (250.0, 700.0)
PRESSURE_COEFF = 1.5e3 / BAR     # Hz per Pa


@dataclass(frozen=True)
class NvThermometer:
    """Zero-field splitting vs temperature: D(T) = a0 + a1 T + a2 T^2 + a3 T^3 (GHz, K).

    ``pressure_coeff`` is in Hz/Pa and ``strain_shift`` in Hz; both add to D.
    """

    a0: float = 2.8697
    a1: float = 9.7e-5
    a2: float = -3.7e-7
    a3: float = 1.7e-10
    pressure_coeff: float = PRESSURE_COEFF
    strain_shift: float = 0.0
    valid_range: tuple = VALID_RANGE

    def __post_init__(self):
        lo, hi = self.valid_range
        if not 0 < lo < hi:
            raise DomainError(f"invalid temperature range {self.valid_range}")
        T = np.linspace(lo, hi, 2001)
        slope = self.a1 + 2 * self.a2 * T + 3 * self.a3 * T**2
        if np.any(slope >= 0):
            raise DomainError("D(T) must be strictly decreasing over the valid range")

    def polynomial_hz(self, t):
        t = np.asarray(t, dtype=float)
        return (self.a0 + t * (self.a1 + t * (self.a2 + t * self.a3))) * GHZ

    def slope_hz_per_k(self, t):
        return (self.a1 + 2 * self.a2 * t + 3 * self.a3 * t**2) * GHZ

    def shift_hz(self, gas_pressure):
        return self.pressure_coeff * gas_pressure + self.strain_shift

    def splitting_band(self, gas_pressure=0.0):
        """Admissible (D_min, D_max) in Hz over the valid range."""
        lo, hi = self.valid_range
        s = self.shift_hz(gas_pressure)
        return float(self.polynomial_hz(hi) + s), float(self.polynomial_hz(lo) + s)

    def with_strain(self, strain_shift):
        return replace(self, strain_shift=float(strain_shift))


def temperature_to_splitting(t, thermometer=None, gas_pressure=0.0):
    """Zero-field splitting (Hz) at temperature ``t`` (K)."""
    th = thermometer or NvThermometer()
    lo, hi = th.valid_range
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < lo) or np.any(t_arr > hi):
        raise DomainError(f"temperature {t} K outside the valid range [{lo}, {hi}] K")
    out = th.polynomial_hz(t_arr) + th.shift_hz(gas_pressure)
    return float(out) if out.ndim == 0 else out


def splitting_to_temperature(d_measured, thermometer=None, gas_pressure=0.0, xtol=1e-7):
    """Invert D(T): temperature (K) for a measured splitting ``d_measured`` (Hz)."""
    th = thermometer or NvThermometer()
    lo, hi = th.valid_range
    d_min, d_max = th.splitting_band(gas_pressure)
    d_measured = float(d_measured)
    if not d_min <= d_measured <= d_max:
        raise DomainError(
            f"D = {d_measured / GHZ:.7f} GHz outside the admissible band "
            f"[{d_min / GHZ:.7f}, {d_max / GHZ:.7f}] GHz for {lo}-{hi} K")
    target = (d_measured - th.shift_hz(gas_pressure)) / GHZ

    def g(t):
        return th.a0 + t * (th.a1 + t * (th.a2 + t * th.a3)) - target

    g_lo, g_hi = g(lo), g(hi)
    if g_lo * g_hi >= 0:
        # d sits on a band edge; rounding may push it a hair outside
        return lo if abs(g_lo) <= abs(g_hi) else hi
    return brentq(g, lo, hi, xtol=xtol, rtol=1e-15, maxiter=200)


@dataclass(frozen=True)
class StrainCalibration:
    strain_shift: float
    thermometer: NvThermometer
    powers: np.ndarray = field(compare=False)
    temperatures: np.ndarray = field(compare=False)
    slope: float = 0.0          # K / W
    intercept: float = 0.0      # K
    r_squared: float = 1.0
    slope_warning: bool = False

    def as_record(self):
        return {
            "strain_hz": self.strain_shift,
            "slope_k_per_w": self.slope,
            "intercept_k": self.intercept,
            "r_squared": self.r_squared,
            "slope_warning": self.slope_warning,
            "temperatures_k": [float(t) for t in self.temperatures],
            "powers_w": [float(p) for p in self.powers],
        }


def _line(x, y):
    X = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    ss = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss if ss > 0 else 1.0
    return float(coef[0]), float(coef[1]), float(r2)


STRAIN_BRACKET = (-20 * MHZ, 20 * MHZ)


def calibrate_strain(observations, thermometer=None, gas_pressure=0.0,
                     room_temperature=ROOM_TEMPERATURE, xtol=1e-3):
    """Strain shift (Hz) making the temperature-vs-power line hit room temperature at P = 0.

    ``observations`` is a sequence of (trap_power_W, d_measured_Hz). The
    search is over [-20, 20] MHz, narrowed to the strains for which every
    observation maps to a temperature inside the thermometer's range.
    """
    th = thermometer or NvThermometer()
    obs = np.asarray(observations, dtype=float)
    if obs.ndim != 2 or obs.shape[1] != 2:
        raise DomainError("observations must be (power, d_measured) pairs")
    powers, d = obs[:, 0], obs[:, 1]
    if len(np.unique(powers)) < 2:
        raise DomainError("strain calibration needs at least two distinct powers")

    base = th.with_strain(0.0)
    d_min, d_max = base.splitting_band(gas_pressure)
    # strain s admissible iff d_min <= d_i - s <= d_max for all i
    margin = 1e-3  # Hz, keeps rounding inside the band
    s_lo = max(STRAIN_BRACKET[0], float(np.max(d - d_max)) + margin)
    s_hi = min(STRAIN_BRACKET[1], float(np.min(d - d_min)) - margin)
    if s_lo >= s_hi:
        raise CalibrationError(
            "no strain in [-20, 20] MHz maps every observation into the thermometer range")

    def temps(s):
        cal = base.with_strain(s)
        return np.array([splitting_to_temperature(di, cal, gas_pressure, xtol=1e-9)
                         for di in d])

    def intercept_error(s):
        return _line(powers, temps(s))[0] - room_temperature

    e_lo, e_hi = intercept_error(s_lo), intercept_error(s_hi)
    if e_lo * e_hi > 0:
        raise CalibrationError(
            f"zero-power intercept cannot reach {room_temperature} K for strains in "
            f"[{s_lo / MHZ:.3f}, {s_hi / MHZ:.3f}] MHz")
    if e_lo == 0:
        strain = s_lo
    elif e_hi == 0:
        strain = s_hi
    else:
        strain = brentq(intercept_error, s_lo, s_hi, xtol=xtol, rtol=1e-15, maxiter=200)

    T = temps(strain)
    intercept, slope, r2 = _line(powers, T)
    warn = slope <= 0
    if warn:
        warnings.warn("temperature does not increase with trap power; check the data",
                      RuntimeWarning, stacklevel=2)
    return StrainCalibration(float(strain), base.with_strain(strain), powers, T,
                             slope, intercept, r2, warn)
