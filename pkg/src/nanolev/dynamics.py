"""One-dimensional Langevin dynamics of a trapped particle.

The particle obeys

    m x'' = F_trap(x) - m Gamma0 x' + xi(t),   <xi(t) xi(t')> = 2 m Gamma0 kB T delta(t - t')

For a harmonic trap the (x, v) process is linear and Gaussian, so it is
propagated exactly over each step. For a finite-depth Gaussian well the
integrator is the symmetric O-B-A-B-O splitting, where O is the exact
Ornstein-Uhlenbeck update of the velocity over half a step.

Noise comes from numpy's counter-based Philox generator. Escape trials each
get their own stream spawned from the user seed, so results do not depend
on how trials are scheduled.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba
import numpy as np
from scipy.linalg import expm

from .constants import K_B
from .errors import DomainError

BLOCK = 1 << 16
ESCAPE_RADIUS_IN_WAISTS = 3.0
MAX_DT_FRACTION = 0.05
SPLITTING_DT_FRACTION = 0.02


def make_rng(seed):
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class TrapModel:
    """Trap with angular frequency ``omega_x`` (rad/s).

    ``depth`` is the barrier E_b in joules (``inf`` for a pure harmonic
    trap); ``waist`` is the 1/e^2 length of the Gaussian well
    U(x) = -E_b exp(-2 x^2 / w^2) and only matters for a finite depth.
    """

    omega_x: float
    depth: float = math.inf
    waist: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.omega_x) and self.omega_x > 0):
            raise DomainError(f"omega_x must be positive and finite, got {self.omega_x}")
        if not self.depth > 0:
            raise DomainError(f"depth must be positive or inf, got {self.depth}")
        if self.is_finite and not (self.waist is not None and self.waist > 0
                                   and math.isfinite(self.waist)):
            raise DomainError("a finite-depth trap needs a positive waist")

    @property
    def is_finite(self):
        return math.isfinite(self.depth)

    @classmethod
    def gaussian(cls, particle, depth, waist):
        """Gaussian well whose bottom curvature fixes omega_x = sqrt(4 E_b / (m w^2))."""
        omega = math.sqrt(4.0 * depth / (particle.mass * waist**2))
        return cls(omega, depth, waist)

    def potential(self, x):
        x = np.asarray(x, dtype=float)
        if not self.is_finite:
            raise DomainError("potential() of a harmonic trap needs the particle mass; "
                              "use 0.5 m omega^2 x^2")
        return -self.depth * np.exp(-2.0 * x**2 / self.waist**2)

    @property
    def escape_radius(self):
        return ESCAPE_RADIUS_IN_WAISTS * self.waist


@dataclass(frozen=True, eq=False)
class Trajectory:
    dt: float
    positions: np.ndarray
    velocities: np.ndarray
    seed: int

    def __post_init__(self):
        if len(self.positions) != len(self.velocities) or len(self.positions) < 2:
            raise DomainError("positions and velocities need equal length >= 2")

    def __len__(self):
        return len(self.positions)

    @property
    def times(self):
        return self.dt * np.arange(len(self.positions))


@dataclass(frozen=True, eq=False)
class EscapeStatistics:
    """Outcome of an escape experiment.

    ``times`` holds the escape time of each trial, or ``max_time`` for a
    censored trial (``escaped`` False). The rate is the censored-exponential
    maximum-likelihood estimate: number of escapes over total observed time.
    """

    times: np.ndarray
    escaped: np.ndarray
    max_time: float
    dt: float
    temperature: float
    seed: int

    @property
    def n_trials(self):
        return len(self.times)

    @property
    def n_escaped(self):
        return int(np.count_nonzero(self.escaped))

    @property
    def escape_fraction(self):
        return self.n_escaped / self.n_trials

    @property
    def mean_escape_time(self):
        if self.n_escaped == 0:
            return math.nan
        return float(np.mean(self.times[self.escaped]))

    @property
    def mean_escape_time_stderr(self):
        if self.n_escaped < 2:
            return math.nan
        t = self.times[self.escaped]
        return float(np.std(t, ddof=1) / math.sqrt(len(t)))

    @property
    def rate(self):
        return self.n_escaped / float(np.sum(self.times))

    @property
    def rate_stderr(self):
        if self.n_escaped == 0:
            return math.nan
        return self.rate / math.sqrt(self.n_escaped)


def _check_common(particle, trap, gamma0, temperature, dt):
    for name, val in (("gamma0", gamma0), ("temperature", temperature), ("dt", dt)):
        if not math.isfinite(val):
            raise DomainError(f"{name} must be finite, got {val}")
    if gamma0 <= 0:
        raise DomainError(f"gamma0 must be positive, got {gamma0}")
    if temperature < 0:
        raise DomainError(f"temperature must be non-negative, got {temperature}")
    if dt <= 0:
        raise DomainError(f"dt must be positive, got {dt}")
    limit = MAX_DT_FRACTION * min(2 * math.pi / trap.omega_x, 1.0 / gamma0)
    if dt >= limit:
        raise DomainError(f"dt = {dt:.3g} s too large; need dt < {limit:.3g} s")
    if trap.is_finite:
        expected = math.sqrt(4.0 * trap.depth / (particle.mass * trap.waist**2))
        if abs(expected - trap.omega_x) > 1e-6 * expected:
            raise DomainError(
                f"omega_x = {trap.omega_x:.6g} rad/s inconsistent with the Gaussian well "
                f"curvature ({expected:.6g} rad/s); build the trap with TrapModel.gaussian")


def exact_step_matrices(omega_x, gamma0, kT_over_m, dt):
    """Transition matrix F and noise factor L with X_{n+1} = F X_n + L z.

    The noise covariance follows from stationarity: Q = S - F S F^T with
    S = diag(kT/(m omega^2), kT/m).
    """
    A = np.array([[0.0, 1.0], [-omega_x**2, -gamma0]])
    F = expm(A * dt)
    S = np.diag([kT_over_m / omega_x**2, kT_over_m])
    Q = S - F @ S @ F.T
    Q = 0.5 * (Q + Q.T)
    w, V = np.linalg.eigh(Q)
    L = V @ np.diag(np.sqrt(np.clip(w, 0.0, None)))
    return F, L


@numba.njit(cache=True, nogil=True)
def _linear_block(F, L, x, v, z, xs, vs, start):
    f00, f01, f10, f11 = F[0, 0], F[0, 1], F[1, 0], F[1, 1]
    l00, l01, l10, l11 = L[0, 0], L[0, 1], L[1, 0], L[1, 1]
    for i in range(z.shape[0]):
        z0 = z[i, 0]
        z1 = z[i, 1]
        xn = f00 * x + f01 * v + l00 * z0 + l01 * z1
        vn = f10 * x + f11 * v + l10 * z0 + l11 * z1
        x = xn
        v = vn
        xs[start + i] = x
        vs[start + i] = v
    return x, v


@numba.njit(cache=True, nogil=True)
def _gauss_accel(x, acc_scale, inv_w2):
    return -acc_scale * x * math.exp(-2.0 * x * x * inv_w2)


@numba.njit(cache=True, nogil=True)
def _splitting_block(x, v, z, c, s, dt, acc_scale, inv_w2, boundary, xs, vs, start, record):
    # O-B-A-B-O; returns (x, v, steps done, escaped)
    a = _gauss_accel(x, acc_scale, inv_w2)
    half = 0.5 * dt
    for i in range(z.shape[0]):
        v = c * v + s * z[i, 0]
        v += half * a
        x += dt * v
        a = _gauss_accel(x, acc_scale, inv_w2)
        v += half * a
        v = c * v + s * z[i, 1]
        if record:
            xs[start + i] = x
            vs[start + i] = v
        if abs(x) > boundary:
            return x, v, i + 1, True
    return x, v, z.shape[0], False


def _ou_half_step(gamma0, kT_over_m, dt):
    c = math.exp(-0.5 * gamma0 * dt)
    s = math.sqrt(max(kT_over_m * (1.0 - c * c), 0.0))
    return c, s


def simulate(particle, trap, gamma0, temperature, dt, n_steps, seed):
    """Sample ``n_steps`` points of the center-of-mass motion at spacing ``dt``.

    Harmonic traps start from a draw of the stationary distribution and use
    exact Gaussian propagation. Finite-depth traps start at rest at the trap
    bottom and use the splitting integrator.
    """
    n_steps = int(n_steps)
    if n_steps < 2:
        raise DomainError(f"n_steps must be >= 2, got {n_steps}")
    _check_common(particle, trap, gamma0, temperature, dt)
    kT_over_m = K_B * temperature / particle.mass
    rng = make_rng(seed)
    xs = np.empty(n_steps)
    vs = np.empty(n_steps)

    if not trap.is_finite:
        F, L = exact_step_matrices(trap.omega_x, gamma0, kT_over_m, dt)
        x0, v0 = rng.standard_normal(2) * np.sqrt([kT_over_m / trap.omega_x**2, kT_over_m])
        xs[0], vs[0] = x0, v0
        x, v = x0, v0
        pos = 1
        while pos < n_steps:
            m = min(BLOCK, n_steps - pos)
            z = rng.standard_normal((m, 2))
            x, v = _linear_block(F, L, x, v, z, xs, vs, pos)
            pos += m
    else:
        c, s = _ou_half_step(gamma0, kT_over_m, dt)
        acc_scale = 4.0 * trap.depth / (particle.mass * trap.waist**2)
        inv_w2 = 1.0 / trap.waist**2
        xs[0] = vs[0] = 0.0
        x = v = 0.0
        pos = 1
        while pos < n_steps:
            m = min(BLOCK, n_steps - pos)
            z = rng.standard_normal((m, 2))
            x, v, _, _ = _splitting_block(x, v, z, c, s, dt, acc_scale, inv_w2,
                                          math.inf, xs, vs, pos, True)
            pos += m

    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(vs))):
        raise DomainError("trajectory diverged to non-finite values")
    return Trajectory(dt, xs, vs, int(seed))


def _one_escape(seed_seq, c, s, dt, acc_scale, inv_w2, boundary, max_steps):
    rng = np.random.Generator(np.random.Philox(seed_seq))
    dummy = np.empty(0)
    x = v = 0.0
    done = 0
    while done < max_steps:
        m = min(BLOCK, max_steps - done)
        z = rng.standard_normal((m, 2))
        x, v, taken, escaped = _splitting_block(x, v, z, c, s, dt, acc_scale, inv_w2,
                                                boundary, dummy, dummy, 0, False)
        done += taken
        if escaped:
            return done, True
    return max_steps, False


def default_escape_dt(trap, gamma0):
    """Largest convenient step inside both the splitting and the damping limits."""
    return min(SPLITTING_DT_FRACTION * 2 * math.pi / trap.omega_x, 0.04 / gamma0)


def escape_experiment(particle, trap, gamma0, temperature, max_time, n_trials, seed,
                      dt=None, workers=1):
    """Release ``n_trials`` particles at rest at the bottom of a Gaussian well.

    A trial ends when |x| passes the rim at three waists or at ``max_time``
    (censored). Every trial draws from its own Philox stream spawned from
    ``seed``; ``workers`` > 1 runs trials on threads with identical results.
    """
    if not trap.is_finite:
        raise DomainError("escape_experiment needs a finite-depth trap")
    n_trials = int(n_trials)
    if n_trials < 1:
        raise DomainError("n_trials must be >= 1")
    if not (math.isfinite(max_time) and max_time > 0):
        raise DomainError(f"max_time must be positive, got {max_time}")
    if dt is None:
        dt = default_escape_dt(trap, gamma0)
    _check_common(particle, trap, gamma0, temperature, dt)

    kT_over_m = K_B * temperature / particle.mass
    c, s = _ou_half_step(gamma0, kT_over_m, dt)
    acc_scale = 4.0 * trap.depth / (particle.mass * trap.waist**2)
    inv_w2 = 1.0 / trap.waist**2
    max_steps = int(math.ceil(max_time / dt))
    children = np.random.SeedSequence(seed).spawn(n_trials)

    def run(child):
        return _one_escape(child, c, s, dt, acc_scale, inv_w2, trap.escape_radius, max_steps)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, children))
    else:
        results = [run(ch) for ch in children]

    steps = np.array([r[0] for r in results], dtype=np.int64)
    escaped = np.array([r[1] for r in results], dtype=bool)
    times = np.where(escaped, steps * dt, max_steps * dt)
    return EscapeStatistics(times, escaped, max_steps * dt, dt, float(temperature), int(seed))


def arrhenius_fit(temperatures, rates):
    """Least-squares line ln(rate) = intercept + slope / T.

    Returns (slope, intercept, r_squared); slope is in kelvin, so
    ``-slope * K_B`` estimates the barrier in joules.
    """
    T = np.asarray(temperatures, dtype=float)
    y = np.log(np.asarray(rates, dtype=float))
    X = np.column_stack([np.ones_like(T), 1.0 / T])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    return float(coef[1]), float(coef[0]), float(r2)
