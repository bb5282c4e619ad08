import math

import numpy as np
import pytest

from nanolev.constants import K_B
from nanolev.dynamics import TrapModel, escape_experiment, simulate
from nanolev.gaskin import ParticleModel
from nanolev.psdfit import estimate_psd

ACCEPTANCE_LINES = []

# Underdamped scenario from the low-vacuum PSD: 100 kHz trap, 40 kHz damping.
TRAP_HZ = 100e3
GAMMA_HZ = 40e3
RADIUS = 47e-9
LONG_RUN_STEPS = 10**7
LONG_RUN_DT = 1e-7

# Escape scenario: 47 nm diamond sphere, 1 um Gaussian well, damping = Omega/2.
KRAMERS_BARRIER_T = 8 * 296.0     # E_b / kB in kelvin
KRAMERS_RATIOS = (6.0, 6.5, 7.0, 8.0)
KRAMERS_TRIALS = 500


@pytest.fixture(scope="session")
def particle():
    return ParticleModel(RADIUS)


@pytest.fixture(scope="session")
def long_trajectory(particle):
    trap = TrapModel(2 * math.pi * TRAP_HZ)
    return simulate(particle, trap, 2 * math.pi * GAMMA_HZ, 296.0, LONG_RUN_DT,
                    LONG_RUN_STEPS, seed=20170101)


@pytest.fixture(scope="session")
def long_psd(long_trajectory):
    return estimate_psd(long_trajectory, 8192, 0.5)


@pytest.fixture(scope="session")
def kramers_runs(particle):
    """Escape statistics keyed by E_b/kT, barrier fixed, temperature varied."""
    depth = KRAMERS_BARRIER_T * K_B
    trap = TrapModel.gaussian(particle, depth, 1e-6)
    gamma0 = 0.5 * trap.omega_x
    runs = {}
    for i, ratio in enumerate(KRAMERS_RATIOS):
        T = KRAMERS_BARRIER_T / ratio
        runs[ratio] = escape_experiment(particle, trap, gamma0, T, max_time=2.0,
                                        n_trials=KRAMERS_TRIALS, seed=1000 + i)
    return runs


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def synthetic_psd(seed, noise=0.05, n_averages=100, omega_x=2 * math.pi * TRAP_HZ,
                  gamma0=2 * math.pi * GAMMA_HZ, s0=None, df=500.0, n_bins=1000):
    """Analytic one-sided spectrum times chi-square(2*n_avg)/(2*n_avg) and 5% gain noise."""
    from nanolev.psdfit import PsdEstimate, model_psd
    if s0 is None:
        s0 = 2 * K_B * 296.0 / ParticleModel(RADIUS).mass
    rng = np.random.default_rng(seed)
    f = df * np.arange(1, n_bins + 1)
    truth = model_psd(s0, gamma0, omega_x, f)
    avg = rng.gamma(n_averages, 1.0 / n_averages, size=f.size)
    gain = 1.0 + noise * rng.standard_normal(f.size)
    return PsdEstimate(f, truth * avg * np.clip(gain, 0.05, None), n_averages), (s0, gamma0, omega_x)


# ESR scenario: dips at D -/+ E with 2E = 10 MHz, 3 and 3.5 MHz widths.
ESR_TRUTH = dict(d=2.8704e9, e=5e6, a1=0.10, a2=0.09, sigma1=3e6, sigma2=3.5e6, baseline=1.0)


def synthetic_esr(seed, noise=0.01, n_points=1201, span=(2.84e9, 2.90e9), **overrides):
    """Double-Gaussian scan with additive Gaussian noise of std ``noise``."""
    from nanolev.nvesr import EsrSpectrum, model_esr
    p = dict(ESR_TRUTH, **overrides)
    f = np.linspace(*span, n_points)
    y = model_esr(p["d"], p["e"], p["a1"], p["a2"], p["sigma1"], p["sigma2"],
                  p["baseline"], f)
    y = y + noise * np.random.default_rng(seed).standard_normal(n_points)
    return EsrSpectrum(f, y), p
