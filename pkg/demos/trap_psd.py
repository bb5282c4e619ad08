"""
Trapped-particle spectrum
=========================

Simulate a 100 kHz harmonic trap at 31 Torr, estimate the PSD and fit the
thermal oscillator model back.
"""

import numpy as np

from nanolev import (GasEnvironment, ParticleModel, TrapModel, damping_factor, estimate_psd,
                     fit_psd, simulate)
from nanolev.constants import K_B

particle = ParticleModel(47e-9)
gamma0 = damping_factor(particle, GasEnvironment.from_torr("air", 31))
trap = TrapModel(2 * np.pi * 100e3)

traj = simulate(particle, trap, gamma0, 296.0, dt=1e-7, n_steps=2_000_000, seed=1)
print("variance / equipartition:",
      np.var(traj.positions) / (K_B * 296 / (particle.mass * trap.omega_x**2)))

psd = estimate_psd(traj, segment_length=8192)
fit = fit_psd(psd, fmax=500e3)
print(f"fitted Omega_x/2pi = {fit.omega_x / (2 * np.pi) / 1e3:.2f} kHz "
      f"(true {trap.omega_x / (2 * np.pi) / 1e3:.2f})")
print(f"fitted Gamma0/2pi  = {fit.gamma0 / (2 * np.pi) / 1e3:.2f} kHz "
      f"(true {gamma0 / (2 * np.pi) / 1e3:.2f})")
print("temperature from S0:", fit.s0 * particle.mass / (2 * K_B), "K")
