"""
Escape from a Gaussian well
===========================

Monte Carlo escape rates at three temperatures and their Arrhenius slope.
"""

import numpy as np

from nanolev import ParticleModel, TrapModel, arrhenius_fit, escape_experiment
from nanolev.constants import K_B

particle = ParticleModel(47e-9)
barrier_k = 6 * 296.0
trap = TrapModel.gaussian(particle, barrier_k * K_B, waist=1e-6)
gamma0 = 0.5 * trap.omega_x

temps, rates = [], []
for ratio in (5.0, 5.5, 6.0):
    T = barrier_k / ratio
    st = escape_experiment(particle, trap, gamma0, T, max_time=0.5, n_trials=200, seed=int(T))
    print(f"E_b/kT = {ratio}: {st.n_escaped}/{st.n_trials} escaped, "
          f"rate {st.rate:.1f} +/- {st.rate_stderr:.1f} /s")
    temps.append(T)
    rates.append(st.rate)

slope, _, r2 = arrhenius_fit(temps, rates)
print(f"Arrhenius slope {slope:.0f} K (barrier {barrier_k:.0f} K), R^2 = {r2:.3f}")
