"""
Gas damping and particle size
=============================

Drag on a 47 nm diamond sphere across the pressure range, and the size
inferred back from a measured damping rate.
"""

import numpy as np

from nanolev import GasEnvironment, ParticleModel, damping_factor, radius_from_damping
from nanolev.gaskin import mean_free_path

particle = ParticleModel(47e-9)

# mean free path and damping rate from atmosphere down to 1 Torr
for torr in (760, 300, 100, 31, 10, 1):
    env = GasEnvironment.from_torr("air", torr)
    g = damping_factor(particle, env)
    print(f"{torr:5d} Torr  s = {mean_free_path(env) * 1e9:8.1f} nm  "
          f"Gamma0/2pi = {g / (2 * np.pi) / 1e3:8.2f} kHz")

# size from a damping rate measured at atmosphere
env = GasEnvironment.from_torr("air", 760)
for khz in (250, 500, 571):
    r = radius_from_damping(2 * np.pi * khz * 1e3, particle.density, env)
    print(f"Gamma0/2pi = {khz} kHz  ->  diameter {2 * r * 1e9:.1f} nm")
