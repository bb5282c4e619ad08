"""
Gas sensing models
==================

Heating in rarefied gas, oxygen detection by count difference, and the
depth of the quenched surface shell.
"""

import numpy as np

from nanolev import (fit_o2_calibration, fit_pressure_temperature, infer_pressure,
                     surface_shell_thickness)
from nanolev.constants import TORR

rng = np.random.default_rng(3)

# heating curve through 300 K at 760 Torr and 450 K at 31 Torr, 0.5% scatter
torr = np.array([760, 300, 100, 50, 31])
alpha = 150 / (1 / 31 - 1 / 760)
temps = (300 - alpha / 760 + alpha / torr) * (1 + 0.005 * rng.standard_normal(torr.size))
model = fit_pressure_temperature(np.column_stack([torr * TORR, temps]))
print(f"T0 = {model.t0:.1f} K, alpha = {model.alpha_k_torr:.0f} K Torr, "
      f"max residual {100 * model.max_relative_residual:.1f}%")

p = np.linspace(20, 760, 12)
counts = 100 * p * (1 + 0.05 * rng.standard_normal(p.size))
cal = fit_o2_calibration(p * TORR, counts)
print(f"O2 slope {cal.slope_per_torr:.1f} photons/Torr/s")
print("pressure for 15000 photons/s:", infer_pressure(cal, 15000.0) / TORR, "Torr")

for ratio in (0.512, 0.4, 0.343):
    print(f"count ratio {ratio}: shell {surface_shell_thickness(ratio, 50e-9) * 1e9:.1f} nm")
