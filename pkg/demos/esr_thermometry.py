"""
ESR thermometry
===============

Fit a synthetic double-dip scan, calibrate the strain shift from a
trap-power series and read off particle temperatures.
"""

import numpy as np

from nanolev import (EsrSpectrum, NvThermometer, calibrate_strain, fit_esr, model_esr,
                     splitting_to_temperature, temperature_to_splitting)

rng = np.random.default_rng(0)
f = np.linspace(2.84e9, 2.90e9, 1201)
truth = NvThermometer().with_strain(3e6)
d_true = temperature_to_splitting(330.0, truth)
y = model_esr(d_true, 5e6, 0.10, 0.09, 3e6, 3.5e6, 1.0, f) + 0.01 * rng.standard_normal(f.size)

fit = fit_esr(EsrSpectrum(f, y))
print(f"D = {fit.d_splitting / 1e9:.6f} GHz +/- {fit.standard_errors['d_splitting'] / 1e3:.0f} kHz,"
      f" E = {fit.e_splitting / 1e6:.2f} MHz, contrast {fit.contrast:.3f}")

# strain from a power series that extrapolates to room temperature
powers = np.linspace(0.05, 0.5, 10)
d_series = [temperature_to_splitting(296 + 120 * p, truth) + 0.05e6 * rng.standard_normal()
            for p in powers]
cal = calibrate_strain(list(zip(powers, d_series)))
print(f"strain shift {cal.strain_shift / 1e6:.2f} MHz (true 3.00), slope {cal.slope:.1f} K/W")

print("particle temperature:", splitting_to_temperature(fit.d_splitting, cal.thermometer), "K")
