"""Simulation and parameter estimation for optically levitated NV nanodiamonds."""

from .constants import K_B, TORR
from .dynamics import (EscapeStatistics, Trajectory, TrapModel, arrhenius_fit,
                       escape_experiment, simulate)
from .errors import CalibrationError, DomainError, FitError, InversionError
from .gaskin import (GasEnvironment, ParticleModel, Species, damping_factor,
                     knudsen_number, mean_free_path, radius_from_damping, viscosity)
from .nvesr import (EsrFitResult, EsrSpectrum, NvThermometer, StrainCalibration,
                    calibrate_strain, fit_esr, model_esr, splitting_to_temperature,
                    temperature_to_splitting)
from .psdfit import PsdEstimate, PsdFitResult, estimate_psd, fit_psd, locate_peak, model_psd
from .thermosense import (O2Calibration, PressureTempModel, fit_o2_calibration,
                          fit_pressure_temperature, infer_pressure, o2_count_difference,
                          surface_shell_thickness)

__version__ = "0.1.0"
