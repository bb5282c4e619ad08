"""Gas kinetics for a sphere levitated in a rarefied gas.

Viscosity from Sutherland's law (power law for helium), the mean free
path, the Knudsen number and the slip-corrected viscous damping rate of a
sphere, plus the inverse problem: hydrodynamic radius from a measured
damping rate.

All quantities are SI. Damping rates are angular (rad/s); divide by 2*pi
for the linewidth in Hz.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from scipy.optimize import brentq

from .constants import DIAMOND_DENSITY, K_B, N_A, ROOM_TEMPERATURE, TORR
from .errors import DomainError, InversionError

T_REF = ROOM_TEMPERATURE
T_MIN, T_MAX = 100.0, 1000.0

RADIUS_BRACKET = (1e-9, 10e-6)


class Species(str, enum.Enum):
    AIR = "air"
    OXYGEN = "oxygen"
    HELIUM = "helium"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower()
        aliases = {"o2": "oxygen", "he": "helium"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise DomainError(f"unknown gas species {name!r}") from None


# molar mass kg/mol, viscosity at T_REF (Pa s), Sutherland constant (K) or None
_GAS_TABLE = {
    Species.AIR: (28.97e-3, 18.52e-6, 110.4),
    Species.OXYGEN: (32.00e-3, 20.50e-6, 127.0),
    Species.HELIUM: (4.003e-3, 19.6e-6, None),
}
HELIUM_EXPONENT = 0.647


@dataclass(frozen=True)
class GasEnvironment:
    """Gas species at a given pressure (Pa) and bath temperature (K)."""

    species: Species = Species.AIR
    pressure: float = 101325.0
    bath_temperature: float = ROOM_TEMPERATURE
    molar_mass: float = field(default=None)
    viscosity_ref: float = field(default=None)

    def __post_init__(self):
        species = Species.parse(self.species)
        object.__setattr__(self, "species", species)
        mm, eta, _ = _GAS_TABLE[species]
        if self.molar_mass is None:
            object.__setattr__(self, "molar_mass", mm)
        if self.viscosity_ref is None:
            object.__setattr__(self, "viscosity_ref", eta)
        for name in ("pressure", "bath_temperature", "molar_mass", "viscosity_ref"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value <= 0:
                raise DomainError(f"{name} must be positive and finite, got {value}")
            object.__setattr__(self, name, value)

    @classmethod
    def from_torr(cls, species, pressure_torr, bath_temperature=ROOM_TEMPERATURE):
        return cls(species, pressure_torr * TORR, bath_temperature)

    @property
    def molecule_mass(self):
        return self.molar_mass / N_A

    @property
    def pressure_torr(self):
        return self.pressure / TORR

    def with_pressure(self, pressure):
        return GasEnvironment(self.species, pressure, self.bath_temperature,
                              self.molar_mass, self.viscosity_ref)


@dataclass(frozen=True)
class ParticleModel:
    """Homogeneous sphere: hydrodynamic radius (m) and density (kg/m^3)."""

    radius: float
    density: float = DIAMOND_DENSITY

    def __post_init__(self):
        for name in ("radius", "density"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value <= 0:
                raise DomainError(f"{name} must be positive and finite, got {value}")
            object.__setattr__(self, name, value)

    @property
    def mass(self):
        return self.density * 4.0 / 3.0 * math.pi * self.radius**3

    @property
    def diameter(self):
        return 2.0 * self.radius


def viscosity(env):
    """Dynamic viscosity (Pa s) at the bath temperature; pressure independent."""
    T = env.bath_temperature
    if not T_MIN <= T <= T_MAX:
        raise DomainError(f"viscosity model valid for {T_MIN}-{T_MAX} K, got {T} K")
    sutherland = _GAS_TABLE[env.species][2]
    if sutherland is None:
        return env.viscosity_ref * (T / T_REF) ** HELIUM_EXPONENT
    return env.viscosity_ref * (T / T_REF) ** 1.5 * (T_REF + sutherland) / (T + sutherland)


def mean_free_path(env):
    """Mean free path s = (eta/P) sqrt(pi kB T / (2 m_gas)), in meters."""
    T = env.bath_temperature
    return viscosity(env) / env.pressure * math.sqrt(math.pi * K_B * T / (2.0 * env.molecule_mass))


def knudsen_number(particle, env):
    return mean_free_path(env) / particle.radius


def knudsen_correction(kn):
    """The c_K term of the slip-corrected drag; bounded in [0, 0.107]."""
    return 0.31 * kn / (0.785 + 1.152 * kn + kn * kn)


def stokes_damping(particle, env):
    """Continuum (Kn -> 0) damping 6 pi eta r / m in rad/s."""
    return 6.0 * math.pi * viscosity(env) * particle.radius / particle.mass


def damping_factor(particle, env):
    """Viscous damping rate Gamma0 (rad/s) of a sphere in the gas.

    Stokes drag scaled by the slip factor 0.619/(0.619 + Kn) and by
    (1 + c_K), which interpolates between the continuum and the free
    molecular limit.
    """
    kn = knudsen_number(particle, env)
    slip = 0.619 / (0.619 + kn)
    return stokes_damping(particle, env) * slip * (1.0 + knudsen_correction(kn))


def radius_from_damping(gamma0, density, env, in_equilibrium=True, rtol=1e-12):
    """Hydrodynamic radius (m) whose damping rate equals ``gamma0`` (rad/s).

    Only meaningful when the particle is in thermal equilibrium with the
    gas; a hot particle in low vacuum drags differently and the inversion
    is refused.
    """
    if not in_equilibrium:
        raise DomainError(
            "radius inversion requires the particle to be in thermal equilibrium "
            "with the gas; the damping model does not hold for a hot particle")
    gamma0 = float(gamma0)
    if not math.isfinite(gamma0) or gamma0 <= 0:
        raise DomainError(f"gamma0 must be positive, got {gamma0}")

    def residual(r):
        return damping_factor(ParticleModel(r, density), env) - gamma0

    lo, hi = RADIUS_BRACKET
    f_lo, f_hi = residual(lo), residual(hi)
    if f_lo * f_hi > 0:
        g_lo, g_hi = f_lo + gamma0, f_hi + gamma0
        raise InversionError(
            f"gamma0 = {gamma0:.4g} rad/s is outside the achievable range "
            f"[{g_hi:.4g}, {g_lo:.4g}] rad/s for radii {lo:g}-{hi:g} m")
    return brentq(residual, lo, hi, xtol=1e-18, rtol=rtol, maxiter=500)
