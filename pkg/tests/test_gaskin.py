import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nanolev.constants import DIAMOND_DENSITY, TORR
from nanolev.errors import DomainError, InversionError
from nanolev.gaskin import (GasEnvironment, ParticleModel, Species, damping_factor,
                            knudsen_correction, mean_free_path, radius_from_damping,
                            stokes_damping, viscosity)

AIR_ATM = GasEnvironment("air", 101325.0, 296.0)


def eq2_oracle(r, pressure, T=296.0, eta=18.52e-6, rho=3510.0, molar=28.97e-3):
    # written out longhand, independent of the package
    kB, NA = 1.380649e-23, 6.02214076e23
    s = eta / pressure * math.sqrt(math.pi * kB * T / (2 * molar / NA))
    kn = s / r
    ck = 0.31 * kn / (0.785 + 1.152 * kn + kn**2)
    m = rho * 4 / 3 * math.pi * r**3
    return 6 * math.pi * eta * r / m * 0.619 / (0.619 + kn) * (1 + ck)


def test_environment_defaults():
    env = GasEnvironment()
    assert env.species is Species.AIR
    assert env.molar_mass == 28.97e-3
    assert env.viscosity_ref == 18.52e-6
    assert GasEnvironment("O2").molar_mass == 32.00e-3
    assert GasEnvironment("he").molar_mass == 4.003e-3


@pytest.mark.parametrize("kwargs", [
    dict(pressure=0.0), dict(pressure=-1.0), dict(bath_temperature=0.0),
    dict(molar_mass=-1.0), dict(pressure=math.nan),
])
def test_environment_rejects_bad_values(kwargs):
    with pytest.raises(DomainError):
        GasEnvironment(**kwargs)


def test_unknown_species():
    with pytest.raises(DomainError):
        GasEnvironment("argon")


def test_particle_mass():
    p = ParticleModel(50e-9)
    assert p.mass == pytest.approx(3510 * 4 / 3 * math.pi * (50e-9) ** 3, rel=1e-15)
    with pytest.raises(DomainError):
        ParticleModel(0.0)


def test_air_viscosity_reference_value():
    assert viscosity(AIR_ATM) == pytest.approx(18.52e-6, rel=1e-15)


def test_viscosity_pressure_independent():
    a = GasEnvironment.from_torr("air", 760)
    b = GasEnvironment.from_torr("air", 10)
    assert viscosity(a) == viscosity(b)


def test_viscosity_air_450K():
    # 18.52e-6 * (450/296)**1.5 * (296 + 110.4) / (450 + 110.4), evaluated by hand
    assert viscosity(GasEnvironment("air", 1e5, 450.0)) == pytest.approx(2.5175479967845598e-05,
                                                                        rel=1e-12)


def test_helium_power_law():
    he = GasEnvironment("helium", 1e5, 400.0)
    assert viscosity(he) == pytest.approx(19.6e-6 * (400 / 296) ** 0.647, rel=1e-12)


@pytest.mark.parametrize("T", [99.0, 1000.1])
def test_viscosity_out_of_range(T):
    with pytest.raises(DomainError):
        viscosity(GasEnvironment("air", 1e5, T))


def test_mean_free_path_atmosphere():
    assert mean_free_path(AIR_ATM) == pytest.approx(67e-9, rel=0.02)


def test_mean_free_path_inverse_pressure():
    s1 = mean_free_path(AIR_ATM)
    s2 = mean_free_path(AIR_ATM.with_pressure(AIR_ATM.pressure / 2))
    assert s2 == pytest.approx(2 * s1, rel=1e-14)


def test_mean_free_path_31_torr():
    # 67 nm * 101325 / 4133 ~ 1.64 um
    s = mean_free_path(GasEnvironment("air", 4133.0, 296.0))
    assert s == pytest.approx(1.64e-6, rel=0.01)


def test_damping_atmosphere_near_500kHz():
    g = damping_factor(ParticleModel(47e-9), GasEnvironment.from_torr("air", 760))
    assert g / (2 * math.pi) == pytest.approx(500e3, rel=0.15)


def test_damping_matches_longhand_formula():
    for torr in (760, 100, 31, 1):
        g = damping_factor(ParticleModel(47e-9), GasEnvironment.from_torr("air", torr))
        assert g == pytest.approx(eq2_oracle(47e-9, torr * TORR), rel=1e-12)


def test_damping_31_torr():
    g = damping_factor(ParticleModel(47e-9), GasEnvironment.from_torr("air", 31))
    assert g == pytest.approx(189315.2493377516, rel=1e-12)
    # the measured ~40 kHz at 31 Torr came from a hot particle; equilibrium
    # drag lands in the same range
    assert 0.7 < g / (2 * math.pi * 40e3) < 1.3


def test_stokes_limit():
    p = ParticleModel(5e-6)
    env = GasEnvironment("air", 1e7, 296.0)   # s ~ 0.7 nm << r
    assert damping_factor(p, env) == pytest.approx(stokes_damping(p, env), rel=1e-3)
    assert stokes_damping(p, env) == pytest.approx(4.5 * 18.52e-6 / (3510 * 25e-12), rel=1e-12)


def test_damping_monotone_in_pressure():
    p = ParticleModel(47e-9)
    pressures = np.logspace(-1, 6, 60)
    g = [damping_factor(p, AIR_ATM.with_pressure(P)) for P in pressures]
    assert np.all(np.diff(g) > 0)


def test_damping_monotone_decreasing_in_radius():
    radii = np.linspace(10e-9, 1e-6, 400)
    g = [damping_factor(ParticleModel(r), AIR_ATM) for r in radii]
    assert np.all(np.diff(g) < 0)


def test_free_molecular_limit_linear_in_pressure():
    p = ParticleModel(47e-9)
    low = AIR_ATM.with_pressure(1.0)     # Kn ~ 1.4e5 / 47 ~ 3000
    assert mean_free_path(low) / p.radius > 100
    for P in (0.5, 1.0, 5.0, 10.0):
        ratio = damping_factor(p, AIR_ATM.with_pressure(P)) / P
        assert ratio == pytest.approx(damping_factor(p, low) / 1.0, rel=0.01)


def test_knudsen_correction_bounded():
    kn = np.concatenate([[0.0], np.logspace(-4, 4, 5000)])
    ck = knudsen_correction(kn)
    assert np.all(ck >= 0)
    assert np.max(ck) <= 0.155


def test_radius_inversion_atmosphere():
    r = radius_from_damping(2 * math.pi * 500e3, DIAMOND_DENSITY, AIR_ATM)
    # the model itself gives ~104 nm; see the acceptance module for the 94 +/- 7 nm check
    assert 2 * r == pytest.approx(104.13e-9, rel=1e-3)


def test_radius_inversion_against_grid_scan():
    target = 2 * math.pi * 250e3
    r = radius_from_damping(target, DIAMOND_DENSITY, AIR_ATM)
    grid = np.arange(1e-9, 1e-6, 0.1e-9)
    vals = np.array([eq2_oracle(x, 101325.0) for x in grid])
    r_grid = grid[np.argmin(np.abs(vals - target))]
    assert abs(r - r_grid) <= 0.1e-9


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=2e-9, max_value=9e-6),
       st.floats(min_value=10.0, max_value=2e5))
def test_radius_round_trip(r, pressure):
    env = AIR_ATM.with_pressure(pressure)
    g = damping_factor(ParticleModel(r), env)
    r_back = radius_from_damping(g, DIAMOND_DENSITY, env)
    assert r_back == pytest.approx(r, rel=1e-9)
    g_back = damping_factor(ParticleModel(r_back), env)
    assert abs(g_back - g) / g < 1e-9


def test_radius_inversion_no_root():
    with pytest.raises(InversionError):
        radius_from_damping(1e30, DIAMOND_DENSITY, AIR_ATM)
    with pytest.raises(InversionError):
        radius_from_damping(1e-6, DIAMOND_DENSITY, AIR_ATM)


def test_radius_inversion_refused_out_of_equilibrium():
    with pytest.raises(DomainError, match="equilibrium"):
        radius_from_damping(1e6, DIAMOND_DENSITY, AIR_ATM, in_equilibrium=False)
