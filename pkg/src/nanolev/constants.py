"""Physical constants and unit conversions used across the package (SI)."""

K_B = 1.380649e-23          # J/K
N_A = 6.02214076e23         # 1/mol

TORR = 133.322              # Pa per Torr
BAR = 1.0e5                 # Pa per bar
GHZ = 1.0e9
MHZ = 1.0e6
KHZ = 1.0e3
NM = 1.0e-9

ROOM_TEMPERATURE = 296.0    # K
DIAMOND_DENSITY = 3510.0    # kg/m^3


def torr_to_pa(p):
    return p * TORR


def pa_to_torr(p):
    return p / TORR
