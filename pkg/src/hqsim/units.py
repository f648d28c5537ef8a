"""Physical constants and unit conversions.

Energies inside the toolkit are carried in h*GHz unless a name says
otherwise. Real-space quantities (FCI) use nm and meV.
"""

from scipy import constants as _c

#: h*GHz per micro-electronvolt (1 ueV / h expressed in GHz).
GHZ_PER_UEV = _c.e * 1e-6 / _c.h / 1e9
#: h*GHz per milli-electronvolt.
GHZ_PER_MEV = GHZ_PER_UEV * 1e3

#: hbar^2 / (2 m_e) in meV*nm^2.
HBAR2_OVER_2ME = _c.hbar**2 / (2 * _c.m_e) / _c.e * 1e3 * 1e18
#: e^2 / (4 pi eps0) in meV*nm.
COULOMB_MEV_NM = _c.e / (4 * _c.pi * _c.epsilon_0) * 1e3 * 1e9

GAAS_M_STAR = 0.067
GAAS_KAPPA = 12.9


def uev_to_ghz(x):
    return x * GHZ_PER_UEV


def ghz_to_uev(x):
    return x / GHZ_PER_UEV


def mev_to_ghz(x):
    return x * GHZ_PER_MEV


def ghz_to_mev(x):
    return x / GHZ_PER_MEV
