"""Internal unit system and physical constants.

Every module works in the same internal units: energy in cm^-1, time in
ps, temperature in K, and the dimensionless transfer coordinate zeta for
positions.  Physical lengths enter only through the metres-per-unit-zeta
scale factor carried by the mass/length configuration, and masses are
expressed in the derived unit cm^-1 * ps^2 / cm^2 so that
p^2 / (2 m) comes out directly in cm^-1.

Constants are CODATA 2018 (all exact since the SI redefinition).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Exact SI values (CODATA 2018).
_H_SI = 6.62607015e-34          # J s
_KB_SI = 1.380649e-23           # J / K
_C_SI = 2.99792458e10           # cm / s

#: speed of light in cm/ps
SPEED_OF_LIGHT_CM_PER_PS = _C_SI * 1e-12

#: hc in J*cm, converts energy in J to wavenumber via E_J / HC_J_CM
HC_J_CM = _H_SI * _C_SI

#: reduced Planck constant in cm^-1 * ps
HBAR_CM1_PS = 1.0 / (2.0 * math.pi * SPEED_OF_LIGHT_CM_PER_PS)

#: Boltzmann constant in cm^-1 / K
KB_CM1_PER_K = _KB_SI / HC_J_CM

#: proton mass, kg
PROTON_MASS_KG = 1.67262192369e-27


def mass_from_kg(mass_kg: float) -> float:
    """Convert a mass in kg to internal units (cm^-1 * ps^2 / cm^2)."""
    # 1 kg = 1 J s^2 / m^2 = (1/hc) cm^-1 * 1e24 ps^2 * 1e-4 cm^-2
    return mass_kg / HC_J_CM * 1e20


#: proton mass in internal units
PROTON_MASS = mass_from_kg(PROTON_MASS_KG)


@dataclass(frozen=True)
class UnitSystem:
    """The shared constants of the internal (cm^-1, ps, K) unit system.

    Frozen so a single instance can be shared freely between threads.
    """

    hbar: float = HBAR_CM1_PS        # cm^-1 ps
    k_B: float = KB_CM1_PER_K        # cm^-1 / K
    c: float = SPEED_OF_LIGHT_CM_PER_PS  # cm / ps

    def wavenumber_to_angular_frequency(self, energy_cm1: float) -> float:
        """Convert an energy in cm^-1 to an angular frequency in rad/ps.

        Linear map omega = 2 pi c e; negative energies are allowed and map
        to negative frequencies.
        """
        return 2.0 * math.pi * self.c * energy_cm1

    def angular_frequency_to_wavenumber(self, omega_rad_ps: float) -> float:
        """Inverse of :meth:`wavenumber_to_angular_frequency`."""
        return omega_rad_ps / (2.0 * math.pi * self.c)

    def thermal_energy(self, temperature_K: float) -> float:
        """k_B * T in cm^-1.  Rejects negative temperatures."""
        if temperature_K < 0.0:
            raise ValueError(f"temperature must be >= 0 K, got {temperature_K}")
        return self.k_B * temperature_K


#: module-level default; all constants are immutable
UNITS = UnitSystem()


def wavenumber_to_angular_frequency(energy_cm1: float) -> float:
    return UNITS.wavenumber_to_angular_frequency(energy_cm1)


def angular_frequency_to_wavenumber(omega_rad_ps: float) -> float:
    return UNITS.angular_frequency_to_wavenumber(omega_rad_ps)


def thermal_energy(temperature_K: float) -> float:
    return UNITS.thermal_energy(temperature_K)
