import math

import numpy as np
import pytest

from protonwell import units

# 40-digit mpmath evaluations of 2*pi*c, 1/(2*pi*c), and k_B/(h c) with the
# exact SI constants, rounded to double precision
OMEGA_PER_CM1 = 0.18836515673088533
HBAR_REF = 5.308837458876145
KB_REF = 0.6950348004861274


def test_one_wavenumber_in_rad_per_ps():
    assert units.wavenumber_to_angular_frequency(1.0) == pytest.approx(
        OMEGA_PER_CM1, rel=1e-15
    )


def test_zero_maps_to_zero():
    assert units.wavenumber_to_angular_frequency(0.0) == 0.0
    assert units.thermal_energy(0.0) == 0.0


def test_negative_energy_is_linear():
    one = units.wavenumber_to_angular_frequency(1.0)
    assert units.wavenumber_to_angular_frequency(-10.0) == pytest.approx(
        -10.0 * one, rel=1e-15
    )


def test_conversions_additive():
    rng = np.random.default_rng(7)
    for a, b in rng.uniform(-5e3, 5e3, size=(50, 2)):
        fa = units.wavenumber_to_angular_frequency(a)
        fb = units.wavenumber_to_angular_frequency(b)
        fab = units.wavenumber_to_angular_frequency(a + b)
        assert fab == pytest.approx(fa + fb, rel=1e-13, abs=1e-15)


def test_round_trip_identity():
    rng = np.random.default_rng(11)
    for e in rng.uniform(-1e4, 1e4, size=100):
        back = units.angular_frequency_to_wavenumber(
            units.wavenumber_to_angular_frequency(e)
        )
        assert back == pytest.approx(e, rel=1e-14)


def test_hbar_and_boltzmann_constants():
    assert units.HBAR_CM1_PS == pytest.approx(HBAR_REF, rel=1e-15)
    assert units.KB_CM1_PER_K == pytest.approx(KB_REF, rel=1e-15)


def test_thermal_energy_values():
    # k_B * T by direct multiplication
    assert units.thermal_energy(200.0) == pytest.approx(139.00696009722548, rel=1e-14)
    assert units.thermal_energy(115.0) == pytest.approx(79.92900205590465, rel=1e-14)


def test_negative_temperature_rejected():
    with pytest.raises(ValueError):
        units.thermal_energy(-1.0)


def test_proton_mass_internal_units():
    # kinetic scale hbar^2/(2 m L^2) for L = 0.3 A computed two ways:
    # through internal units and directly in SI converted by 1/(h c)
    L_cm = 0.3e-8
    internal = units.HBAR_CM1_PS**2 / (2.0 * units.PROTON_MASS * L_cm**2)
    hbar_si = 6.62607015e-34 / (2.0 * math.pi)
    si = hbar_si**2 / (2.0 * units.PROTON_MASS_KG * (0.3e-10) ** 2) / units.HC_J_CM
    assert internal == pytest.approx(si, rel=1e-12)


def test_unit_system_is_frozen():
    with pytest.raises(Exception):
        units.UNITS.hbar = 1.0
