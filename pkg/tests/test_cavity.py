import math
from fractions import Fraction

import numpy as np
import pytest

from hyperc2pf.cavity import (
    CavityParams,
    ReflectionPair,
    reflection_coefficient,
    reflection_pair,
    resonant_pair,
    spin_photon_map,
)


def test_params_validation():
    with pytest.raises(ValueError):
        CavityParams(1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        CavityParams(1.0, 1.0, -1.0)
    with pytest.raises(ValueError):
        CavityParams(-0.1, 1.0, 1.0)
    assert CavityParams(1.0, 1.0, 1.0).resonant()
    assert not CavityParams(1.0, 1.0, 1.0, omega_p=0.1).resonant()


def test_resonant_cold_cavity_reflects_minus_one():
    assert reflection_coefficient(CavityParams(0.0, 2.0, 0.3)) == pytest.approx(-1)


def test_critical_coupling_gives_zero():
    kappa, gamma = 3.0, 0.7
    g = 0.5 * math.sqrt(kappa * gamma)
    assert abs(reflection_coefficient(CavityParams(g, kappa, gamma))) < 1e-15


def test_strong_coupling_value():
    kappa, gamma = 1.3, 0.2
    g = 5 * math.sqrt(kappa * gamma)
    assert reflection_coefficient(CavityParams(g, kappa, gamma)) == pytest.approx(99 / 101, abs=1e-14)
    assert resonant_pair(5).r == pytest.approx(99 / 101, abs=1e-15)


def test_detuned_cold_cavity_is_unimodular():
    kappa = 1.7
    r0 = reflection_coefficient(CavityParams(0.0, kappa, 0.4, omega_p=kappa))
    # (i*delta - kappa/2) / (i*delta + kappa/2) with delta = omega_c - omega_p = -kappa
    expected = (-1j * kappa - kappa / 2) / (-1j * kappa + kappa / 2)
    assert r0 == pytest.approx(expected, abs=1e-15)
    assert abs(r0) == pytest.approx(1.0, abs=1e-15)


def test_resonant_pair_limits():
    p = resonant_pair(0.5)
    assert p.r == 0 and p.r0 == -1
    assert resonant_pair(math.inf).ideal()
    assert abs(resonant_pair(1e4).r - 1) < 1e-8
    with pytest.raises(ValueError):
        resonant_pair(-1)


def test_resonant_formula_matches_general_expression():
    kappa, gamma = 0.9, 0.35
    for x in np.linspace(0, 10, 101):
        p = CavityParams(x * math.sqrt(kappa * gamma), kappa, gamma)
        assert abs(reflection_pair(p).r - resonant_pair(x).r) < 1e-12


def test_pair_rejects_gain():
    with pytest.raises(ValueError):
        ReflectionPair(1.01, -1)


def test_spin_photon_map():
    assert np.array_equal(spin_photon_map(ReflectionPair.ideal_pair()), [1, -1, -1, 1])
    assert np.array_equal(spin_photon_map(ReflectionPair(0, -1)), [0, -1, -1, 0])
    m = spin_photon_map(ReflectionPair(0.3j, 0.3j))
    assert np.allclose(m, 0.3j)


def test_exact_rational_at_x5():
    # (4x^2 - 1) / (4x^2 + 1) at x = 5, done in exact arithmetic
    x2 = Fraction(4 * 25)
    assert (x2 - 1) / (x2 + 1) == Fraction(99, 101)
