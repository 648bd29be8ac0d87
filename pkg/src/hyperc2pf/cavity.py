"""Reflection of a single photon off a single-sided NV-centre cavity.

Only the steady-state, weak-excitation solution is modelled. A photon whose
polarization drives the spin's optical transition sees a "hot" cavity and
reflects with amplitude ``r``; otherwise it sees an empty ("cold") cavity and
reflects with ``r0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CavityParams:
    """Physical parameters of one NV-cavity unit.

    All rates and frequencies are angular frequencies in one common unit.
    """

    g: float
    kappa: float
    gamma: float
    omega_p: float = 0.0
    omega_c: float = 0.0
    omega_0: float = 0.0

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.g < 0:
            raise ValueError(f"g must be nonnegative, got {self.g}")

    def resonant(self) -> bool:
        return self.omega_p == self.omega_c == self.omega_0

    @property
    def coupling_ratio(self) -> float:
        """g / sqrt(kappa * gamma)."""
        return self.g / math.sqrt(self.kappa * self.gamma)

    def cold(self) -> "CavityParams":
        return CavityParams(0.0, self.kappa, self.gamma, self.omega_p, self.omega_c, self.omega_0)


@dataclass(frozen=True)
class ReflectionPair:
    """Reflection amplitudes for the coupled (``r``) and uncoupled (``r0``) cases."""

    r: complex
    r0: complex

    def __post_init__(self):
        object.__setattr__(self, "r", complex(self.r))
        object.__setattr__(self, "r0", complex(self.r0))
        if abs(self.r) > 1 + 1e-12 or abs(self.r0) > 1 + 1e-12:
            raise ValueError(f"reflection amplitudes must satisfy |r| <= 1, got {self.r}, {self.r0}")

    @classmethod
    def ideal_pair(cls) -> "ReflectionPair":
        return cls(1.0, -1.0)

    def ideal(self) -> bool:
        return self.r == 1 and self.r0 == -1

    @property
    def phi(self) -> float:
        return float(np.angle(self.r))

    @property
    def phi0(self) -> float:
        return float(np.angle(self.r0))


def reflection_coefficient(p: CavityParams) -> complex:
    """Steady-state reflection amplitude a_out / a_in at probe frequency ``omega_p``."""
    cav = 1j * (p.omega_c - p.omega_p)
    nv = 1j * (p.omega_0 - p.omega_p) + p.gamma / 2
    g2 = p.g * p.g
    return complex(((cav - p.kappa / 2) * nv + g2) / ((cav + p.kappa / 2) * nv + g2))


def reflection_pair(p: CavityParams) -> ReflectionPair:
    """Hot and cold reflection amplitudes for the same detunings."""
    return ReflectionPair(reflection_coefficient(p), reflection_coefficient(p.cold()))


def resonant_pair(coupling_ratio: float) -> ReflectionPair:
    """Reflection pair at omega_p = omega_c = omega_0 for g = x * sqrt(kappa*gamma).

    ``r = (4x^2 - 1) / (4x^2 + 1)`` and the cold cavity always gives ``-1``.
    """
    if coupling_ratio < 0:
        raise ValueError(f"coupling ratio must be nonnegative, got {coupling_ratio}")
    if math.isinf(coupling_ratio):
        return ReflectionPair(1.0, -1.0)
    x2 = 4.0 * coupling_ratio * coupling_ratio
    return ReflectionPair((x2 - 1.0) / (x2 + 1.0), -1.0)


def spin_photon_map(pair: ReflectionPair) -> np.ndarray:
    """Diagonal of the reflection map on the basis (R+, R-, L+, L-).

    R couples to the spin in |+>, L couples to the spin in |->.
    """
    return np.array([pair.r, pair.r0, pair.r0, pair.r], dtype=complex)
