"""Angular emission patterns of the three dipole transitions.

The fields are the angular factors of the classical dipole far field with the
radial factor i e^{ikr}/r stripped; mode overlaps are invariant to that
global phase convention.  With the quantization axis along z:

    pi (dm = 0):      sqrt(3/8pi) sin(theta) on theta_hat
    sigma (dm = +-1): sqrt(3/16pi) e^{+-i phi} (+-cos(theta) theta_hat + i phi_hat)

Each pattern integrates to unit power over the full sphere.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

_SIGMA_AMP = math.sqrt(3.0 / (16.0 * math.pi))
_PI_AMP = math.sqrt(3.0 / (8.0 * math.pi))


class TransitionKind(enum.Enum):
    """Dipole transition, labelled by the change of magnetic quantum number."""

    SIGMA_PLUS = "sigma_plus"
    SIGMA_MINUS = "sigma_minus"
    PI = "pi"

    @classmethod
    def parse(cls, text: str) -> "TransitionKind":
        key = text.strip().lower().replace("-", "_").replace("+", "_plus")
        aliases = {
            "sigma_plus": cls.SIGMA_PLUS,
            "sigma": cls.SIGMA_PLUS,
            "sigma_minus": cls.SIGMA_MINUS,
            "pi": cls.PI,
        }
        if key not in aliases:
            raise ValueError(f"unknown transition kind: {text!r}")
        return aliases[key]

    @property
    def azimuthal_order(self) -> int:
        """Order m of the e^{i m phi} factor carried by the field."""
        return {TransitionKind.SIGMA_PLUS: 1, TransitionKind.SIGMA_MINUS: -1, TransitionKind.PI: 0}[self]


@dataclass(frozen=True)
class PolarizedField:
    """Transverse field sample on the local (theta_hat, phi_hat) or (x, y) basis."""

    e_theta: complex
    e_phi: complex
    theta: float
    phi: float
    basis: str = "spherical"

    @property
    def intensity(self) -> float:
        return abs(self.e_theta) ** 2 + abs(self.e_phi) ** 2


def polar_amplitudes(kind: TransitionKind, theta):
    """Polar-angle factors (t_theta, t_phi) such that the full field is
    (t_theta theta_hat + t_phi phi_hat) e^{i m phi}.  Vectorized in theta."""
    theta = np.asarray(theta, dtype=float)
    if kind is TransitionKind.PI:
        t_theta = _PI_AMP * np.sin(theta) + 0j
        t_phi = np.zeros_like(theta) + 0j
    elif kind is TransitionKind.SIGMA_PLUS:
        t_theta = _SIGMA_AMP * np.cos(theta) + 0j
        t_phi = 1j * _SIGMA_AMP * np.ones_like(theta)
    else:
        t_theta = -_SIGMA_AMP * np.cos(theta) + 0j
        t_phi = 1j * _SIGMA_AMP * np.ones_like(theta)
    return t_theta, t_phi


def dipole_farfield(kind: TransitionKind, theta: float, phi: float) -> PolarizedField:
    """Angular far-field factor of the transition at direction (theta, phi)."""
    if not 0.0 <= theta <= math.pi:
        raise ValueError(f"theta must lie in [0, pi], got {theta}")
    t_theta, t_phi = polar_amplitudes(kind, theta)
    phase = np.exp(1j * kind.azimuthal_order * phi)
    return PolarizedField(
        e_theta=complex(t_theta * phase),
        e_phi=complex(t_phi * phase),
        theta=theta,
        phi=phi,
    )


def angular_power_density(kind: TransitionKind, theta):
    """|E|^2 per solid angle; integrates to 1 over the sphere.  Vectorized."""
    theta = np.asarray(theta, dtype=float)
    if kind is TransitionKind.PI:
        return (3.0 / (8.0 * math.pi)) * np.sin(theta) ** 2
    return (3.0 / (16.0 * math.pi)) * (1.0 + np.cos(theta) ** 2)


def emission_fraction(kind: TransitionKind, theta_max: float) -> float:
    """Fraction of the total emitted power inside the cone theta <= theta_max.

    Closed forms from integrating the angular power density:
        sigma: (3/8) [(1 - c) + (1 - c^3)/3]
        pi:    (3/4) [2/3 - c + c^3/3]
    with c = cos(theta_max).
    """
    if not 0.0 <= theta_max <= math.pi:
        raise ValueError(f"theta_max must lie in [0, pi], got {theta_max}")
    c = math.cos(theta_max)
    if kind is TransitionKind.PI:
        value = (3.0 / 4.0) * (2.0 / 3.0 - c + c**3 / 3.0)
    else:
        value = (3.0 / 8.0) * ((1.0 - c) + (1.0 - c**3) / 3.0)
    return min(1.0, max(0.0, value))
