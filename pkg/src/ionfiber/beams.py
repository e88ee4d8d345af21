"""Fundamental Gaussian beam arithmetic.

Everything downstream (cavity mode geometry, fiber modes, best-fit reference
wavefronts) is built on the ``GaussianBeam`` type defined here.  All functions
are pure and safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .constants import TWO_PI

FLAT = math.inf  # curvature radius of a flat wavefront


@dataclass(frozen=True)
class GaussianBeam:
    """A fundamental Gaussian mode propagating along the optical axis.

    Attributes
    ----------
    wavelength : float
        Vacuum wavelength in meters.
    waist_radius : float
        1/e field radius w0 at the waist, meters.
    waist_position : float
        Axial position z0 of the waist, meters.
    """

    wavelength: float
    waist_radius: float
    waist_position: float = 0.0

    def __post_init__(self):
        if self.wavelength <= 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")
        if self.waist_radius <= 0:
            raise ValueError(f"waist_radius must be positive, got {self.waist_radius}")

    @property
    def rayleigh_range(self) -> float:
        return math.pi * self.waist_radius**2 / self.wavelength

    @property
    def divergence(self) -> float:
        """Far-field half-angle divergence, lambda / (pi w0)."""
        return self.wavelength / (math.pi * self.waist_radius)

    @property
    def wavenumber(self) -> float:
        return TWO_PI / self.wavelength

    def radius(self, z: float) -> float:
        """Beam radius w(z) = w0 sqrt(1 + ((z - z0)/zR)^2)."""
        dz = z - self.waist_position
        return self.waist_radius * math.sqrt(1.0 + (dz / self.rayleigh_range) ** 2)

    def curvature_radius(self, z: float) -> float:
        """Wavefront curvature radius R(z); ``FLAT`` (inf) at the waist."""
        dz = z - self.waist_position
        if dz == 0.0:
            return FLAT
        return dz * (1.0 + (self.rayleigh_range / dz) ** 2)

    def gouy_phase(self, z: float) -> float:
        """Gouy phase arctan(-(z - z0) / (2 zR)).

        Note: this keeps the source convention with the factor of 2 in the
        denominator rather than the textbook arctan((z - z0)/zR).  Mode
        overlaps are invariant to the choice (a global phase at any fixed
        plane), so none of the reported efficiencies depend on it.
        """
        dz = z - self.waist_position
        return math.atan(-dz / (2.0 * self.rayleigh_range))

    @classmethod
    def from_plane(
        cls, wavelength: float, radius: float, curvature_radius: float, z: float
    ) -> "GaussianBeam":
        """Reconstruct the underlying beam from (w, R) measured at plane z.

        Inverts the complex beam parameter 1/q = 1/R - i lambda/(pi w^2).
        """
        if radius <= 0:
            raise ValueError("radius must be positive")
        inv_q = (0.0 if math.isinf(curvature_radius) else 1.0 / curvature_radius) - 1j * (
            wavelength / (math.pi * radius**2)
        )
        q = 1.0 / inv_q
        z_r = q.imag
        w0 = math.sqrt(z_r * wavelength / math.pi)
        return cls(wavelength=wavelength, waist_radius=w0, waist_position=z - q.real)


def beam_geometry(beam: GaussianBeam, z: float) -> tuple[float, float, float]:
    """Radius, wavefront curvature radius (``FLAT`` at the waist) and Gouy
    phase of ``beam`` at axial position ``z``."""
    return beam.radius(z), beam.curvature_radius(z), beam.gouy_phase(z)


@dataclass(frozen=True)
class FiberMode:
    """Gaussian approximation of a single-mode fiber with a uniform
    transverse polarization (normalized Jones vector)."""

    beam: GaussianBeam
    jones: tuple[complex, complex] = field(default=(1.0 + 0.0j, 0.0 + 0.0j))

    def __post_init__(self):
        norm = abs(self.jones[0]) ** 2 + abs(self.jones[1]) ** 2
        if not math.isclose(norm, 1.0, rel_tol=0, abs_tol=1e-9):
            a, b = self.jones
            s = math.sqrt(norm)
            if s == 0:
                raise ValueError("Jones vector must be nonzero")
            object.__setattr__(self, "jones", (a / s, b / s))

    @property
    def waist_radius(self) -> float:
        return self.beam.waist_radius


def circular_jones(handedness: int) -> tuple[complex, complex]:
    """Unit Jones vector (x + i s y)/sqrt(2) with s = +-1."""
    s = 1.0 if handedness >= 0 else -1.0
    r = 1.0 / math.sqrt(2.0)
    return (r + 0j, 1j * s * r)


def jones_overlap(a: tuple[complex, complex], b: tuple[complex, complex]) -> complex:
    return a[0].conjugate() * b[0] + a[1].conjugate() * b[1]
