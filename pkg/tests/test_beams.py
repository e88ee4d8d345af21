import math

import pytest

from ionfiber.beams import FLAT, FiberMode, GaussianBeam, beam_geometry, circular_jones

WAVELENGTH = 369.5e-9


def test_waist_plane_is_flat():
    beam = GaussianBeam(WAVELENGTH, 2.4e-6)
    radius, curvature, gouy = beam_geometry(beam, 0.0)
    assert radius == pytest.approx(2.4e-6)
    assert math.isinf(curvature)
    assert gouy == 0.0


def test_radius_at_rayleigh_range():
    beam = GaussianBeam(WAVELENGTH, 2.4e-6)
    z_r = beam.rayleigh_range
    assert z_r == pytest.approx(48.97e-6, rel=1e-3)
    assert beam.radius(z_r) == pytest.approx(2.4e-6 * math.sqrt(2.0), rel=1e-12)


def test_far_field_divergence():
    beam = GaussianBeam(WAVELENGTH, 2.4e-6)
    z = 1e4 * beam.rayleigh_range
    # w(z) * pi w0 / (lambda z) -> 1 far beyond the Rayleigh range
    assert beam.radius(z) * math.pi * beam.waist_radius / (WAVELENGTH * z) == pytest.approx(
        1.0, abs=1e-6
    )


def test_gouy_phase_convention():
    beam = GaussianBeam(WAVELENGTH, 2.4e-6, waist_position=1e-3)
    z_r = beam.rayleigh_range
    # arctan(-(z - z0) / (2 zR)), kept from the source convention
    assert beam.gouy_phase(1e-3 + 2.0 * z_r) == pytest.approx(-math.atan(1.0))
    assert beam.gouy_phase(1e-3) == 0.0


def test_curvature_radius_sign_and_magnitude():
    beam = GaussianBeam(WAVELENGTH, 2.4e-6)
    z_r = beam.rayleigh_range
    assert beam.curvature_radius(z_r) == pytest.approx(2.0 * z_r, rel=1e-12)
    assert beam.curvature_radius(-z_r) == pytest.approx(-2.0 * z_r, rel=1e-12)


def test_from_plane_round_trip():
    beam = GaussianBeam(WAVELENGTH, 1.7e-6, waist_position=2.3e-5)
    z = 1.4e-4
    rebuilt = GaussianBeam.from_plane(WAVELENGTH, beam.radius(z), beam.curvature_radius(z), z)
    assert rebuilt.waist_radius == pytest.approx(beam.waist_radius, rel=1e-12)
    assert rebuilt.waist_position == pytest.approx(beam.waist_position, rel=1e-9)
    flat = GaussianBeam.from_plane(WAVELENGTH, 2e-6, FLAT, 0.5e-3)
    assert flat.waist_radius == pytest.approx(2e-6, rel=1e-12)
    assert flat.waist_position == pytest.approx(0.5e-3)


def test_invalid_parameters_rejected():
    with pytest.raises(ValueError):
        GaussianBeam(WAVELENGTH, -1e-6)
    with pytest.raises(ValueError):
        GaussianBeam(0.0, 1e-6)


def test_fiber_mode_normalizes_jones():
    fiber = FiberMode(GaussianBeam(WAVELENGTH, 1.5e-6), jones=(3.0, 4.0j))
    norm = abs(fiber.jones[0]) ** 2 + abs(fiber.jones[1]) ** 2
    assert norm == pytest.approx(1.0, abs=1e-12)
    a, b = circular_jones(+1)
    assert abs(a) ** 2 + abs(b) ** 2 == pytest.approx(1.0)
