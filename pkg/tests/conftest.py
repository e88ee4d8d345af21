"""Shared fixtures: the heavy mirror analyses are computed once per session.

Azimuthal grids in tests are deliberately small (16-64 points): the fields
carry azimuthal orders |m| <= 3, which the uniform grid integrates exactly,
so nothing is lost against the 256-point production default.
"""

from __future__ import annotations

import math

import pytest

from ionfiber.cavity import CavityDesign, MirrorSpec, YB_ATOM
from ionfiber.beams import FiberMode, GaussianBeam
from ionfiber.dipole import TransitionKind
from ionfiber.mirrors import (
    MirrorProfile,
    corrected_wavefront,
    design_phase_plate,
    fiber_coupling,
)

WAVELENGTH = 369.5e-9


@pytest.fixture(scope="session")
def reference_design() -> CavityDesign:
    """Fiber-tip cavity of the worked example: RoC 5 mm, ion at 50 um,
    passive loss 1500 ppm, coupler at the computed optimum."""
    return CavityDesign(
        length=5e-3 - 0.5e-6,
        flat_mirror=MirrorSpec(transmission=9420.6e-6, passive_loss=750e-6),
        curved_mirror=MirrorSpec(transmission=0.0, passive_loss=750e-6, roc=5e-3),
        ion_height=50e-6,
        atom=YB_ATOM,
        fiber=FiberMode(GaussianBeam(YB_ATOM.wavelength, 1.5e-6)),
    )


@pytest.fixture(scope="session")
def sphere32_sigma():
    profile = MirrorProfile.spherical(160e-6, math.radians(32.0))
    return fiber_coupling(TransitionKind.SIGMA_PLUS, profile, n_theta=512, n_phi=64)


@pytest.fixture(scope="session")
def sphere48_pi():
    profile = MirrorProfile.spherical(160e-6, math.radians(48.0))
    return fiber_coupling(TransitionKind.PI, profile, n_theta=512, n_phi=64)


@pytest.fixture(scope="session")
def sphere48_pi_corrected():
    profile = MirrorProfile.spherical(160e-6, math.radians(48.0))
    return fiber_coupling(TransitionKind.PI, profile, correct=True, n_theta=512, n_phi=64)


@pytest.fixture(scope="session")
def sphere48_corrected_100mm(sphere48_pi):
    profile = MirrorProfile.spherical(160e-6, math.radians(48.0))
    plate = design_phase_plate(sphere48_pi.opd)
    opd, fit = corrected_wavefront(
        TransitionKind.PI, profile, plate, 50e-3, 100e-3, n_theta=512, n_phi=64
    )
    return opd


@pytest.fixture(scope="session")
def parabola_sigma_curve():
    """Sigma coupling of the parabola over rho0/f, including the deep-dish
    point at rho0/f = 20."""
    ratios = [0.5, 1.0, 2.0, 5.0, 10.0, 20.0]
    points = []
    for ratio in ratios:
        profile = MirrorProfile.parabolic(1e-3, 2.0 * math.atan(ratio / 2.0))
        result = fiber_coupling(TransitionKind.SIGMA_PLUS, profile, n_theta=512, n_phi=32)
        points.append((ratio, result))
    return points


@pytest.fixture(scope="session")
def scale_rows():
    from ionfiber.mirrors import scale_study

    return scale_study([1600e-6, 160e-6, 16e-6], math.radians(48.0), n_theta=1024, n_phi=32)
