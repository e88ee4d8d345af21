"""Physical constants and material data used across the toolkit.

All internal quantities are SI (meters, radians, seconds, rad/s).  Unit
conversion from the nm/um/mm/MHz style used in input files happens at the
I/O boundary only.
"""

import math

C_LIGHT = 299_792_458.0  # m/s, exact
TWO_PI = 2.0 * math.pi

# Default transition wavelength of the Yb+ 2S1/2 <-> 2P1/2 cycling line.
DEFAULT_WAVELENGTH = 369.5e-9  # m


def fused_silica_index(wavelength: float) -> float:
    """Refractive index of fused silica from the Malitson (1965) Sellmeier fit.

    Valid for 0.21 um <= wavelength <= 3.71 um at room temperature.
    Evaluates to n = 1.47390 at 369.5 nm.
    """
    lam_um2 = (wavelength * 1e6) ** 2
    n2 = (
        1.0
        + 0.6961663 * lam_um2 / (lam_um2 - 0.0684043**2)
        + 0.4079426 * lam_um2 / (lam_um2 - 0.1162414**2)
        + 0.8974794 * lam_um2 / (lam_um2 - 9.896161**2)
    )
    return math.sqrt(n2)


# Index of the phase-plate substrate at the default wavelength.
FUSED_SILICA_INDEX_UV = fused_silica_index(DEFAULT_WAVELENGTH)
