"""Entanglement-rate budgeting.

Composes single-photon collection efficiencies into two-photon coincidence
efficiencies and remote-entanglement generation rates.  Because the protocol
heralds on a coincidence of photons from both nodes, the coincidence
efficiency scales with the square of the single-photon efficiency.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .cavity import CavityDerived
from .dipole import TransitionKind, emission_fraction


class QubitScheme(enum.Enum):
    """Photonic qubit encoding plus the transition it rides on."""

    POLARIZATION_SIGMA = "polarization_sigma"
    FREQUENCY_SIGMA = "frequency_sigma"
    FREQUENCY_PI_PARALLEL = "frequency_pi_parallel"
    FREQUENCY_PI_PERPENDICULAR = "frequency_pi_perpendicular"

    @property
    def transition(self) -> TransitionKind:
        if self in (QubitScheme.POLARIZATION_SIGMA, QubitScheme.FREQUENCY_SIGMA):
            return TransitionKind.SIGMA_PLUS
        return TransitionKind.PI

    @property
    def is_frequency(self) -> bool:
        return self is not QubitScheme.POLARIZATION_SIGMA

    @property
    def decay_fraction(self) -> float:
        """Fraction of spontaneous decays through the useful transition."""
        return 2.0 / 3.0 if self.transition is TransitionKind.SIGMA_PLUS else 1.0 / 3.0


@dataclass(frozen=True)
class BudgetColumn:
    """One column of the rate comparison: every multiplicative factor from
    detector to repetition rate.  ``decay_fraction`` is None where the decay
    branching is not applicable (cavity-stimulated emission)."""

    label: str
    detector_efficiency: float
    decay_fraction: float | None
    collected_fraction: float
    mode_overlap: float
    misc_efficiency: float
    bell_id: float
    repetition_rate: float  # Hz

    def __post_init__(self):
        probs = {
            "detector_efficiency": self.detector_efficiency,
            "collected_fraction": self.collected_fraction,
            "mode_overlap": self.mode_overlap,
            "misc_efficiency": self.misc_efficiency,
            "bell_id": self.bell_id,
        }
        if self.decay_fraction is not None:
            probs["decay_fraction"] = self.decay_fraction
        for name, value in probs.items():
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if self.repetition_rate <= 0:
            raise ValueError("repetition rate must be positive")
        # Linear optics distinguishes at most two of the four Bell states.
        if self.bell_id not in (0.25, 0.5):
            raise ValueError(
                "bell_id is 1/4 (singlet only) or 1/2 (singlet + one triplet);"
                " construct the column explicitly to override"
            )


@dataclass(frozen=True)
class BudgetResult:
    single_photon_efficiency: float
    coincidence_efficiency: float
    entanglement_rate: float  # Hz


def evaluate_column(column: BudgetColumn) -> BudgetResult:
    """Single-photon efficiency (product of the per-photon factors),
    coincidence efficiency bell_id * single^2 and rate coincidence * R_rep."""
    single = (
        column.detector_efficiency
        * (column.decay_fraction if column.decay_fraction is not None else 1.0)
        * column.collected_fraction
        * column.mode_overlap
        * column.misc_efficiency
    )
    coincidence = column.bell_id * single**2
    return BudgetResult(
        single_photon_efficiency=single,
        coincidence_efficiency=coincidence,
        entanglement_rate=coincidence * column.repetition_rate,
    )


@dataclass(frozen=True)
class HardwareSpec:
    """Per-setup hardware factors that are inputs rather than physics."""

    detector_efficiency: float
    misc_efficiency: float
    repetition_rate: float
    bell_id: float = 0.5


def build_column_from_models(
    source: CavityDerived | float,
    scheme: QubitScheme,
    hardware: HardwareSpec,
    label: str = "",
    mode_overlap: float | None = None,
    numerical_aperture: float | None = None,
) -> BudgetColumn:
    """Bridge computed collection physics into a budget column.

    ``source`` is either a cavity evaluation (collected fraction r_t *
    P_cavity, overlap taken from the cavity-fiber mode matching unless
    overridden) or a numerical aperture (collected fraction from the dipole
    emission integral over the cone asin(NA); overlap must be supplied, e.g.
    from a mirror-coupling run or a measured value).

    Frequency qubits need the cavity free spectral range matched to the
    hyperfine splitting, which no short high-finesse cavity satisfies, so a
    cavity source combined with a frequency scheme is rejected.
    """
    if isinstance(source, CavityDerived):
        if scheme.is_frequency:
            raise ValueError("frequency qubits are not compatible with cavity collection")
        collected = source.r_t * source.p_cavity
        overlap = source.mode_matching if mode_overlap is None else mode_overlap
    else:
        na = float(source) if numerical_aperture is None else numerical_aperture
        if not 0.0 < na <= 1.0:
            raise ValueError("numerical aperture must lie in (0, 1]")
        if mode_overlap is None:
            raise ValueError("free-space columns need an explicit mode overlap")
        if scheme is QubitScheme.FREQUENCY_PI_PERPENDICULAR:
            raise ValueError(
                "perpendicular-axis collection is not computed by this model;"
                " supply the collected fraction directly via BudgetColumn"
            )
        collected = emission_fraction(scheme.transition, math.asin(na))
        overlap = mode_overlap
    return BudgetColumn(
        label=label or scheme.value,
        detector_efficiency=hardware.detector_efficiency,
        decay_fraction=None if isinstance(source, CavityDerived) else scheme.decay_fraction,
        collected_fraction=collected,
        mode_overlap=overlap,
        misc_efficiency=hardware.misc_efficiency,
        bell_id=hardware.bell_id,
        repetition_rate=hardware.repetition_rate,
    )
