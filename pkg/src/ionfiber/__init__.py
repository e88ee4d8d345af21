"""ionfiber: design toolkit for collecting single photons from a trapped ion
into a single-mode fiber.

Subpackages cover Gaussian-beam and dipole-emission primitives (``beams``,
``dipole``, ``fields``), fiber-tip cavity design (``cavity``), high-NA mirror
collection with aberration correction (``mirrors``), entanglement-rate
budgeting (``budget``), plus a CLI and a FastAPI service wrapping the same
core functions.
"""

from .beams import FLAT, FiberMode, GaussianBeam, beam_geometry
from .cavity import (
    AtomSpec,
    CavityDesign,
    CavityDerived,
    MirrorSpec,
    YB_ATOM,
    concentric_bounds,
    cooperativity,
    characteristic_lengths,
    evaluate_design,
    finesse_from_loss,
    frequency_qubit_feasibility,
    geometry_from_gap,
    geometry_from_length,
    length_sweep,
    optimal_coupler,
    optimal_waist,
    p_cavity,
    qed_rates,
    scattering_loss,
    stirap_extraction,
    sweep_extrema,
)
from .dipole import TransitionKind, dipole_farfield, emission_fraction
from .fields import FieldMap, gaussian_overlap_analytic, mode_overlap, sample_gaussian
from .mirrors import (
    EmitterPose,
    GaussianFit,
    MirrorProfile,
    OpdProfile,
    PhasePlate,
    RayFan,
    TracedRay,
    apply_vortex,
    best_fit_gaussian,
    coupling_sweep,
    design_phase_plate,
    fiber_coupling,
    parabola_map,
    rayleigh_check,
    reflected_field,
    residual_opd,
    scale_study,
    sphere_trace,
)
from .budget import (
    BudgetColumn,
    BudgetResult,
    HardwareSpec,
    QubitScheme,
    build_column_from_models,
    evaluate_column,
)

__version__ = "0.1.0"
