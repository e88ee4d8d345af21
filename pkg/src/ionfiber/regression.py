"""Reference regression suite.

Recomputes every headline quantity of the design study (the cavity worked
example, the cavity length sweep, parabola and corrected-sphere coupling
curves, residual OPD and phase-plate synthesis, the mirror scale study and
the entanglement-rate budget) and grades them against the versioned
tolerance file shipped in ``data/acceptance_tolerances.json``.

The CLI exposes this as ``--paper-suite``; the test suite asserts the same
numbers independently.
"""

from __future__ import annotations

import importlib.resources
import json
import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .beams import FiberMode, GaussianBeam
from .budget import BudgetColumn, evaluate_column
from .cavity import (
    CavityDesign,
    MirrorSpec,
    YB_ATOM,
    characteristic_lengths,
    concentric_bounds,
    cooperativity,
    evaluate_design,
    finesse_from_loss,
    length_sweep,
    optimal_coupler,
    optimal_waist,
    stirap_extraction,
    sweep_extrema,
    default_sweep_lengths,
)
from .constants import DEFAULT_WAVELENGTH, TWO_PI
from .dipole import TransitionKind, emission_fraction
from .mirrors import (
    MirrorProfile,
    RayFan,
    corrected_wavefront,
    design_phase_plate,
    fiber_coupling,
    residual_opd,
)

#: Passive loss (fractions) of the reference fiber-tip cavity design.
REFERENCE_PASSIVE_LOSS = 1500e-6
REFERENCE_ROC = 5e-3
REFERENCE_ION_HEIGHT = 50e-6
REFERENCE_FIBER_WAIST = 1.5e-6

#: The six budget columns of the rate comparison (fractions as printed).
REFERENCE_BUDGET = [
    BudgetColumn("NA0.23 parallel sigma, polarization qubit", 0.2, 2.0 / 3.0, 0.0198, 0.82, 0.26, 0.25, 520e3),
    BudgetColumn("NA0.23 perpendicular pi, frequency qubit", 0.2, 1.0 / 3.0, 0.0198, 0.82, 0.25, 0.25, 75e3),
    BudgetColumn("NA0.6 parallel sigma, polarization qubit", 0.3, 2.0 / 3.0, 0.136, 0.85, 0.63, 0.5, 500e3),
    BudgetColumn("NA0.6 parallel pi, frequency qubit", 0.3, 1.0 / 3.0, 0.028, 0.32, 0.62, 0.5, 75e3),
    BudgetColumn("NA0.6 parallel sigma, frequency qubit", 0.3, 2.0 / 3.0, 0.136, 0.85, 0.63, 0.5, 75e3),
    BudgetColumn("fiber cavity, polarization qubit", 0.3, None, 0.337, 0.95, 0.63, 0.5, 500e3),
]

_BUDGET_CHECK_NAMES = [
    "budget_rate_na023_pol_sigma_Hz",
    "budget_rate_na023_freq_pi_Hz",
    "budget_rate_na06_pol_sigma_Hz",
    "budget_rate_na06_freq_pi_Hz",
    "budget_rate_na06_freq_sigma_Hz",
    "budget_rate_cavity_Hz",
]


def load_tolerances() -> dict[str, dict]:
    text = importlib.resources.files("ionfiber.data").joinpath("acceptance_tolerances.json").read_text()
    spec = json.loads(text)
    return {check["name"]: check for check in spec["checks"]}


def grade(name: str, value: float, tolerances: dict[str, dict]) -> dict:
    rule = tolerances[name]
    entry = {"name": name, "value": value, **{k: v for k, v in rule.items() if k != "name"}}
    passed = True
    if "target" in rule:
        if "rel" in rule:
            passed = abs(value - rule["target"]) <= rule["rel"] * abs(rule["target"])
        else:
            passed = abs(value - rule["target"]) <= rule["abs"]
    if "min" in rule:
        passed = passed and value > rule["min"]
    if "max" in rule:
        passed = passed and value < rule["max"]
    entry["passed"] = bool(passed)
    return entry


def reference_design(length: float | None = None, coupler_ppm: float | None = None) -> CavityDesign:
    """The worked-example fiber-tip cavity; coupler transmission defaults to
    the optimum for the reference constraints."""
    atom = YB_ATOM
    if coupler_ppm is None:
        f0 = finesse_from_loss(REFERENCE_PASSIVE_LOSS)
        w0 = optimal_waist(REFERENCE_ION_HEIGHT, atom.wavelength)
        r_ion = w0 * math.sqrt(2.0)
        c0 = cooperativity(f0, atom, r_ion)
        l_c0, _ = characteristic_lengths(f0, atom)
        _, t_f, _ = optimal_coupler(c0, 5e-3, l_c0, REFERENCE_PASSIVE_LOSS)
        coupler_ppm = t_f * 1e6
    if length is None:
        z_r = REFERENCE_ION_HEIGHT
        length = REFERENCE_ROC - z_r**2 / REFERENCE_ROC
    return CavityDesign(
        length=length,
        flat_mirror=MirrorSpec(coupler_ppm * 1e-6, REFERENCE_PASSIVE_LOSS / 2.0),
        curved_mirror=MirrorSpec(0.0, REFERENCE_PASSIVE_LOSS / 2.0, roc=REFERENCE_ROC),
        ion_height=REFERENCE_ION_HEIGHT,
        atom=YB_ATOM,
        fiber=FiberMode(GaussianBeam(YB_ATOM.wavelength, REFERENCE_FIBER_WAIST)),
    )


def worked_example() -> dict:
    """The full fiber-tip-cavity design chain from raw constraints."""
    atom = YB_ATOM
    f0 = finesse_from_loss(REFERENCE_PASSIVE_LOSS)
    w0 = optimal_waist(REFERENCE_ION_HEIGHT, atom.wavelength)
    r_ion = w0 * math.sqrt(2.0)
    c0 = cooperativity(f0, atom, r_ion)
    l_c0, _ = characteristic_lengths(f0, atom)
    r_t0, t_f, p_max = optimal_coupler(c0, 5e-3, l_c0, REFERENCE_PASSIVE_LOSS)
    design = reference_design()
    derived = evaluate_design(design)
    return {
        "finesse_passive_only": f0,
        "optimal_waist_um": w0 * 1e6,
        "ion_mode_radius_um": r_ion * 1e6,
        "cooperativity_passive_only": c0,
        "characteristic_length_passive_only_mm": l_c0 * 1e3,
        "coupler_fraction": r_t0,
        "coupler_transmission_ppm": t_f * 1e6,
        "p_fiber_unit_overlap_max": p_max,
        "finesse": derived.finesse,
        "cooperativity": derived.cooperativity,
        "characteristic_length_mm": derived.characteristic_length * 1e3,
        "characteristic_radius_um": derived.characteristic_radius * 1e6,
        "kappa_over_2pi_MHz": derived.kappa / TWO_PI / 1e6,
        "g_over_2pi_MHz": derived.g / TWO_PI / 1e6,
        "p_cavity": derived.p_cavity,
        "mode_matching": derived.mode_matching,
        "p_fiber": derived.p_fiber,
    }


def cavity_sweep_rows(samples: int = 512) -> tuple[list[tuple], dict]:
    design = reference_design()
    lengths = default_sweep_lengths(design, samples)
    points = length_sweep(design, lengths)
    rows = [
        (p.length * 1e3, p.waist_radius * 1e6, p.ion_mode_radius * 1e6,
         p.mode_matching, p.p_cavity, p.p_fiber)
        for p in points
    ]
    ex = sweep_extrema(design, samples)
    summary = {
        "argmin_r_ion_mm": ex.length_min_r_ion * 1e3,
        "argmax_overlap_mm": ex.length_max_overlap * 1e3,
        "max_p_fiber": ex.max_p_fiber,
        "argmax_p_fiber_mm": ex.length_max_p_fiber * 1e3,
    }
    return rows, summary


def parabola_curve(ratios=None, n_theta: int = 512, n_phi: int = 64) -> list[tuple]:
    """Collimated fraction and fiber coupling versus aperture rho0/f for the
    parabolic mirror, sigma without and pi with the azimuthal converter."""
    if ratios is None:
        ratios = np.geomspace(0.25, 20.0, 16)
    rows = []
    for ratio in ratios:
        theta_max = 2.0 * math.atan(float(ratio) / 2.0)
        profile = MirrorProfile.parabolic(1e-3, theta_max)
        sigma = fiber_coupling(TransitionKind.SIGMA_PLUS, profile, n_theta=n_theta, n_phi=n_phi)
        pi = fiber_coupling(TransitionKind.PI, profile, n_theta=n_theta, n_phi=n_phi)
        rows.append(
            (float(ratio), sigma.collected_fraction, pi.collected_fraction,
             sigma.efficiency, pi.efficiency)
        )
    return rows


def _corrected_sphere_point(args) -> tuple:
    theta_deg, roc, height, n_theta, n_phi = args
    profile = MirrorProfile.spherical(roc, math.radians(theta_deg))
    out = [theta_deg]
    for kind in (TransitionKind.SIGMA_PLUS, TransitionKind.PI):
        corrected = fiber_coupling(kind, profile, height, correct=True, n_theta=n_theta, n_phi=n_phi)
        out.append(corrected.efficiency)
    parabola = MirrorProfile.parabolic(1e-3, math.radians(theta_deg))
    for kind in (TransitionKind.SIGMA_PLUS, TransitionKind.PI):
        out.append(fiber_coupling(kind, parabola, n_theta=n_theta, n_phi=n_phi).efficiency)
    return tuple(out)


def corrected_sphere_curve(
    theta_deg=None, roc: float = 160e-6, height: float = 50e-3,
    n_theta: int = 512, n_phi: int = 64, workers: int = 1,
) -> list[tuple]:
    """Coupling of the phase-plate-corrected sphere versus aperture angle,
    with the parabola at the same angles for comparison."""
    if theta_deg is None:
        theta_deg = np.arange(16.0, 50.0 + 1e-9, 4.0)
    jobs = [(float(t), roc, height, n_theta, n_phi) for t in theta_deg]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_corrected_sphere_point, jobs))
    return [_corrected_sphere_point(job) for job in jobs]


def sphere_opd_study(n_theta: int = 512, n_phi: int = 64) -> dict:
    """Residual OPD of the 160 um mirror at 32 and 48 degrees, the corrector
    plate for the 48 degree pi beam and the corrected-wavefront checks."""
    out = {}
    p32 = MirrorProfile.spherical(160e-6, math.radians(32.0))
    sigma32 = fiber_coupling(TransitionKind.SIGMA_PLUS, p32, n_theta=n_theta, n_phi=n_phi)
    out["sigma32"] = sigma32
    p48 = MirrorProfile.spherical(160e-6, math.radians(48.0))
    pi48 = fiber_coupling(TransitionKind.PI, p48, n_theta=n_theta, n_phi=n_phi)
    out["pi48"] = pi48
    plate = design_phase_plate(pi48.opd)
    out["plate"] = plate
    pi48_corr = fiber_coupling(TransitionKind.PI, p48, correct=True, n_theta=n_theta, n_phi=n_phi)
    out["pi48_corrected"] = pi48_corr
    opd100, _ = corrected_wavefront(
        TransitionKind.PI, p48, plate, 50e-3, 100e-3, n_theta=n_theta, n_phi=n_phi
    )
    out["corrected_opd_100mm"] = opd100
    return out


def scale_study_rows(n_theta: int = 1024, n_phi: int = 32) -> list[dict]:
    from .mirrors import scale_study

    return scale_study(
        [1600e-6, 160e-6, 16e-6], math.radians(48.0), n_theta=n_theta, n_phi=n_phi
    )


def budget_rows() -> list[tuple]:
    rows = []
    for column in REFERENCE_BUDGET:
        result = evaluate_column(column)
        rows.append(
            (column.label, column.detector_efficiency,
             "" if column.decay_fraction is None else column.decay_fraction,
             column.collected_fraction, column.mode_overlap, column.misc_efficiency,
             column.bell_id, column.repetition_rate / 1e3,
             result.single_photon_efficiency, result.coincidence_efficiency,
             result.entanglement_rate)
        )
    return rows


def run_reference_suite(workers: int = 1, samples: int = 512) -> dict:
    """Compute every artifact of the regression suite and grade the headline
    values against the tolerance file.  Returns artifacts + checks."""
    tolerances = load_tolerances()
    checks: list[dict] = []
    atom = YB_ATOM

    example = worked_example()
    for name in (
        "finesse_passive_only", "cooperativity_passive_only",
        "characteristic_length_passive_only_mm", "coupler_fraction",
        "coupler_transmission_ppm", "finesse", "cooperativity",
        "characteristic_length_mm", "characteristic_radius_um",
        "kappa_over_2pi_MHz", "g_over_2pi_MHz", "p_cavity",
        "p_fiber_unit_overlap_max",
    ):
        checks.append(grade(name, example[name], tolerances))

    sweep_rows, sweep_summary = cavity_sweep_rows(samples)
    checks.append(grade("sweep_max_p_fiber", sweep_summary["max_p_fiber"], tolerances))
    checks.append(grade("sweep_argmin_r_ion_mm", sweep_summary["argmin_r_ion_mm"], tolerances))
    checks.append(grade("sweep_argmax_overlap_mm", sweep_summary["argmax_overlap_mm"], tolerances))

    stirap = stirap_extraction(0.65)
    checks.append(grade("stirap_extraction", stirap, tolerances))
    checks.append(grade("stirap_fiber", stirap * 0.82 * 0.864, tolerances))

    low, high = concentric_bounds(REFERENCE_ROC, atom, 570.0)
    checks.append(grade("concentric_lower", low, tolerances))
    checks.append(grade("concentric_upper", high, tolerances))

    for name, kind, angle in (
        ("emission_sigma_48deg", TransitionKind.SIGMA_PLUS, math.radians(48.0)),
        ("emission_pi_48deg", TransitionKind.PI, math.radians(48.0)),
        ("emission_sigma_32deg", TransitionKind.SIGMA_PLUS, math.radians(32.0)),
        ("emission_sigma_na06", TransitionKind.SIGMA_PLUS, math.asin(0.6)),
        ("emission_pi_na06", TransitionKind.PI, math.asin(0.6)),
        ("emission_sigma_na023", TransitionKind.SIGMA_PLUS, math.asin(0.23)),
    ):
        checks.append(grade(name, emission_fraction(kind, angle), tolerances))

    parabola_rows = parabola_curve()
    deep = MirrorProfile.parabolic(1e-3, 2.0 * math.atan(10.0))
    fan = RayFan(deep, 512)
    flat = GaussianBeam(DEFAULT_WAVELENGTH, 1e-3, waist_position=deep.plane_z(50e-3))
    parabola_opd = residual_opd(fan, flat, 50e-3, TransitionKind.SIGMA_PLUS)
    checks.append(grade("parabola_max_opd_lambda", float(np.abs(parabola_opd.opd_lambda).max()), tolerances))
    no_vortex = fiber_coupling(TransitionKind.PI, deep, vortex=False, n_theta=256, n_phi=32)
    checks.append(grade("parabola_pi_no_vortex_coupling", no_vortex.efficiency, tolerances))
    sigma20 = fiber_coupling(TransitionKind.SIGMA_PLUS, deep, n_theta=512, n_phi=32)
    checks.append(grade("parabola_sigma_coupling_rho20", sigma20.efficiency, tolerances))
    checks.append(grade("parabola_sigma_coupling_bound", sigma20.efficiency, tolerances))

    opd_study = sphere_opd_study()
    checks.append(grade("sphere32_max_opd_lambda", opd_study["sigma32"].opd.max_abs, tolerances))
    checks.append(grade("sphere32_sigma_coupling", opd_study["sigma32"].efficiency, tolerances))
    checks.append(grade("sphere48_max_opd_lambda", opd_study["pi48"].opd.max_abs, tolerances))
    checks.append(grade("sphere48_pi_coupling", opd_study["pi48"].efficiency, tolerances))
    checks.append(grade("sphere48_pi_corrected_coupling", opd_study["pi48_corrected"].efficiency, tolerances))
    checks.append(grade("sphere48_corrected_opd_50mm", opd_study["pi48_corrected"].opd.max_abs, tolerances))
    checks.append(grade("sphere48_corrected_opd_100mm", opd_study["corrected_opd_100mm"].max_abs, tolerances))

    scale_rows = scale_study_rows()
    by_roc = {round(r["roc_m"] * 1e6): r for r in scale_rows}
    checks.append(grade("scale_collected_sigma", by_roc[160]["collected_sigma_plus"], tolerances))
    checks.append(grade("scale_collected_pi", by_roc[160]["collected_pi"], tolerances))
    checks.append(grade("scale16_sigma_coupling", by_roc[16]["coupling_sigma_plus"], tolerances))
    checks.append(grade("scale16_pi_coupling", by_roc[16]["coupling_pi"], tolerances))
    checks.append(grade("scale1600_sigma_coupling", by_roc[1600]["coupling_sigma_plus"], tolerances))
    checks.append(grade("scale1600_pi_coupling", by_roc[1600]["coupling_pi"], tolerances))

    budget = budget_rows()
    for name, row in zip(_BUDGET_CHECK_NAMES, budget):
        checks.append(grade(name, row[-1], tolerances))

    corrected_curve = corrected_sphere_curve(workers=workers)

    return {
        "worked_example": example,
        "cavity_sweep": {"rows": sweep_rows, "summary": sweep_summary},
        "parabola_curve": parabola_rows,
        "corrected_sphere_curve": corrected_curve,
        "opd_study": opd_study,
        "scale_study": scale_rows,
        "budget": budget,
        "checks": checks,
        "all_passed": all(c["passed"] for c in checks),
    }
