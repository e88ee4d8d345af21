"""File formats and unit conversion.

Interchange rules: JSON for structured inputs and summaries, CSV for curves
and tables.  Every JSON key carries an explicit unit suffix (length_mm,
ion_height_um, gamma_over_2pi_MHz, Tf_ppm, ...), conversion to SI happens
here and nowhere else.  Floats are written with 9 significant digits and a
dot decimal separator so repeated runs are byte-identical.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

from .beams import FiberMode, GaussianBeam
from .cavity import AtomSpec, CavityDesign, CavityDerived, MirrorSpec
from .dipole import TransitionKind
from .mirrors import EmitterPose, MirrorProfile


def format_float(value: float) -> str:
    """Fixed 9-significant-digit rendering used in every CSV cell."""
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.9g}"


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_float(v) if isinstance(v, float) else v for v in row])


def write_json(path: str | Path, payload: Any) -> None:
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def apply_overrides(raw: dict, overrides: dict[str, str] | None) -> dict:
    """Apply repeatable --set key=value overrides onto a raw input mapping.

    Values are parsed as JSON when possible (numbers, booleans, objects),
    falling back to plain strings.  Overrides may introduce optional keys
    absent from the file; typos still fail loudly because every consumer
    validates its full key set.
    """
    if not overrides:
        return raw
    out = dict(raw)
    for key, text in overrides.items():
        try:
            out[key] = json.loads(text)
        except json.JSONDecodeError:
            out[key] = text
    return out


# ---------------------------------------------------------------------------
# cavity designs
# ---------------------------------------------------------------------------

_CAVITY_KEYS = {
    "wavelength_nm", "gamma_over_2pi_MHz", "branching_ratio", "roc_mm",
    "length_mm", "gap_um", "ion_height_um", "Tf_ppm", "Te_ppm", "Lf_ppm",
    "Le_ppm", "fiber_waist_um",
}


def cavity_design_from_dict(raw: dict) -> CavityDesign:
    """Build a CavityDesign from a unit-suffixed mapping.

    Either ``length_mm`` or ``gap_um`` (= RoC - length, preferred for
    near-concentric designs where forming the difference loses precision)
    must be present.
    """
    unknown = set(raw) - _CAVITY_KEYS
    if unknown:
        raise ValueError(f"unknown cavity design keys: {sorted(unknown)}")
    missing = {"wavelength_nm", "gamma_over_2pi_MHz", "roc_mm", "ion_height_um",
               "Tf_ppm", "fiber_waist_um"} - set(raw)
    if missing:
        raise ValueError(f"cavity design is missing keys: {sorted(missing)}")
    roc = float(raw["roc_mm"]) * 1e-3
    if "gap_um" in raw and "length_mm" in raw:
        raise ValueError("give either length_mm or gap_um, not both")
    if "gap_um" in raw:
        length = roc - float(raw["gap_um"]) * 1e-6
    elif "length_mm" in raw:
        length = float(raw["length_mm"]) * 1e-3
    else:
        raise ValueError("cavity design needs length_mm or gap_um")
    atom = AtomSpec.from_linewidth_mhz(
        wavelength=float(raw["wavelength_nm"]) * 1e-9,
        gamma_over_2pi_mhz=float(raw["gamma_over_2pi_MHz"]),
        branching_ratio=float(raw.get("branching_ratio", 1.0)),
    )
    return CavityDesign(
        length=length,
        flat_mirror=MirrorSpec(
            transmission=float(raw["Tf_ppm"]) * 1e-6,
            passive_loss=float(raw.get("Lf_ppm", 0.0)) * 1e-6,
        ),
        curved_mirror=MirrorSpec(
            transmission=float(raw.get("Te_ppm", 0.0)) * 1e-6,
            passive_loss=float(raw.get("Le_ppm", 0.0)) * 1e-6,
            roc=roc,
        ),
        ion_height=float(raw["ion_height_um"]) * 1e-6,
        atom=atom,
        fiber=FiberMode(GaussianBeam(atom.wavelength, float(raw["fiber_waist_um"]) * 1e-6)),
    )


def load_cavity_design(path: str | Path, overrides: dict[str, str] | None = None) -> CavityDesign:
    with open(path) as handle:
        raw = json.load(handle)
    return cavity_design_from_dict(apply_overrides(raw, overrides))


def derived_to_dict(derived: CavityDerived) -> dict:
    """Unit-suffixed summary of a cavity evaluation."""
    return {
        "finesse": derived.finesse,
        "fsr_GHz": derived.fsr / 1e9,
        "kappa_over_2pi_MHz": derived.kappa / (2.0 * math.pi) / 1e6,
        "g_over_2pi_MHz": derived.g / (2.0 * math.pi) / 1e6,
        "cooperativity": derived.cooperativity,
        "characteristic_length_mm": derived.characteristic_length * 1e3,
        "characteristic_radius_um": derived.characteristic_radius * 1e6,
        "waist_um": derived.waist_radius * 1e6,
        "ion_mode_radius_um": derived.ion_mode_radius * 1e6,
        "p_cavity": derived.p_cavity,
        "mode_matching": derived.mode_matching,
        "r_t": derived.r_t,
        "p_fiber": derived.p_fiber,
        "photon_timescale_ns": max(1.0 / derived.g, 1.0 / derived.kappa) * 1e9,
    }


# ---------------------------------------------------------------------------
# mirror configurations
# ---------------------------------------------------------------------------

_MIRROR_KEYS = {
    "shape", "roc_um", "focal_length_um", "theta_max_deg", "transition",
    "wavelength_nm", "analysis_plane_mm", "vortex", "phase_plate",
    "ion_offset_um", "n_theta", "n_phi", "sweep",
}


class MirrorRun:
    """Parsed mirror-analysis configuration (profile + transition + knobs)."""

    def __init__(self, raw: dict):
        unknown = set(raw) - _MIRROR_KEYS
        if unknown:
            raise ValueError(f"unknown mirror keys: {sorted(unknown)}")
        shape = raw.get("shape", "spherical")
        theta_max = math.radians(float(raw["theta_max_deg"]))
        if shape == "spherical":
            self.profile = MirrorProfile.spherical(float(raw["roc_um"]) * 1e-6, theta_max)
        elif shape == "parabolic":
            self.profile = MirrorProfile.parabolic(float(raw["focal_length_um"]) * 1e-6, theta_max)
        else:
            raise ValueError(f"unknown mirror shape {shape!r}")
        self.kind = TransitionKind.parse(raw.get("transition", "sigma_plus"))
        self.wavelength = float(raw.get("wavelength_nm", 369.5)) * 1e-9
        self.height = float(raw.get("analysis_plane_mm", 50.0)) * 1e-3
        self.vortex = raw.get("vortex")
        self.correct = bool(raw.get("phase_plate", False))
        self.pose = EmitterPose(float(raw.get("ion_offset_um", 0.0)) * 1e-6)
        self.n_theta = int(raw.get("n_theta", 512))
        self.n_phi = int(raw.get("n_phi", 256))
        self.sweep = raw.get("sweep")


def load_mirror_run(path: str | Path, overrides: dict[str, str] | None = None) -> MirrorRun:
    with open(path) as handle:
        raw = json.load(handle)
    return MirrorRun(apply_overrides(raw, overrides))


# ---------------------------------------------------------------------------
# budgets
# ---------------------------------------------------------------------------


def budget_columns_from_json(raw: list[dict]):
    from .budget import BudgetColumn

    columns = []
    for entry in raw:
        columns.append(
            BudgetColumn(
                label=str(entry.get("label", f"column {len(columns) + 1}")),
                detector_efficiency=float(entry["detector_efficiency"]),
                decay_fraction=None if entry.get("decay_fraction") is None else float(entry["decay_fraction"]),
                collected_fraction=float(entry["collected_fraction"]),
                mode_overlap=float(entry["mode_overlap"]),
                misc_efficiency=float(entry["misc_efficiency"]),
                bell_id=float(entry.get("bell_id", 0.5)),
                repetition_rate=float(entry["repetition_rate_kHz"]) * 1e3,
            )
        )
    return columns


def load_budget(path: str | Path):
    with open(path) as handle:
        raw = json.load(handle)
    if not isinstance(raw, list):
        raise ValueError("budget file must be a JSON array of columns")
    return budget_columns_from_json(raw)
