"""Pydantic request/response models for the HTTP service.

Field names and unit suffixes match the JSON file formats accepted by the
CLI, so the same payloads work in both places.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field


class CavityDesignIn(BaseModel):
    wavelength_nm: float = 369.5
    gamma_over_2pi_MHz: float = 10.0
    branching_ratio: float = 1.0
    roc_mm: float
    length_mm: float | None = None
    gap_um: float | None = None
    ion_height_um: float
    Tf_ppm: float
    Te_ppm: float = 0.0
    Lf_ppm: float = 0.0
    Le_ppm: float = 0.0
    fiber_waist_um: float

    def raw(self) -> dict:
        data = self.model_dump()
        if data.get("length_mm") is None:
            data.pop("length_mm", None)
        if data.get("gap_um") is None:
            data.pop("gap_um", None)
        return data


class CavityDerivedOut(BaseModel):
    finesse: float
    fsr_GHz: float
    kappa_over_2pi_MHz: float
    g_over_2pi_MHz: float
    cooperativity: float
    characteristic_length_mm: float
    characteristic_radius_um: float
    waist_um: float
    ion_mode_radius_um: float
    p_cavity: float
    mode_matching: float
    r_t: float
    p_fiber: float
    photon_timescale_ns: float


class SweepRequest(BaseModel):
    design: CavityDesignIn
    samples: int = Field(default=512, ge=8, le=8192)


class SweepPointOut(BaseModel):
    length_mm: float
    waist_um: float
    ion_mode_radius_um: float
    mode_matching: float
    p_cavity: float
    p_fiber: float


class SweepOut(BaseModel):
    points: list[SweepPointOut]
    argmin_r_ion_mm: float
    argmax_overlap_mm: float
    max_p_fiber: float
    argmax_p_fiber_mm: float


class CouplerRequest(BaseModel):
    cooperativity_passive_only: float = Field(gt=0)
    length_mm: float = Field(gt=0)
    characteristic_length_passive_only_mm: float = Field(gt=0)
    passive_loss_ppm: float = Field(gt=0)


class CouplerOut(BaseModel):
    coupler_fraction: float
    Tf_ppm: float
    p_fiber_unit_overlap_max: float


class StirapRequest(BaseModel):
    cooperativity: float = Field(ge=0)


class StirapOut(BaseModel):
    p_cavity: float


class FeasibilityRequest(BaseModel):
    design: CavityDesignIn
    hyperfine_splitting_GHz: float = Field(gt=0)
    linewidth_MHz: float = Field(gt=0)


class FeasibilityOut(BaseModel):
    required_length_mm: float
    design_length_mm: float
    length_matches: bool
    cavity_fwhm_MHz: float
    covers_linewidth: bool
    max_finesse: float
    feasible: bool


class EmissionRequest(BaseModel):
    transition: Literal["sigma_plus", "sigma_minus", "sigma", "pi"]
    theta_max_deg: float | None = Field(default=None, ge=0, le=180)
    numerical_aperture: float | None = Field(default=None, gt=0, le=1)


class EmissionOut(BaseModel):
    transition: str
    theta_max_deg: float
    fraction: float


class MirrorIn(BaseModel):
    shape: Literal["spherical", "parabolic"] = "spherical"
    roc_um: float | None = None
    focal_length_um: float | None = None
    theta_max_deg: float
    transition: Literal["sigma_plus", "sigma_minus", "sigma", "pi"] = "sigma_plus"
    wavelength_nm: float = 369.5
    analysis_plane_mm: float = 50.0
    vortex: bool | None = None
    phase_plate: bool = False
    ion_offset_um: float = 0.0
    n_theta: int = Field(default=512, ge=32, le=4096)
    n_phi: int = Field(default=256, ge=8, le=1024)

    def raw(self) -> dict:
        data = self.model_dump()
        if self.shape == "spherical":
            data.pop("focal_length_um", None)
        else:
            data.pop("roc_um", None)
        if data.get("vortex") is None:
            data.pop("vortex", None)
        return data


class GaussianFitOut(BaseModel):
    radius_mm: float
    curvature_radius_mm: float | None
    waist_um: float
    waist_position_mm: float
    jones: list[list[float]]


class CouplingOut(BaseModel):
    collected_fraction: float
    overlap: float
    coupling: float
    max_opd_lambda: float
    rayleigh_ok: bool
    fit: GaussianFitOut


class OpdOut(BaseModel):
    theta_deg: list[float]
    rho_mm: list[float]
    opd_lambda: list[float]
    max_opd_lambda: float
    rayleigh_ok: bool
    rayleigh_margin: float


class PhasePlateOut(BaseModel):
    rho_mm: list[float]
    thickness_um: list[float]
    refractive_index: float
    base_thickness_um: float
    corrected: CouplingOut


class ScaleStudyRequest(BaseModel):
    roc_um: list[float]
    theta_max_deg: float = 48.0
    transitions: list[Literal["sigma_plus", "sigma_minus", "sigma", "pi"]] = ["sigma_plus", "pi"]
    n_theta: int = Field(default=1024, ge=32, le=4096)
    n_phi: int = Field(default=32, ge=8, le=1024)


class ScaleStudyRow(BaseModel):
    roc_um: float
    analysis_plane_mm: float
    collected: dict[str, float]
    coupling: dict[str, float]


class BudgetColumnIn(BaseModel):
    label: str = ""
    detector_efficiency: float = Field(ge=0, le=1)
    decay_fraction: float | None = Field(default=None, ge=0, le=1)
    collected_fraction: float = Field(ge=0, le=1)
    mode_overlap: float = Field(ge=0, le=1)
    misc_efficiency: float = Field(ge=0, le=1)
    bell_id: float = 0.5
    repetition_rate_kHz: float = Field(gt=0)


class BudgetResultOut(BaseModel):
    label: str
    single_photon_efficiency: float
    coincidence_efficiency: float
    entanglement_rate_Hz: float


class BudgetRequest(BaseModel):
    columns: list[BudgetColumnIn]


class HealthOut(BaseModel):
    status: str
    version: str
