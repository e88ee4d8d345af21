"""FastAPI service exposing the design toolkit.

Every endpoint is a thin wrapper over the core package; the CLI drives the
same functions in-process.  Invalid physics inputs surface as 422 responses
with the underlying message.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..cavity import (
    evaluate_design,
    frequency_qubit_feasibility,
    length_sweep,
    optimal_coupler,
    stirap_extraction,
    sweep_extrema,
    default_sweep_lengths,
)
from ..dipole import TransitionKind, emission_fraction
from ..io import budget_columns_from_json, cavity_design_from_dict, derived_to_dict, MirrorRun
from ..budget import evaluate_column
from ..mirrors import (
    design_phase_plate,
    fiber_coupling,
    rayleigh_check,
    scale_study,
)
from . import schemas


def _fit_out(result) -> schemas.GaussianFitOut:
    fit = result.fit
    curvature = None if fit.curvature == 0.0 else (1.0 / fit.curvature) * 1e3
    return schemas.GaussianFitOut(
        radius_mm=fit.radius * 1e3,
        curvature_radius_mm=curvature,
        waist_um=fit.beam.waist_radius * 1e6,
        waist_position_mm=fit.beam.waist_position * 1e3,
        jones=[[j.real, j.imag] for j in fit.jones],
    )


def _coupling_out(result) -> schemas.CouplingOut:
    ok, _ = rayleigh_check(result.opd)
    return schemas.CouplingOut(
        collected_fraction=result.collected_fraction,
        overlap=result.overlap,
        coupling=result.efficiency,
        max_opd_lambda=result.opd.max_abs,
        rayleigh_ok=ok,
        fit=_fit_out(result),
    )


def _run_mirror(payload: schemas.MirrorIn):
    run = MirrorRun(payload.raw())
    return run, fiber_coupling(
        run.kind, run.profile, run.height, run.wavelength, pose=run.pose,
        vortex=run.vortex, correct=run.correct, n_theta=run.n_theta, n_phi=run.n_phi,
    )


def create_app() -> FastAPI:
    app = FastAPI(
        title="ionfiber",
        version=__version__,
        description="Single-photon collection design service: fiber-tip "
        "cavities, high-NA mirror optics and entanglement-rate budgets.",
    )

    @app.exception_handler(ValueError)
    async def value_error_handler(request, exc):  # noqa: ANN001
        raise HTTPException(status_code=422, detail=str(exc))

    @app.get("/health", response_model=schemas.HealthOut)
    def health():
        return schemas.HealthOut(status="ok", version=__version__)

    @app.post("/cavity/evaluate", response_model=schemas.CavityDerivedOut)
    def cavity_evaluate(payload: schemas.CavityDesignIn):
        design = cavity_design_from_dict(payload.raw())
        return schemas.CavityDerivedOut(**derived_to_dict(evaluate_design(design)))

    @app.post("/cavity/sweep", response_model=schemas.SweepOut)
    def cavity_sweep(payload: schemas.SweepRequest):
        design = cavity_design_from_dict(payload.design.raw())
        lengths = default_sweep_lengths(design, payload.samples)
        points = [
            schemas.SweepPointOut(
                length_mm=p.length * 1e3,
                waist_um=p.waist_radius * 1e6,
                ion_mode_radius_um=p.ion_mode_radius * 1e6,
                mode_matching=p.mode_matching,
                p_cavity=p.p_cavity,
                p_fiber=p.p_fiber,
            )
            for p in length_sweep(design, lengths)
        ]
        ex = sweep_extrema(design, payload.samples)
        return schemas.SweepOut(
            points=points,
            argmin_r_ion_mm=ex.length_min_r_ion * 1e3,
            argmax_overlap_mm=ex.length_max_overlap * 1e3,
            max_p_fiber=ex.max_p_fiber,
            argmax_p_fiber_mm=ex.length_max_p_fiber * 1e3,
        )

    @app.post("/cavity/optimal-coupler", response_model=schemas.CouplerOut)
    def coupler(payload: schemas.CouplerRequest):
        r_t0, t_f, p_max = optimal_coupler(
            payload.cooperativity_passive_only,
            payload.length_mm * 1e-3,
            payload.characteristic_length_passive_only_mm * 1e-3,
            payload.passive_loss_ppm * 1e-6,
        )
        return schemas.CouplerOut(
            coupler_fraction=r_t0, Tf_ppm=t_f * 1e6, p_fiber_unit_overlap_max=p_max
        )

    @app.post("/cavity/stirap", response_model=schemas.StirapOut)
    def stirap(payload: schemas.StirapRequest):
        return schemas.StirapOut(p_cavity=stirap_extraction(payload.cooperativity))

    @app.post("/cavity/feasibility", response_model=schemas.FeasibilityOut)
    def feasibility(payload: schemas.FeasibilityRequest):
        design = cavity_design_from_dict(payload.design.raw())
        report = frequency_qubit_feasibility(
            design,
            payload.hyperfine_splitting_GHz * 1e9,
            payload.linewidth_MHz * 1e6,
        )
        return schemas.FeasibilityOut(
            required_length_mm=report.required_length * 1e3,
            design_length_mm=report.design_length * 1e3,
            length_matches=report.length_matches,
            cavity_fwhm_MHz=report.cavity_fwhm_hz / 1e6,
            covers_linewidth=report.covers_linewidth,
            max_finesse=report.max_finesse,
            feasible=report.feasible,
        )

    @app.post("/emission", response_model=schemas.EmissionOut)
    def emission(payload: schemas.EmissionRequest):
        kind = TransitionKind.parse(payload.transition)
        if (payload.theta_max_deg is None) == (payload.numerical_aperture is None):
            raise HTTPException(
                status_code=422,
                detail="give exactly one of theta_max_deg or numerical_aperture",
            )
        if payload.theta_max_deg is not None:
            theta = math.radians(payload.theta_max_deg)
        else:
            theta = math.asin(payload.numerical_aperture)
        return schemas.EmissionOut(
            transition=kind.value,
            theta_max_deg=math.degrees(theta),
            fraction=emission_fraction(kind, theta),
        )

    @app.post("/mirror/coupling", response_model=schemas.CouplingOut)
    def mirror_coupling(payload: schemas.MirrorIn):
        _, result = _run_mirror(payload)
        return _coupling_out(result)

    @app.post("/mirror/opd", response_model=schemas.OpdOut)
    def mirror_opd(payload: schemas.MirrorIn):
        _, result = _run_mirror(payload)
        opd = result.opd
        ok, margin = rayleigh_check(opd)
        return schemas.OpdOut(
            theta_deg=[math.degrees(t) for t in opd.theta],
            rho_mm=[r * 1e3 for r in opd.rho],
            opd_lambda=list(opd.opd_lambda),
            max_opd_lambda=opd.max_abs,
            rayleigh_ok=ok,
            rayleigh_margin=margin,
        )

    @app.post("/mirror/phase-plate", response_model=schemas.PhasePlateOut)
    def mirror_phase_plate(payload: schemas.MirrorIn):
        run = MirrorRun(payload.raw())
        uncorrected = fiber_coupling(
            run.kind, run.profile, run.height, run.wavelength, pose=run.pose,
            vortex=run.vortex, correct=False, n_theta=run.n_theta, n_phi=run.n_phi,
        )
        plate = design_phase_plate(uncorrected.opd)
        corrected = fiber_coupling(
            run.kind, run.profile, run.height, run.wavelength, pose=run.pose,
            vortex=run.vortex, correct=True, n_theta=run.n_theta, n_phi=run.n_phi,
        )
        return schemas.PhasePlateOut(
            rho_mm=[r * 1e3 for r in plate.rho],
            thickness_um=[t * 1e6 for t in plate.thickness],
            refractive_index=plate.refractive_index,
            base_thickness_um=plate.base_thickness * 1e6,
            corrected=_coupling_out(corrected),
        )

    @app.post("/mirror/scale-study", response_model=list[schemas.ScaleStudyRow])
    def mirror_scale_study(payload: schemas.ScaleStudyRequest):
        kinds = [TransitionKind.parse(t) for t in payload.transitions]
        rows = scale_study(
            [r * 1e-6 for r in payload.roc_um],
            math.radians(payload.theta_max_deg),
            kinds=kinds,
            n_theta=payload.n_theta,
            n_phi=payload.n_phi,
        )
        return [
            schemas.ScaleStudyRow(
                roc_um=row["roc_m"] * 1e6,
                analysis_plane_mm=row["height_m"] * 1e3,
                collected={k.value: row[f"collected_{k.value}"] for k in kinds},
                coupling={k.value: row[f"coupling_{k.value}"] for k in kinds},
            )
            for row in rows
        ]

    @app.post("/budget/evaluate", response_model=list[schemas.BudgetResultOut])
    def budget(payload: schemas.BudgetRequest):
        columns = budget_columns_from_json([c.model_dump() for c in payload.columns])
        out = []
        for column in columns:
            result = evaluate_column(column)
            out.append(
                schemas.BudgetResultOut(
                    label=column.label,
                    single_photon_efficiency=result.single_photon_efficiency,
                    coincidence_efficiency=result.coincidence_efficiency,
                    entanglement_rate_Hz=result.entanglement_rate,
                )
            )
        return out

    return app


app = create_app()
