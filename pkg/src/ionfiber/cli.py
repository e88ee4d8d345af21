"""Command-line front end.

Thin client over the core package: loads JSON design files, runs the
computation or sweep, and writes deterministic CSV/JSON artifacts (identical
inputs produce byte-identical CSV).  ``--paper-suite`` runs the full
regression set into a timestamped directory with a pass/fail summary.

Exit codes: 0 success, 1 input error, 2 computation failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cavity import (
    default_sweep_lengths,
    evaluate_design,
    length_sweep,
    sweep_extrema,
)
from .dipole import TransitionKind, emission_fraction
from .io import (
    MirrorRun,
    derived_to_dict,
    format_float,
    load_budget,
    load_cavity_design,
    load_mirror_run,
    write_csv,
    write_json,
)
from .budget import evaluate_column
from .mirrors import (
    coupling_sweep,
    design_phase_plate,
    fiber_coupling,
    rayleigh_check,
    scale_study,
)

COMMANDS = (
    "cavity-eval", "cavity-sweep", "emission", "mirror-trace", "opd",
    "phase-plate", "coupling-sweep", "scale-study", "rate-budget", "serve",
)


class ComputationError(RuntimeError):
    """Raised when an optimizer or solver fails; maps to exit code 2."""


@dataclass
class RunConfig:
    """Parsed invocation: which command, where the inputs/outputs live, and
    the repeatable key=value overrides applied to the input file."""

    command: str | None
    input: Path | None = None
    out_dir: Path = Path(".")
    overrides: dict[str, str] = field(default_factory=dict)
    samples: int = 512
    workers: int = 1
    paper_suite: bool = False
    kind: str | None = None
    theta_max_deg: float | None = None
    roc_um: list[float] | None = None
    host: str = "127.0.0.1"
    port: int = 8000


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(1)


def build_parser() -> _Parser:
    parser = _Parser(
        prog="ionfiber",
        description="Single-photon collection design toolkit: fiber-tip "
        "cavities, high-NA mirrors with aberration correction, and "
        "entanglement-rate budgets.",
    )
    parser.add_argument("command", nargs="?", choices=COMMANDS, help="subcommand to run")
    parser.add_argument("--input", type=Path, help="input JSON file")
    parser.add_argument("--out-dir", type=Path, default=Path("."), help="output directory")
    parser.add_argument(
        "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
        help="override a key of the input file (repeatable)",
    )
    parser.add_argument("--samples", type=int, default=512, help="sweep sample count")
    parser.add_argument("--workers", type=int, default=1, help="worker processes for sweeps")
    parser.add_argument("--paper-suite", action="store_true",
                        help="run the full regression suite into a timestamped directory")
    parser.add_argument("--kind", help="transition for the emission command (sigma|sigma_minus|pi)")
    parser.add_argument("--theta-max-deg", type=float, help="aperture half-angle in degrees")
    parser.add_argument("--roc-um", help="comma-separated mirror radii (um) for scale-study")
    parser.add_argument("--host", default="127.0.0.1", help="bind address for serve")
    parser.add_argument("--port", type=int, default=8000, help="port for serve")
    return parser


def parse_config(argv: list[str]) -> RunConfig:
    args = build_parser().parse_args(argv)
    overrides = {}
    for item in args.overrides:
        if "=" not in item:
            raise ValueError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key] = value
    roc = None
    if args.roc_um:
        roc = [float(x) for x in args.roc_um.split(",") if x.strip()]
    return RunConfig(
        command=args.command,
        input=args.input,
        out_dir=args.out_dir,
        overrides=overrides,
        samples=args.samples,
        workers=args.workers,
        paper_suite=args.paper_suite,
        kind=args.kind,
        theta_max_deg=args.theta_max_deg,
        roc_um=roc,
        host=args.host,
        port=args.port,
    )


def _require_input(config: RunConfig) -> Path:
    if config.input is None:
        raise ValueError(f"{config.command} requires --input")
    if not config.input.exists():
        raise ValueError(f"input file not found: {config.input}")
    return config.input


def _opd_rows(opd):
    return [
        (math.degrees(t), r * 1e3, v)
        for t, r, v in zip(opd.theta, opd.rho, opd.opd_lambda)
    ]


def _coupling_summary(result) -> dict:
    ok, margin = rayleigh_check(result.opd)
    fit = result.fit
    return {
        "collected_fraction": result.collected_fraction,
        "overlap": result.overlap,
        "coupling": result.efficiency,
        "max_opd_lambda": result.opd.max_abs,
        "rayleigh_ok": ok,
        "rayleigh_margin_lambda": margin,
        "fit_radius_mm": fit.radius * 1e3,
        "fit_curvature_radius_mm": None if fit.curvature == 0.0 else 1e3 / fit.curvature,
        "fit_waist_um": fit.beam.waist_radius * 1e6,
    }


def _mirror_result(config: RunConfig, correct_override: bool | None = None):
    run = load_mirror_run(_require_input(config), config.overrides)
    correct = run.correct if correct_override is None else correct_override
    result = fiber_coupling(
        run.kind, run.profile, run.height, run.wavelength, pose=run.pose,
        vortex=run.vortex, correct=correct, n_theta=run.n_theta, n_phi=run.n_phi,
    )
    return run, result


def cmd_cavity_eval(config: RunConfig) -> None:
    design = load_cavity_design(_require_input(config), config.overrides)
    summary = derived_to_dict(evaluate_design(design))
    write_json(config.out_dir / "cavity_eval.json", summary)
    for key in ("finesse", "cooperativity", "kappa_over_2pi_MHz", "g_over_2pi_MHz",
                "p_cavity", "mode_matching", "r_t", "p_fiber"):
        print(f"{key} = {format_float(summary[key])}")


def cmd_cavity_sweep(config: RunConfig) -> None:
    design = load_cavity_design(_require_input(config), config.overrides)
    lengths = default_sweep_lengths(design, config.samples)
    points = length_sweep(design, lengths)
    rows = [
        (p.length * 1e3, p.waist_radius * 1e6, p.ion_mode_radius * 1e6,
         p.mode_matching, p.p_cavity, p.p_fiber)
        for p in points
    ]
    write_csv(
        config.out_dir / "cavity_sweep.csv",
        ["length_mm", "waist_um", "r_ion_um", "mode_matching", "p_cavity", "p_fiber"],
        rows,
    )
    ex = sweep_extrema(design, config.samples)
    summary = {
        "argmin_r_ion_mm": ex.length_min_r_ion * 1e3,
        "argmax_overlap_mm": ex.length_max_overlap * 1e3,
        "max_p_fiber": ex.max_p_fiber,
        "argmax_p_fiber_mm": ex.length_max_p_fiber * 1e3,
    }
    write_json(config.out_dir / "cavity_sweep_summary.json", summary)
    print(f"max_p_fiber = {format_float(ex.max_p_fiber)} at {format_float(ex.length_max_p_fiber * 1e3)} mm")


def cmd_emission(config: RunConfig) -> None:
    if config.kind is None or config.theta_max_deg is None:
        raise ValueError("emission requires --kind and --theta-max-deg")
    kind = TransitionKind.parse(config.kind)
    fraction = emission_fraction(kind, math.radians(config.theta_max_deg))
    print(format_float(fraction))
    write_json(
        config.out_dir / "emission.json",
        {"transition": kind.value, "theta_max_deg": config.theta_max_deg, "fraction": fraction},
    )


def cmd_mirror_trace(config: RunConfig) -> None:
    run, result = _mirror_result(config)
    write_csv(config.out_dir / "mirror_trace.csv",
              ["theta_deg", "rho_mm", "opd_lambda"], _opd_rows(result.opd))
    write_json(config.out_dir / "mirror_trace_summary.json", _coupling_summary(result))
    print(f"coupling = {format_float(result.efficiency)}")


def cmd_opd(config: RunConfig) -> None:
    _, result = _mirror_result(config)
    write_csv(config.out_dir / "opd.csv", ["theta_deg", "rho_mm", "opd_lambda"],
              _opd_rows(result.opd))
    write_json(config.out_dir / "opd_summary.json", _coupling_summary(result))
    print(f"max_opd_lambda = {format_float(result.opd.max_abs)}")


def cmd_phase_plate(config: RunConfig) -> None:
    run, uncorrected = _mirror_result(config, correct_override=False)
    plate = design_phase_plate(uncorrected.opd)
    write_csv(
        config.out_dir / "phase_plate.csv",
        ["rho_mm", "thickness_um"],
        [(r * 1e3, t * 1e6) for r, t in zip(plate.rho, plate.thickness)],
    )
    _, corrected = _mirror_result(config, correct_override=True)
    write_json(
        config.out_dir / "phase_plate_summary.json",
        {
            "refractive_index": plate.refractive_index,
            "base_thickness_um": plate.base_thickness * 1e6,
            "relief_span_um": float(plate.relief.max() - plate.relief.min()) * 1e6,
            "uncorrected": _coupling_summary(uncorrected),
            "corrected": _coupling_summary(corrected),
        },
    )
    print(f"corrected coupling = {format_float(corrected.efficiency)}")


def cmd_coupling_sweep(config: RunConfig) -> None:
    run = load_mirror_run(_require_input(config), config.overrides)
    sweep = run.sweep or {}
    parameter = sweep.get("parameter", "theta_max_deg" if run.profile.shape == "spherical" else "rho0_over_f")
    samples = int(sweep.get("samples", config.samples if config.samples != 512 else 12))
    if parameter == "rho0_over_f":
        values = np.geomspace(float(sweep.get("start", 0.25)), float(sweep.get("stop", 20.0)), samples)
        rows = coupling_sweep(run.kind, "parabolic", values,
                              n_theta=run.n_theta, n_phi=run.n_phi, vortex=run.vortex)
        header = ["rho0_over_f", "collected_fraction", "overlap", "coupling", "max_opd_lambda"]
        out = [(r["rho0_over_f"], r["collected_fraction"], r["overlap"], r["coupling"], r["max_opd_lambda"]) for r in rows]
    elif parameter == "theta_max_deg":
        degs = np.linspace(float(sweep.get("start", 16.0)), float(sweep.get("stop", 50.0)), samples)
        rows = coupling_sweep(run.kind, "spherical", np.radians(degs), roc=run.profile.roc,
                              height=run.height, correct=run.correct,
                              n_theta=run.n_theta, n_phi=run.n_phi, vortex=run.vortex)
        header = ["theta_max_deg", "collected_fraction", "overlap", "coupling", "max_opd_lambda"]
        out = [(math.degrees(r["theta_max_rad"]), r["collected_fraction"], r["overlap"], r["coupling"], r["max_opd_lambda"]) for r in rows]
    else:
        raise ValueError(f"unknown sweep parameter {parameter!r}")
    write_csv(config.out_dir / "coupling_sweep.csv", header, out)
    print(f"wrote {len(out)} sweep points")


def cmd_scale_study(config: RunConfig) -> None:
    roc_um = config.roc_um or [1600.0, 160.0, 16.0]
    theta = math.radians(config.theta_max_deg if config.theta_max_deg is not None else 48.0)
    rows = scale_study([r * 1e-6 for r in roc_um], theta, n_theta=1024, n_phi=32)
    out = [
        (row["roc_m"] * 1e6, row["height_m"] * 1e3,
         row["collected_sigma_plus"], row["coupling_sigma_plus"],
         row["collected_pi"], row["coupling_pi"])
        for row in rows
    ]
    write_csv(
        config.out_dir / "scale_study.csv",
        ["roc_um", "analysis_plane_mm", "collected_sigma", "coupling_sigma",
         "collected_pi", "coupling_pi"],
        out,
    )
    for row in out:
        print(f"roc {format_float(row[0])} um: sigma {format_float(row[3])}, pi {format_float(row[5])}")


def cmd_rate_budget(config: RunConfig) -> None:
    columns = load_budget(_require_input(config))
    rows = []
    for column in columns:
        result = evaluate_column(column)
        rows.append(
            (column.label, column.detector_efficiency,
             "" if column.decay_fraction is None else column.decay_fraction,
             column.collected_fraction, column.mode_overlap, column.misc_efficiency,
             column.bell_id, column.repetition_rate / 1e3,
             result.single_photon_efficiency, result.coincidence_efficiency,
             result.entanglement_rate)
        )
    write_csv(
        config.out_dir / "rate_budget.csv",
        ["label", "detector_efficiency", "decay_fraction", "collected_fraction",
         "mode_overlap", "misc_efficiency", "bell_id", "repetition_rate_kHz",
         "single_photon_efficiency", "coincidence_efficiency", "entanglement_rate_Hz"],
        rows,
    )
    for row in rows:
        print(f"{row[0]}: rate = {format_float(row[-1])} Hz")


def cmd_serve(config: RunConfig) -> None:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=config.host, port=config.port)


def run_paper_suite(config: RunConfig) -> int:
    from .regression import run_reference_suite

    stamp = time.strftime("%Y%m%d-%H%M%S")
    out = config.out_dir / f"paper-suite-{stamp}"
    out.mkdir(parents=True, exist_ok=True)
    suite = run_reference_suite(workers=config.workers, samples=config.samples)

    write_json(out / "worked_example.json", suite["worked_example"])
    write_csv(
        out / "cavity_length_sweep.csv",
        ["length_mm", "waist_um", "r_ion_um", "mode_matching", "p_cavity", "p_fiber"],
        suite["cavity_sweep"]["rows"],
    )
    write_json(out / "cavity_sweep_summary.json", suite["cavity_sweep"]["summary"])
    write_csv(
        out / "parabola_coupling.csv",
        ["rho0_over_f", "collected_sigma", "collected_pi", "coupling_sigma", "coupling_pi"],
        suite["parabola_curve"],
    )
    write_csv(
        out / "corrected_sphere_coupling.csv",
        ["theta_max_deg", "sphere_corrected_sigma", "sphere_corrected_pi",
         "parabola_sigma", "parabola_pi"],
        suite["corrected_sphere_curve"],
    )
    study = suite["opd_study"]
    write_csv(out / "sphere_opd_32deg.csv", ["theta_deg", "rho_mm", "opd_lambda"],
              _opd_rows(study["sigma32"].opd))
    write_csv(out / "sphere_opd_48deg.csv", ["theta_deg", "rho_mm", "opd_lambda"],
              _opd_rows(study["pi48"].opd))
    write_csv(out / "sphere_opd_48deg_corrected.csv", ["theta_deg", "rho_mm", "opd_lambda"],
              _opd_rows(study["pi48_corrected"].opd))
    write_csv(out / "sphere_opd_48deg_corrected_100mm.csv", ["theta_deg", "rho_mm", "opd_lambda"],
              _opd_rows(study["corrected_opd_100mm"]))
    plate = study["plate"]
    write_csv(out / "phase_plate_48deg.csv", ["rho_mm", "thickness_um"],
              [(r * 1e3, t * 1e6) for r, t in zip(plate.rho, plate.thickness)])
    write_csv(
        out / "mirror_scale_study.csv",
        ["roc_um", "analysis_plane_mm", "collected_sigma", "coupling_sigma",
         "collected_pi", "coupling_pi"],
        [(r["roc_m"] * 1e6, r["height_m"] * 1e3, r["collected_sigma_plus"],
          r["coupling_sigma_plus"], r["collected_pi"], r["coupling_pi"])
         for r in suite["scale_study"]],
    )
    write_csv(
        out / "rate_budget.csv",
        ["label", "detector_efficiency", "decay_fraction", "collected_fraction",
         "mode_overlap", "misc_efficiency", "bell_id", "repetition_rate_kHz",
         "single_photon_efficiency", "coincidence_efficiency", "entanglement_rate_Hz"],
        suite["budget"],
    )
    write_json(out / "summary.json", {"checks": suite["checks"], "all_passed": suite["all_passed"]})

    passed = sum(1 for c in suite["checks"] if c["passed"])
    for check in suite["checks"]:
        flag = "PASS" if check["passed"] else "FAIL"
        print(f"[{flag}] {check['name']}: {format_float(check['value'])}")
    print(f"{passed}/{len(suite['checks'])} reference checks passed; artifacts in {out}")
    return 0


HANDLERS = {
    "cavity-eval": cmd_cavity_eval,
    "cavity-sweep": cmd_cavity_sweep,
    "emission": cmd_emission,
    "mirror-trace": cmd_mirror_trace,
    "opd": cmd_opd,
    "phase-plate": cmd_phase_plate,
    "coupling-sweep": cmd_coupling_sweep,
    "scale-study": cmd_scale_study,
    "rate-budget": cmd_rate_budget,
    "serve": cmd_serve,
}


def run(config: RunConfig) -> int:
    """Execute a parsed invocation; returns the process exit status."""
    try:
        if config.paper_suite:
            config.out_dir.mkdir(parents=True, exist_ok=True)
            return run_paper_suite(config)
        if config.command is None:
            raise ValueError("no command given (and --paper-suite not set)")
        config.out_dir.mkdir(parents=True, exist_ok=True)
        HANDLERS[config.command](config)
        return 0
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except ComputationError as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return 2


def main(argv: list[str] | None = None) -> int:
    try:
        config = parse_config(sys.argv[1:] if argv is None else argv)
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
