import json
import math

import pytest

from ionfiber.cavity import evaluate_design
from ionfiber.io import (
    MirrorRun,
    apply_overrides,
    budget_columns_from_json,
    cavity_design_from_dict,
    derived_to_dict,
    format_float,
    write_csv,
)

DESIGN = {
    "wavelength_nm": 369.5,
    "gamma_over_2pi_MHz": 10.0,
    "branching_ratio": 1.0,
    "roc_mm": 5.0,
    "gap_um": 0.5,
    "ion_height_um": 50.0,
    "Tf_ppm": 9420.6,
    "Te_ppm": 0.0,
    "Lf_ppm": 750.0,
    "Le_ppm": 750.0,
    "fiber_waist_um": 1.5,
}


def test_cavity_design_units_convert():
    design = cavity_design_from_dict(DESIGN)
    assert design.length == pytest.approx(5e-3 - 0.5e-6, rel=1e-12)
    assert design.atom.gamma == pytest.approx(2.0 * math.pi * 10e6, rel=1e-12)
    assert design.flat_mirror.transmission == pytest.approx(9420.6e-6, rel=1e-12)
    assert design.fiber.waist_radius == pytest.approx(1.5e-6, rel=1e-12)


def test_gap_avoids_cancellation():
    tiny = dict(DESIGN, gap_um=0.0732)
    design = cavity_design_from_dict(tiny)
    derived = evaluate_design(design)
    # waist at this gap matches the fiber: overlap at its maximum
    assert derived.mode_matching == pytest.approx(1.0, abs=1e-4)


def test_length_and_gap_are_exclusive():
    bad = dict(DESIGN, length_mm=4.9995)
    with pytest.raises(ValueError):
        cavity_design_from_dict(bad)


def test_unknown_and_missing_keys_rejected():
    with pytest.raises(ValueError):
        cavity_design_from_dict(dict(DESIGN, typo_key=1.0))
    incomplete = dict(DESIGN)
    del incomplete["Tf_ppm"]
    with pytest.raises(ValueError):
        cavity_design_from_dict(incomplete)


def test_overrides_parse_and_validate():
    raw = apply_overrides(dict(DESIGN), {"Tf_ppm": "9500", "gap_um": "0.4"})
    assert raw["Tf_ppm"] == 9500
    assert raw["gap_um"] == 0.4
    # typos survive the merge but fail schema validation downstream
    with pytest.raises(ValueError):
        cavity_design_from_dict(apply_overrides(dict(DESIGN), {"nope": "1"}))


def test_derived_summary_round_trips_as_json():
    summary = derived_to_dict(evaluate_design(cavity_design_from_dict(DESIGN)))
    text = json.dumps(summary, sort_keys=True)
    assert json.loads(text) == summary
    assert summary["finesse"] == pytest.approx(572.2, abs=0.5)


def test_mirror_run_parsing():
    run = MirrorRun(
        {
            "shape": "spherical",
            "roc_um": 160.0,
            "theta_max_deg": 48.0,
            "transition": "pi",
            "phase_plate": True,
        }
    )
    assert run.profile.roc == pytest.approx(160e-6)
    assert run.correct
    assert run.kind.value == "pi"
    with pytest.raises(ValueError):
        MirrorRun({"shape": "conical", "theta_max_deg": 48.0})
    with pytest.raises(ValueError):
        MirrorRun({"roc_um": 160.0, "theta_max_deg": 48.0, "bogus": 1})


def test_budget_parsing_accepts_null_decay():
    columns = budget_columns_from_json(
        [
            {
                "label": "cavity",
                "detector_efficiency": 0.3,
                "decay_fraction": None,
                "collected_fraction": 0.337,
                "mode_overlap": 0.95,
                "misc_efficiency": 0.63,
                "bell_id": 0.5,
                "repetition_rate_kHz": 500,
            }
        ]
    )
    assert columns[0].decay_fraction is None
    assert columns[0].repetition_rate == pytest.approx(500e3)


def test_float_formatting_fixed_width():
    assert format_float(0.123456789123) == "0.123456789"
    assert format_float(5e-3 - 0.5e-6) == "0.0049995"
    assert format_float(float("inf")) == "inf"


def test_write_csv_deterministic(tmp_path):
    rows = [(1.0, 0.123456789123), (2.0, 9.87654321e-7)]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(a, ["x", "y"], rows)
    write_csv(b, ["x", "y"], rows)
    assert a.read_bytes() == b.read_bytes()
