from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import pytest

import oracles

from erange.cli import build_config, fmt_float, run, to_json
from erange.errors import ConfigError

FREE = '{"type": "square_barrier", "height": 0, "radius": 1}'
TAIL4 = '{"type": "power_tail", "amplitude": 1, "core": 1, "s": 4}'


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_phase_shift_barrier_rows():
    code, out, _ = call("phase-shift", "--potential", "barrier", "--kpoints", "50")
    assert code == 0
    table = rows(out)
    assert len(table) == 50
    assert list(table[0]) == ["k [1/length]", "delta_integral [rad]", "delta_matching [rad]",
                              "abs_difference [rad]"]
    assert max(float(r["abs_difference [rad]"]) for r in table) < 1e-7


def test_phase_shift_integral_on_well_is_input_error():
    code, out, err = call("phase-shift", "--potential", "well_shallow", "--method", "integral")
    assert code == 2 and out == ""
    assert "V(r) >= 0" in err


def test_phase_shift_both_on_well_skips_integral_column():
    code, out, _ = call("phase-shift", "--potential", "well_shallow", "--kpoints", "3", "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert all(r["delta_integral [rad]"] is None for r in doc["results"])
    assert "integral" in doc["diagnostics"]


def test_phase_shift_free_potential_is_zero():
    code, out, _ = call("phase-shift", "--potential", FREE, "--kpoints", "5")
    assert code == 0
    for r in rows(out):
        assert float(r["delta_integral [rad]"]) == 0.0 == float(r["delta_matching [rad]"])


def test_effective_range_barrier():
    code, out, _ = call("effective-range", "--potential", "barrier")
    table = rows(out)
    assert code == 0
    assert [r["method"] for r in table] == ["direct_integral", "low_k_fit"]
    assert float(table[0]["a [length^(2l+1)]"]) == pytest.approx(float(oracles.barrier_a0()), rel=1e-6)


def test_effective_range_divergent_r():
    code, out, _ = call("effective-range", "--potential", TAIL4)
    table = rows(out)
    assert code == 0
    assert table[0]["r_eff [length^(1-2l)]"] == "divergent"
    assert float(table[0]["growth_exponent"]) == pytest.approx(1.0, abs=0.1)


def test_effective_range_free_potential():
    code, out, _ = call("effective-range", "--potential", FREE)
    table = rows(out)
    assert code == 0
    for r in table:
        assert float(r["a [length^(2l+1)]"]) == 0.0
        assert float(r["b [length^(2l+3)]"]) == 0.0
        assert r["r_eff [length^(1-2l)]"] == "a=0: undefined"


def test_scan_default_matrix_passes():
    code, out, _ = call("scan")
    assert code == 0
    assert len(rows(out)) == 10


def test_scan_near_threshold_is_flagged():
    code, out, _ = call("scan", "--s-list", "3.01", "--ell-list", "0")
    (row,) = rows(out)
    assert code == 0 and row["near_threshold"] == "true"


def test_scan_single_cell():
    code, out, _ = call("scan", "--s-list", "6", "--ell-list", "0")
    (row,) = rows(out)
    assert code == 0
    assert row["observed_a"] == row["observed_r"] == "finite"


def test_levinson_well():
    code, out, _ = call("levinson", "--potential", "well_shallow")
    (row,) = rows(out)
    assert code == 0
    assert row["n"] == "1" and float(row["residual [rad]"]) < 0.05
    assert float(row["delta_at_kmin [rad]"]) == pytest.approx(3.14, abs=0.01)


def test_bound_states_barrier_is_empty():
    code, out, _ = call("bound-states", "--potential", "barrier")
    assert code == 0
    assert rows(out) == [] and out.startswith("index,")


def test_bound_states_deep_well():
    code, out, _ = call("bound-states", "--potential", "well_deep", "--format", "json")
    doc = json.loads(out)
    assert [round(r["gamma [1/length]"], 6) for r in doc["results"]] == [4.799609, 2.021724]


def test_validate_exits_zero():
    code, out, _ = call("validate")
    failing = [r for r in rows(out) if r["status"] == "FAIL"]
    assert code == 0, failing


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.yaml"
    cfg.write_text("potential: {type: square_barrier, height: 4, radius: 1}\n"
                   "k_grid: {k_min: 0.1, k_max: 1.0, points: 7, spacing: linear}\n")
    code, out, _ = call("phase-shift", "--config", str(cfg), "--kpoints", "4")
    table = rows(out)
    assert code == 0
    assert [float(r["k [1/length]"]) for r in table] == pytest.approx([0.1, 0.4, 0.7, 1.0])


def test_json_config_file(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"potential": "well_deep", "ell": 0}))
    code, out, _ = call("bound-states", "--config", str(cfg))
    assert code == 0 and len(rows(out)) == 2


@pytest.mark.parametrize("text,field", [
    ("ell: -1\n", "ell"),
    ("k_grid: {k_min: 0}\n", "k_grid.k_min"),
    ("k_grid: {points: 2.5}\n", "k_grid.points"),
    ("method: numerov\n", "method"),
    ("colour: red\n", "colour"),
    ("potential: {type: power_tail, amplitude: 1, core: 1}\n", "potential.s"),
    ("tolerances: {levinson: -1}\n", "tolerances.levinson"),
    ("output: {format: xml}\n", "output.format"),
    ("[1, 2]\n", "--config"),
])
def test_malformed_config_names_field(tmp_path, text, field):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text(text)
    code, out, err = call("phase-shift", "--config", str(cfg))
    assert code == 2 and out == ""
    assert err.startswith(f"error: {field}")


def test_unwritable_output_checked_before_compute(tmp_path):
    code, _, err = call("phase-shift", "--out", str(tmp_path / "missing" / "x.csv"))
    assert code == 2 and "output.path" in err


def test_output_file_and_determinism(tmp_path):
    a = tmp_path / "a.json"
    outputs = []
    for _ in range(2):
        code, out, _ = call("effective-range", "--potential", "power_tail_6", "--format", "json",
                            "--out", str(a))
        assert code == 0 and out == ""
        outputs.append(a.read_bytes())
    assert outputs[0] == outputs[1]
    doc = json.loads(a.read_text())
    assert set(doc) == {"config", "results", "diagnostics"}
    assert doc["config"]["potential"] == {"type": "power_tail", "amplitude": 1.0, "core": 1.0, "s": 6.0}


def test_float_format_has_17_significant_digits():
    assert fmt_float(0.1) == "0.10000000000000001"
    assert fmt_float(1.0) == "1"
    assert to_json({"x": [0.1, float("inf"), None, True]}) == '{"x": [0.10000000000000001, "inf", null, true]}'


def test_build_config_defaults():
    cfg = build_config(None, {})
    assert cfg.k_values().size == 50
    with pytest.raises(ConfigError):
        build_config({"grid": {"R_max": 1e-9}}, {})


@pytest.mark.parametrize("argv,code", [
    (["bound-states", "--potential", "barrier"], 0),
    (["phase-shift", "--potential", "nonsense"], 2),
    (["phase-shift", "--kpoints", "x"], 2),
    (["levinson", "--potential", '{"type": "square_well", "depth": 2.4674011002723395, "radius": 1}'], 1),
])
def test_module_entry_point_exit_codes(argv, code):
    proc = subprocess.run([sys.executable, "-m", "erange", *argv], capture_output=True, text=True)
    assert proc.returncode == code, proc.stderr
