import json
import re

import pytest

import combnoise.dcs as dcs_module
from combnoise.cli import main
from combnoise.states import PairVariances, pair_variances


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)])


def read(path):
    return path.read_bytes()


def test_ofd_sweep_small_grid(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"command": "ofd-sweep", "n_points": 6,
                               "m_rms_min": 5.0, "m_rms_max": 40.0}))
    assert run(tmp_path / "a", "ofd-sweep", "--config", str(cfg)) == 0
    csv = (tmp_path / "a" / "ofd_sweep.csv").read_text().strip().split("\n")
    assert csv[0] == "shape,param,m_rms,r,eta,policy"
    assert len(csv) == 1 + 3 * 6
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert set(manifest["results"]["slopes"]) == {"gaussian", "sech", "flattop"}
    # scientific notation with >= 12 significant digits
    field = csv[1].split(",")[3]
    assert re.fullmatch(r"-?\d\.\d{12,}e[+-]\d+", field)


def test_single_point_grid_suppression_below_unity(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"m_rms_min": 1.0, "m_rms_max": 1.0, "n_points": 1}))
    assert run(tmp_path / "b", "ofd-sweep", "--config", str(cfg)) == 0
    rows = (tmp_path / "b" / "ofd_sweep.csv").read_text().strip().split("\n")[1:]
    for row in rows:
        assert float(row.split(",")[3]) < 1.0
    manifest = json.loads((tmp_path / "b" / "manifest.json").read_text())
    assert all(v is None for v in manifest["results"]["slopes"].values())


def test_empty_shape_list_is_usage_error(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"shapes": []}))
    assert run(tmp_path / "c", "ofd-sweep", "--config", str(cfg)) == 2
    assert "shape" in capsys.readouterr().err


def test_unknown_config_key_is_usage_error(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"m_rms_mim": 2.0}))
    assert run(tmp_path / "d", "ofd-sweep", "--config", str(cfg)) == 2


def test_byte_identical_reruns(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_points": 3, "ratios": [4],
                               "depth_db_max": 20.0}))
    assert run(tmp_path / "r1", "dcs-advantage", "--config", str(cfg), "--seed", "5") == 0
    assert run(tmp_path / "r2", "dcs-advantage", "--config", str(cfg), "--seed", "5") == 0
    assert read(tmp_path / "r1" / "dcs_advantage.csv") == \
        read(tmp_path / "r2" / "dcs_advantage.csv")
    assert read(tmp_path / "r1" / "manifest.json") == \
        read(tmp_path / "r2" / "manifest.json")


def test_manifest_roundtrip(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"gains": [1.0, 3.0], "duration_s": 0.01,
                               "preset": None}))
    assert run(tmp_path / "m1", "cyclo-trace", "--config", str(cfg), "--seed", "9") == 0
    manifest = tmp_path / "m1" / "manifest.json"
    assert run(tmp_path / "m2", "cyclo-trace", "--config", str(manifest)) == 0
    for name in ("cyclo_trace_g1.csv", "cyclo_trace_g3.csv", "manifest.json"):
        assert read(tmp_path / "m1" / name) == read(tmp_path / "m2" / name)


def test_cyclo_preset_conflict_is_usage_error(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"preset": "si-default", "n_lines": 11}))
    assert run(tmp_path / "e", "cyclo-trace", "--config", str(cfg)) == 2


def test_cyclo_preset_run(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"duration_s": 0.01}))
    out = tmp_path / "f"
    assert run(out, "cyclo-trace", "--config", str(cfg)) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    results = manifest["results"]
    assert set(results) == {"g1", "g5", "g10"}
    assert results["g1"]["var_norm_min"] == pytest.approx(1.0, abs=1e-12)
    assert results["g1"]["var_norm_max"] == pytest.approx(1.0, abs=1e-12)
    assert results["g10"]["var_norm_min"] == pytest.approx(0.1, abs=1e-9)
    assert results["g10"]["var_norm_max"] == pytest.approx(10.0, abs=1e-9)
    header = (out / "cyclo_trace_g5.csv").read_text().split("\n")[0]
    assert header == "t_us,mean_i,var_i"


def test_dcs_advantage_default_endpoints(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_points": 2, "depth_db_max": 30.0}))
    out = tmp_path / "g"
    assert run(out, "dcs-advantage", "--config", str(cfg)) == 0
    results = json.loads((out / "manifest.json").read_text())["results"]["endpoints"]
    for key in ("intra-cross-ratio10", "epr-ratio10",
                "intra-cross-ratio100", "epr-ratio100"):
        assert results[key]["depth0_db"] == pytest.approx(15.0, abs=0.05)


def test_json_output_format(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_points": 2, "ratios": [4],
                               "strategies": ["intra-cross"]}))
    out = tmp_path / "h"
    assert run(out, "dcs-advantage", "--config", str(cfg), "--format", "json") == 0
    doc = json.loads((out / "dcs_advantage.json").read_text())
    assert doc["columns"] == ["depth_db", "strategy", "ratio", "g_db", "advantage_db"]
    assert len(doc["rows"]) == 2


def test_validate_quick(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_instances": 40, "mc": False}))
    out = tmp_path / "v"
    assert run(out, "validate", "--config", str(cfg), "--seed", "3") == 0
    report = json.loads((out / "validation_report.json").read_text())
    assert report["all_passed"] is True
    names = {c["name"] for c in report["checks"]}
    assert "ofd-oracle-equivalence" in names and "dcs-oracle-equivalence" in names


def test_validate_catches_injected_epr_sign_flip(tmp_path, monkeypatch):
    # mutation canary: corrupt the closed-form EPR pair statistics only; the
    # covariance oracle path is untouched, so equivalence must fail
    def flipped(spec, n):
        pv = pair_variances(spec, n)
        return PairVariances(pv.vq_minus, pv.vq_plus, -pv.cq,
                             pv.vp_minus, pv.vp_plus, -pv.cp)

    monkeypatch.setattr(dcs_module, "pair_variances", flipped)
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_instances": 120, "mc": False}))
    out = tmp_path / "w"
    assert run(out, "validate", "--config", str(cfg), "--seed", "3") == 3
    report = json.loads((out / "validation_report.json").read_text())
    failed = {c["name"] for c in report["checks"] if not c["passed"]}
    assert "dcs-oracle-equivalence" in failed


def test_bad_seed_is_usage_error(tmp_path):
    assert run(tmp_path / "s", "ofd-sweep", "--seed", "-1") == 2


def test_wrong_command_config_is_usage_error(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"command": "validate"}))
    assert run(tmp_path / "x", "ofd-sweep", "--config", str(cfg)) == 2
