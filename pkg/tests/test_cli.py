from __future__ import annotations

import json
import math

import pytest

from rainbound.cli import main
from rainbound.config import RunConfig
from rainbound.fileio import read_csv


@pytest.fixture
def small_config(tmp_path):
    cfg = RunConfig().replace("experiment", trials_estimator=50, trials_cusum=200, trials_fusion=20,
                              estimate_rates=(20.0,), locus_rates=(5.0, 20.0),
                              elevations=(10.0, 15.0, 20.0, 38.0, 90.0))
    path = tmp_path / "small.ini"
    path.write_text(cfg.serialize())
    return path


@pytest.mark.parametrize("command,expected", [
    ("bounds", {"crb_vs_R.csv", "rmin_table.csv", "sideinfo_table.csv", "pareto.csv"}),
    ("geometry", {"rmin_vs_elevation.csv", "optimal_locus.csv", "theta_star.json"}),
    ("alloc", {"allocation_sweep.csv", "regime_thresholds.csv"}),
    ("detect", {"add_table.csv", "detector.json"}),
    ("estimate", {"efficiency.csv"}),
])
def test_commands_write_artifacts_and_manifest(tmp_path, small_config, command, expected):
    out = tmp_path / command
    assert main([command, "--config", str(small_config), "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest["files"]) == expected
    assert manifest["command"] == command
    assert manifest["seed"] == RunConfig().run.seed
    assert "timestamp" not in json.dumps(manifest).lower()


def test_bounds_table_values(tmp_path):
    out = tmp_path / "b"
    assert main(["bounds", "--out", str(out)]) == 0
    header, rows = read_csv(out / "rmin_table.csv")
    table = {r[0]: float(r[2]) for r in rows}
    assert table["crb"] == pytest.approx(4.26, abs=0.05)
    assert table["bcrb_T30"] == pytest.approx(0.95, abs=0.05)


def test_reruns_are_byte_identical(tmp_path, small_config):
    for run in ("a", "b"):
        assert main(["detect", "--config", str(small_config), "--out", str(tmp_path / run)]) == 0
    for name in ("add_table.csv", "detector.json", "manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_seed_override_changes_output(tmp_path, small_config):
    main(["detect", "--config", str(small_config), "--out", str(tmp_path / "a")])
    main(["detect", "--config", str(small_config), "--out", str(tmp_path / "b"), "--seed", "7"])
    assert (tmp_path / "a" / "add_table.csv").read_bytes() != (tmp_path / "b" / "add_table.csv").read_bytes()


def test_coefficient_mode_flag(tmp_path):
    main(["bounds", "--out", str(tmp_path / "band")])
    main(["bounds", "--full-p838", "--out", str(tmp_path / "full")])
    a = json.loads((tmp_path / "band" / "manifest.json").read_text())["config_sha256"]
    b = json.loads((tmp_path / "full" / "manifest.json").read_text())["config_sha256"]
    assert a != b


def test_series_detection(tmp_path):
    series = tmp_path / "series.csv"
    lines = ["timestamp_iso8601,attenuation_db"]
    lines += [f"2024-06-01T00:{m:02d}:00Z,{0.0 if m < 20 else 3.0}" for m in range(40)]
    series.write_text("\n".join(lines) + "\n")
    cfg = RunConfig().replace("detect", series_file=str(series)).replace("experiment", trials_cusum=100)
    path = tmp_path / "c.ini"
    path.write_text(cfg.serialize())
    out = tmp_path / "o"
    assert main(["detect", "--config", str(path), "--out", str(out)]) == 0
    report = json.loads((out / "series_report.json").read_text())
    cc = cfg.cusum_config()
    expected = 20 + math.floor(cc.h / (3.0 - cc.mu_d / 2)) + 1
    assert report["alarm_index"] == expected
    assert report["alarm_timestamp"].startswith(f"2024-06-01T00:{expected - 1:02d}")
    assert report["samples"] == 40 and report["gaps"] == []


def test_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[experiment]\nrain_rates =\n")
    assert main(["bounds", "--config", str(bad), "--out", str(tmp_path / "x")]) == 2
    huge = tmp_path / "huge.ini"
    huge.write_text("[link]\nsigma_n_db = 1e9\n")
    assert main(["bounds", "--config", str(huge), "--out", str(tmp_path / "y")]) == 3
    missing = tmp_path / "m.ini"
    missing.write_text(f"[detect]\nseries_file = {tmp_path / 'none.csv'}\n")
    assert main(["detect", "--config", str(missing), "--out", str(tmp_path / "z")]) == 1
    assert "error" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main([])


def test_write_default_config(tmp_path):
    path = tmp_path / "default.ini"
    assert main(["--write-default-config", str(path)]) == 0
    assert RunConfig.load(path) == RunConfig()
