from __future__ import annotations

import math
from datetime import datetime, timedelta, timezone

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rainbound.config import RunConfig
from rainbound.errors import ConfigError, SeriesFormatError
from rainbound.fileio import ingest_series, read_csv, write_csv, write_series


def test_round_trip_default():
    cfg = RunConfig()
    assert RunConfig.parse(cfg.serialize()) == cfg
    assert cfg.digest() == RunConfig.parse(cfg.serialize()).digest()


@given(st.floats(0.1, 50.0), st.integers(0, 2**64 - 1), st.lists(st.floats(0.1, 500.0), min_size=1, max_size=6))
def test_round_trip_modified(rate, seed, rates):
    cfg = RunConfig().replace("prior", mean_rate=rate).replace("run", seed=seed).replace(
        "experiment", rain_rates=tuple(rates))
    assert RunConfig.parse(cfg.serialize()) == cfg


def test_serialized_defaults_carry_units():
    text = RunConfig().serialize()
    for line in ("snr0_db = 10.0", "n_sym = 302", "eta = 0.1", "bandwidth_mhz = 240.0", "mean_rate = 5.2",
                 "coeff_variation = 1.05", "rho = 0.95", "sigma_sys_db = 0.63", "design_rate = 5.0",
                 "p_fa = 0.001", "k_bar = 0.022", "alpha_bar = 1.19"):
        assert line in text
    assert "# dB, clear-sky SNR" in text


def test_built_objects_follow_config():
    cfg = RunConfig()
    link = cfg.link_config()
    assert link.grid.band_average and link.grid.size == 5
    assert link.l_eff == pytest.approx(3.0)
    assert cfg.cusum_config().mu_d == pytest.approx(0.022 * 5 ** 1.19 * 3)
    assert [p.c_min for p in cfg.policies()] == [0.5, 1.0, 1.5, 2.0]
    assert not cfg.replace("link", coefficient_mode="full_p838").grid().band_average


@pytest.mark.parametrize("text", [
    "[nope]\nx = 1\n",
    "[link]\nunknown_key = 1\n",
    "[link]\nn_sym = many\n",
    "[experiment]\nrain_rates =\n",
    "[link]\ncoefficient_mode = mystery\n",
    "[policy]\npilot_limited = perhaps\n",
    "no section header\n",
])
def test_invalid_configs(text):
    with pytest.raises(ConfigError):
        RunConfig.parse(text)


def test_inline_comments_are_ignored():
    cfg = RunConfig.parse("[link]\nsnr0_db = 12.5  # stronger link\n")
    assert cfg.link.snr0_db == 12.5


def _series_text(rows):
    return "timestamp_iso8601,attenuation_db\n" + "".join(f"{t},{a}\n" for t, a in rows)


def test_ingest_with_gap(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text(_series_text([("2024-06-01T00:00:00Z", 0.1), ("2024-06-01T00:01:00Z", 0.2),
                                  ("2024-06-01T00:04:00Z", 0.5)]))
    s = ingest_series(path)
    assert len(s) == 3
    np.testing.assert_array_equal(s.values, [0.1, 0.2, 0.5])
    assert len(s.gaps) == 1 and s.gaps[0].index == 1 and s.gaps[0].missing == 2.0


def test_ingest_without_header(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("2024-06-01T00:00:00,1.0\n2024-06-01T00:01:00,2.0\n")
    assert len(ingest_series(path)) == 2


@pytest.mark.parametrize("body,line", [
    ("2024-06-01T00:00:00,1.0\n2024-06-01T00:01:00\n", 3),
    ("2024-06-01T00:00:00,1.0\nyesterday,2.0\n", 3),
    ("2024-06-01T00:00:00,abc\n", 2),
    ("2024-06-01T00:00:00,nan\n", 2),
    ("2024-06-01T00:01:00,1.0\n2024-06-01T00:00:00,1.0\n", 3),
    ("2024-06-01T00:00:00,1.0\n2024-06-01T00:00:00,1.0\n", 3),
])
def test_ingest_errors_name_the_line(tmp_path, body, line):
    path = tmp_path / "bad.csv"
    path.write_text("timestamp_iso8601,attenuation_db\n" + body)
    with pytest.raises(SeriesFormatError) as info:
        ingest_series(path)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=1, max_size=50))
def test_series_write_read_is_bit_exact(values):
    import tempfile
    from pathlib import Path
    t0 = datetime(2024, 6, 1, tzinfo=timezone.utc)
    stamps = [t0 + timedelta(minutes=i) for i in range(len(values))]
    with tempfile.TemporaryDirectory() as d:
        path = Path(d) / "s.csv"
        write_series(path, stamps, values)
        s = ingest_series(path)
    assert s.values.tobytes() == np.asarray(values, dtype=float).tobytes()
    assert s.timestamps == tuple(stamps) and not s.gaps


def test_csv_writer_formats(tmp_path):
    path = write_csv(tmp_path / "t.csv", ["a", "b", "c", "d"], [[0.1, True, 3, None]])
    header, rows = read_csv(path)
    assert header == ["a", "b", "c", "d"]
    assert rows == [["0.1", "1", "3", ""]]
    assert b"\r" not in path.read_bytes()
    assert float(rows[0][0]) == 0.1 and not math.isnan(float(rows[0][0]))
