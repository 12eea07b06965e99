"""Attenuation time-series ingestion and full-precision CSV tables."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import SeriesFormatError

CADENCE = timedelta(minutes=1)
SERIES_HEADER = ("timestamp_iso8601", "attenuation_db")


@dataclass(frozen=True)
class Gap:
    """Missing samples after ``index`` (0-based row of the series)."""

    index: int
    missing: float


@dataclass(frozen=True)
class Series:
    timestamps: tuple[datetime, ...]
    values: np.ndarray
    gaps: tuple[Gap, ...]

    def __len__(self) -> int:
        return len(self.timestamps)


def _parse_time(text: str, line: int) -> datetime:
    try:
        return datetime.fromisoformat(text.strip().replace("Z", "+00:00"))
    except ValueError:
        raise SeriesFormatError(f"bad ISO 8601 timestamp {text.strip()!r}", line) from None


def ingest_series(path) -> Series:
    """Read a ``timestamp_iso8601,attenuation_db`` file sampled once per minute.

    A header row is optional. Timestamps must increase strictly; steps longer
    than one minute are reported as gaps (fractional ``missing`` counts flag
    an off-cadence step).
    """
    times: list[datetime] = []
    values: list[float] = []
    gaps: list[Gap] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for line_no, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if line_no == 1 and row[0].strip().lower() == SERIES_HEADER[0]:
                continue
            if len(row) != 2:
                raise SeriesFormatError(f"expected 2 columns, found {len(row)}", line_no)
            t = _parse_time(row[0], line_no)
            try:
                a = float(row[1])
            except ValueError:
                raise SeriesFormatError(f"bad attenuation value {row[1].strip()!r}", line_no) from None
            if not math.isfinite(a):
                raise SeriesFormatError("attenuation must be finite", line_no)
            if times:
                try:
                    step = t - times[-1]
                except TypeError:
                    raise SeriesFormatError("mixes timezone-aware and naive timestamps", line_no) from None
                if step <= timedelta(0):
                    raise SeriesFormatError(f"timestamp {row[0].strip()} does not increase", line_no)
                if step != CADENCE:
                    gaps.append(Gap(len(times) - 1, step / CADENCE - 1.0))
            times.append(t)
            values.append(a)
    return Series(tuple(times), np.asarray(values), tuple(gaps))


def write_series(path, timestamps: Sequence[datetime], values: Iterable[float]) -> None:
    rows = [(t.isoformat(), repr(float(v))) for t, v in zip(timestamps, values, strict=True)]
    write_csv(path, SERIES_HEADER, rows)


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return ""
    return str(value)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """Write rows with shortest round-trip float formatting and ``\\n`` line ends."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])
    return path


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def write_json(path, payload) -> Path:
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
