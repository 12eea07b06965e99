"""Sectioned key-value run configuration.

The file is INI-like: ``[section]`` headers, ``key = value`` lines and ``#``
comments. Every key carries its unit in the serialised comment, and the
defaults are the reference system parameters (Ku band 10.7-12.7 GHz, 302
symbols per frame, 240 MHz, sigma_n 1 dB, 10 dB clear-sky SNR, 3.1 km rain
height, 38 degree elevation, 3 km effective rain path).
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .fisher_bounds import RainPrior
from .itu_atmos import CoefficientTable, FrequencyGrid, PathGeometry, PathMode, Polarization
from .montecarlo import NoiseMode, RngSpec
from .pilot_alloc import AllocationPolicy
from .rain_detect import CusumConfig
from .scenario import C0, LinkConfig


def _f(default, unit, **kw):
    return field(default=default, metadata={"unit": unit, **kw})


@dataclass(frozen=True)
class LinkSection:
    f_min_ghz: float = _f(10.7, "GHz, lowest subcarrier")
    f_max_ghz: float = _f(12.7, "GHz, highest subcarrier")
    subcarriers: int = _f(5, "count K")
    polarization: str = _f("h", "h or v")
    coefficient_mode: str = _f("band_average", "band_average or full_p838")
    coefficient_file: str = _f("", "optional f_GHz,kH,alphaH table replacing the built-in regression")
    k_bar: float = _f(0.022, "band-average P.838 k, closed forms and detector")
    alpha_bar: float = _f(1.19, "band-average P.838 alpha, closed forms and detector")
    n_sym: int = _f(302, "OFDM symbols per frame")
    bandwidth_mhz: float = _f(240.0, "MHz")
    eta: float = _f(0.1, "pilot fraction")
    sigma_n_db: float = _f(1.0, "dB, attenuation noise at the reference operating point")
    snr0_db: float = _f(10.0, "dB, clear-sky SNR at the base elevation")
    sigma_sys_db: float = _f(0.63, "dB, systematic noise floor")
    c0: float = _f(C0, "dB^2, pilot-averaging constant (10/ln 10)^2")
    rain_height_km: float = _f(3.1, "km")
    elevation_deg: float = _f(38.0, "degrees")
    base_elevation_deg: float = _f(38.0, "degrees, anchor of the effective rain path")
    base_rain_path_km: float = _f(3.0, "km, effective rain path at the base elevation")
    gas_path_km: float = _f(10.0, "km")
    cloud_path_km: float = _f(2.0, "km")
    path_mode: str = _f("anchored", "anchored or p618")
    baseline_db: float = _f(0.0, "dB, fixed gas+cloud loss applied to the allocation SNR")


@dataclass(frozen=True)
class PriorSection:
    mean_rate: float = _f(5.2, "mm/h, log-normal mean")
    coeff_variation: float = _f(1.05, "dimensionless")
    rho: float = _f(0.95, "lag-1 correlation of ln R at 1 min")
    windows: tuple[int, ...] = _f((1, 10, 30), "min, observation windows", kind="ints")


@dataclass(frozen=True)
class PolicySection:
    c_min: tuple[float, ...] = _f((0.5, 1.0, 1.5, 2.0), "bit/s/Hz, rate floors", kind="floats")
    eta_min: float = _f(0.01, "pilot fraction")
    eta_max: float = _f(0.5, "pilot fraction")
    tolerance: float = _f(1e-4, "pilot fraction, bisection tolerance")
    rate_tolerance: float = _f(1e-3, "bit/s/Hz")
    pilot_limited: bool = _f(True, "drop the systematic floor from the allocation bound")
    baselines: tuple[float, ...] = _f((0.05, 0.10, 0.20), "fixed pilot fractions", kind="floats")


@dataclass(frozen=True)
class DetectSection:
    design_rate: float = _f(5.0, "mm/h")
    p_fa: float = _f(1e-3, "false-alarm probability")
    sigma_n_db: float = _f(1.0, "dB, 2.0 models wet-antenna loss")
    windows: tuple[float, ...] = _f((5.0, 10.0, 30.0), "min, detection windows", kind="floats")
    series_file: str = _f("", "optional timestamp_iso8601,attenuation_db series")


@dataclass(frozen=True)
class ExperimentSection:
    rain_rates: tuple[float, ...] = _f(
        (0.5, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0,
         55.0, 60.0, 65.0, 70.0, 80.0, 90.0, 100.0), "mm/h", kind="floats")
    elevations: tuple[float, ...] = _f(
        (5.0, 7.5, 10.0, 12.5, 15.0, 20.0, 25.0, 30.0, 38.0, 45.0, 50.0, 60.0, 70.0, 80.0, 90.0),
        "degrees", kind="floats")
    locus_rates: tuple[float, ...] = _f((3.0, 5.0, 10.0, 15.0, 20.0, 25.0), "mm/h", kind="floats")
    pareto_etas: tuple[float, ...] = _f((0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5), "pilot fractions",
                                        kind="floats")
    detect_rates: tuple[float, ...] = _f((5.0, 10.0, 15.0, 20.0, 30.0, 50.0, 80.0), "mm/h", kind="floats")
    estimate_rates: tuple[float, ...] = _f((2.0, 5.0, 20.0), "mm/h", kind="floats")
    link_counts: tuple[int, ...] = _f((1, 3, 10, 22, 46, 100, 215), "links", kind="ints")
    trials_estimator: int = _f(10_000, "Monte Carlo trials")
    trials_cusum: int = _f(5000, "Monte Carlo trials")
    trials_fusion: int = _f(300, "Monte Carlo trials")
    noise_mode: str = _f("db_gaussian", "db_gaussian or chi_squared_pilot")


@dataclass(frozen=True)
class RunSection:
    seed: int = _f(20240601, "unsigned 64-bit")
    stream_id: int = _f(0, "unsigned 64-bit")
    out_dir: str = _f("out", "output directory")


SECTIONS = {
    "link": LinkSection,
    "prior": PriorSection,
    "policy": PolicySection,
    "detect": DetectSection,
    "experiment": ExperimentSection,
    "run": RunSection,
}

_CHOICES = {
    ("link", "polarization"): {"h", "v"},
    ("link", "coefficient_mode"): {"band_average", "full_p838"},
    ("link", "path_mode"): {"anchored", "p618"},
    ("experiment", "noise_mode"): {"db_gaussian", "chi_squared_pilot"},
}


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(_format(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_value(section: str, f: dataclasses.Field, text: str):
    kind = f.metadata.get("kind")
    default = f.default
    where = f"[{section}] {f.name}"
    text = text.strip()
    try:
        if kind == "floats":
            return tuple(float(v) for v in text.split(",") if v.strip())
        if kind == "ints":
            return tuple(int(v) for v in text.split(",") if v.strip())
        if isinstance(default, bool):
            low = text.lower()
            if low not in ("true", "false", "yes", "no", "1", "0"):
                raise ValueError(text)
            return low in ("true", "yes", "1")
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        return text
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {text!r}") from None


@dataclass(frozen=True)
class RunConfig:
    link: LinkSection = field(default_factory=LinkSection)
    prior: PriorSection = field(default_factory=PriorSection)
    policy: PolicySection = field(default_factory=PolicySection)
    detect: DetectSection = field(default_factory=DetectSection)
    experiment: ExperimentSection = field(default_factory=ExperimentSection)
    run: RunSection = field(default_factory=RunSection)

    def __post_init__(self):
        for (section, key), allowed in _CHOICES.items():
            value = getattr(getattr(self, section), key)
            if value not in allowed:
                raise ConfigError(f"[{section}] {key}: {value!r} not in {sorted(allowed)}")
        for name in ("rain_rates", "elevations", "locus_rates", "detect_rates", "estimate_rates"):
            if not getattr(self.experiment, name):
                raise ConfigError(f"[experiment] {name}: grid is empty")

    # -- text form -----------------------------------------------------------------
    @classmethod
    def parse(cls, text: str) -> "RunConfig":
        cp = configparser.ConfigParser(comment_prefixes=("#", ";"), inline_comment_prefixes=("#",),
                                       interpolation=None)
        cp.optionxform = str
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"malformed configuration: {exc}") from None
        unknown = set(cp.sections()) - set(SECTIONS)
        if unknown:
            raise ConfigError(f"unknown section(s) {sorted(unknown)}")
        parts = {}
        for name, section_cls in SECTIONS.items():
            fields = {f.name: f for f in dataclasses.fields(section_cls)}
            values = {}
            if cp.has_section(name):
                for key, raw in cp.items(name):
                    if key not in fields:
                        raise ConfigError(f"[{name}] unknown key {key!r}")
                    values[key] = _parse_value(name, fields[key], raw)
            parts[name] = section_cls(**values)
        return cls(**parts)

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        return cls.parse(text)

    def serialize(self) -> str:
        lines = []
        for name in SECTIONS:
            section = getattr(self, name)
            lines.append(f"[{name}]")
            for f in dataclasses.fields(section):
                lines.append(f"# {f.metadata['unit']}")
                lines.append(f"{f.name} = {_format(getattr(section, f.name))}")
            lines.append("")
        return "\n".join(lines)

    def digest(self) -> str:
        return hashlib.sha256(self.serialize().encode("utf-8")).hexdigest()

    def replace(self, section: str, **changes) -> "RunConfig":
        return dataclasses.replace(self, **{section: dataclasses.replace(getattr(self, section), **changes)})

    # -- model objects ---------------------------------------------------------------
    def grid(self) -> FrequencyGrid:
        lk = self.link
        if lk.subcarriers < 1:
            raise ConfigError("[link] subcarriers must be at least 1")
        table = None
        if lk.coefficient_file:
            try:
                table = CoefficientTable.from_file(lk.coefficient_file)
            except OSError as exc:
                raise ConfigError(f"cannot read coefficient file {lk.coefficient_file}: {exc}") from None
        freqs = tuple(np.linspace(lk.f_min_ghz, lk.f_max_ghz, lk.subcarriers))
        return FrequencyGrid(freqs, Polarization(lk.polarization),
                             band_average=lk.coefficient_mode == "band_average", table=table)

    def geometry(self) -> PathGeometry:
        lk = self.link
        return PathGeometry(lk.elevation_deg, lk.rain_height_km, lk.gas_path_km, lk.cloud_path_km,
                            lk.base_elevation_deg, lk.base_rain_path_km, PathMode(lk.path_mode))

    def link_config(self) -> LinkConfig:
        lk = self.link
        return LinkConfig(grid=self.grid(), geometry=self.geometry(), snr0_db=lk.snr0_db, n_sym=lk.n_sym,
                          eta=lk.eta, bandwidth_mhz=lk.bandwidth_mhz, sigma_sys=lk.sigma_sys_db, c0=lk.c0,
                          sigma_n=lk.sigma_n_db, baseline_db=lk.baseline_db)

    def rain_prior(self) -> RainPrior:
        p = self.prior
        return RainPrior(p.mean_rate, p.coeff_variation, p.rho)

    def policies(self) -> list[AllocationPolicy]:
        p = self.policy
        return [AllocationPolicy(c, p.eta_min, p.eta_max, p.tolerance, p.rate_tolerance, p.pilot_limited)
                for c in p.c_min]

    def cusum_config(self) -> CusumConfig:
        d = self.detect
        return CusumConfig(d.design_rate, d.sigma_n_db, d.p_fa, self.link.k_bar, self.link.alpha_bar,
                           self.geometry().anchored_rain_path())

    def rng_spec(self) -> RngSpec:
        return RngSpec(self.run.seed, self.run.stream_id)

    def noise_mode(self) -> NoiseMode:
        return NoiseMode(self.experiment.noise_mode)
