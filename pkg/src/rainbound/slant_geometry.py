"""Elevation dependence of the rain path, the link SNR and the detection floor.

Lowering the elevation lengthens the rain path (more rain leverage) but also
lowers the SNR and raises the pilot estimation noise. The minimum detectable
rain rate therefore has an interior optimum once noise is tied to the SNR.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from ._numerics import golden_section_minimize, is_unimodal
from .errors import DomainError
from .fisher_bounds import RainPrior, bcrb, data_information, rmin_solve, temporal_gain
from .itu_atmos import AtmosphericState, PathGeometry, attenuation_breakdown
from .link_rate import spectral_efficiency
from .scenario import LinkConfig

P618_FLOOR_DEG = 15.0
TERMINAL_FLOOR_DEG = 20.0
ELEVATION_RANGE = (5.0, 90.0)


class NoiseMode(str, enum.Enum):
    REALISTIC = "realistic_noise"
    CONSTANT = "constant_noise"


def leff_of_elevation(elevation: float, geom: PathGeometry | None = None) -> float:
    """Anchored effective rain path (km) at ``elevation`` degrees."""
    if not 0.0 < elevation <= 90.0:
        raise DomainError(f"elevation must lie in (0, 90] degrees, got {elevation}")
    geom = geom or PathGeometry()
    return geom.at_elevation(elevation).anchored_rain_path()


def snr_of_elevation(elevation, snr0: float, base_elevation: float = 38.0):
    """Clear-sky SNR scaled by ``sin^2`` of the elevation relative to the base."""
    el = np.asarray(elevation, dtype=float)
    if np.any(el <= 0) or np.any(el > 90):
        raise DomainError("elevation must lie in (0, 90] degrees")
    out = snr0 * np.sin(np.radians(el)) ** 2 / math.sin(math.radians(base_elevation)) ** 2
    return float(out) if out.ndim == 0 else out


def subcarrier_snr(elevation: float, rain_rate: float, link: LinkConfig, rain_in_snr: bool = True,
                   include_baseline: bool = False) -> np.ndarray:
    """Mean SNR on every subcarrier at ``elevation`` under ``rain_rate``.

    ``rain_in_snr`` applies the rain attenuation of the slant path;
    ``include_baseline`` also applies the gas and cloud terms.
    """
    geom = link.geometry.at_elevation(elevation)
    base = snr_of_elevation(elevation, link.snr0, geom.base_elevation)
    atten = np.zeros(link.grid.size)
    if rain_in_snr or include_baseline:
        parts = attenuation_breakdown(link.grid, AtmosphericState(rain_rate), geom)
        if rain_in_snr:
            atten = atten + parts.rain
        if include_baseline:
            atten = atten + parts.gas + parts.cloud
    return base * 10.0 ** (-atten / 10.0)


def _noise_sigma(snr: np.ndarray, link: LinkConfig, eta: float | None = None) -> np.ndarray:
    # an SNR that underflowed to zero carries no information
    return np.sqrt([link.noise_variance(snr=float(g), eta=eta) if g > 0 else math.inf for g in snr])


def operating_bound(rain_rate: float, elevation: float, link: LinkConfig,
                    mode: NoiseMode | str = NoiseMode.REALISTIC, prior: RainPrior | None = None,
                    window: int = 1, rain_in_snr: bool = True, include_baseline: bool = False) -> float:
    """Bound variance (mm/h)^2 on the rain rate at one elevation.

    ``prior=None`` gives the CRB, otherwise the Van Trees bound with a
    ``window``-snapshot Gauss-Markov record.
    """
    mode = NoiseMode(mode)
    geom = link.geometry.at_elevation(elevation)
    if mode is NoiseMode.CONSTANT:
        sigma = link.reference_noise().sigma_n
    else:
        snr = subcarrier_snr(elevation, rain_rate, link, rain_in_snr, include_baseline)
        sigma = _noise_sigma(snr, link)
    j_d = data_information(rain_rate, link.grid, geom, sigma)
    if j_d == 0.0 and prior is None:
        return math.inf
    g_t = 1.0 if prior is None else temporal_gain(prior.temporal_rho, window)
    return bcrb(j_d, prior, g_t).variance


def rmin_of_elevation(elevation: float, link: LinkConfig, mode: NoiseMode | str = NoiseMode.REALISTIC,
                      rain_in_snr: bool = True, include_baseline: bool = False) -> float:
    """Minimum detectable rain rate (mm/h) of the CRB at ``elevation``.

    Realistic mode ties the noise to the elevation- and rain-dependent SNR;
    constant mode keeps the reference noise.
    """
    return rmin_solve(lambda r: operating_bound(r, elevation, link, mode, None, 1,
                                                rain_in_snr, include_baseline))


class ClosedFormElevation(NamedTuple):
    elevation: float
    x_star: float
    beta_star: float
    saturated: bool


def sensing_optimal_elevation_closed(link: LinkConfig) -> ClosedFormElevation:
    """Closed-form sensing-optimal elevation (degrees) with gas and rain neglected.

    Minimises ``sigma_n^2(theta) / L_eff(theta)^2`` where the pilot estimation
    noise grows as the SNR falls with ``sin^2(theta)``. When the optimum lies
    beyond zenith the result saturates at 90 degrees.
    """
    n_p = link.pilot_count
    if link.snr0 <= 0 or n_p < 1:
        raise DomainError("need positive clear-sky SNR and at least one pilot")
    x_star = 1.0 + math.sqrt(1.0 + n_p * link.sigma_sys ** 2 / link.c0)
    beta_star = 1.0 / (x_star - 1.0)
    arg = beta_star / link.snr0
    if arg >= 1.0:
        return ClosedFormElevation(90.0, x_star, beta_star, True)
    s = math.sin(math.radians(link.geometry.base_elevation)) * math.sqrt(arg)
    if s >= 1.0:
        return ClosedFormElevation(90.0, x_star, beta_star, True)
    return ClosedFormElevation(math.degrees(math.asin(s)), x_star, beta_star, False)


def _unimodal_bracket(fn, lo: float, hi: float, n: int = 18) -> tuple[float, float]:
    grid = np.linspace(lo, hi, n)
    vals = [fn(x) for x in grid]
    if is_unimodal(vals):
        return lo, hi
    # several dips on the coarse grid: refine around the best sample only
    i = int(np.argmin(vals))
    return float(grid[max(i - 1, 0)]), float(grid[min(i + 1, n - 1)])


def sensing_optimal_elevation_numeric(link: LinkConfig, bracket=ELEVATION_RANGE, tol: float = 0.05,
                                      rain_in_snr: bool = False, include_baseline: bool = False) -> float:
    """Golden-section minimiser of the realistic R_min profile (degrees)."""
    fn = lambda el: rmin_of_elevation(el, link, NoiseMode.REALISTIC, rain_in_snr, include_baseline)
    lo, hi = _unimodal_bracket(fn, *bracket)
    return golden_section_minimize(fn, lo, hi, tol=tol)


@dataclass(frozen=True)
class ElevationSweep:
    """R_min profile over elevation; rows below ``p618_floor`` are extrapolations."""

    elevations: tuple[float, ...]
    rmin_values: tuple[float, ...]
    mode: NoiseMode = NoiseMode.REALISTIC
    p618_floor: float = P618_FLOOR_DEG
    terminal_floor: float = TERMINAL_FLOOR_DEG

    def __post_init__(self):
        object.__setattr__(self, "mode", NoiseMode(self.mode))
        if len(self.elevations) != len(self.rmin_values):
            raise DomainError("elevations and R_min values differ in length")
        lo, hi = ELEVATION_RANGE
        if any(not lo <= e <= hi for e in self.elevations):
            raise DomainError(f"elevations must lie in [{lo}, {hi}] degrees")

    @property
    def p618_zone(self) -> tuple[bool, ...]:
        return tuple(e < self.p618_floor for e in self.elevations)

    @property
    def below_terminal_floor(self) -> tuple[bool, ...]:
        return tuple(e < self.terminal_floor for e in self.elevations)


def elevation_sweep(elevations: Sequence[float], link: LinkConfig,
                    mode: NoiseMode | str = NoiseMode.REALISTIC, **kwargs) -> ElevationSweep:
    values = tuple(rmin_of_elevation(float(e), link, mode, **kwargs) for e in elevations)
    return ElevationSweep(tuple(float(e) for e in elevations), values, NoiseMode(mode))


class LocusPoint(NamedTuple):
    rain_rate: float
    theta_sens: float
    theta_comm: float

    @property
    def gap(self) -> float:
        return self.theta_comm - self.theta_sens


def _argmin_on(fn, lo: float, hi: float, tol: float) -> float:
    # golden section cannot land exactly on an edge optimum, so compare the edges too
    x = golden_section_minimize(fn, lo, hi, tol=tol)
    return min((lo, x, hi), key=fn)


def optimal_locus(rain_rates: Sequence[float], link: LinkConfig, cap=(P618_FLOOR_DEG, 90.0),
                  prior: RainPrior | None = None, window: int = 1, include_baseline: bool = False,
                  tol: float = 0.05) -> list[LocusPoint]:
    """Sensing- and communication-optimal elevations against rain rate.

    The sensing optimum minimises the bound RMSE at each rain rate with rain
    degrading the SNR; the communication optimum maximises the spectral
    efficiency at the configured pilot fraction.
    """
    lo, hi = cap
    out = []
    for r in rain_rates:
        if not r > 0:
            raise DomainError("rain rates must be positive")
        bound = lambda el: operating_bound(r, el, link, NoiseMode.REALISTIC, prior, window,
                                           True, include_baseline)
        theta_s = _argmin_on(bound, lo, hi, tol)

        def rate(el):
            snr = subcarrier_snr(el, r, link, True, include_baseline)
            return spectral_efficiency(link.eta, link.n_sym, float(np.mean(snr)))

        theta_c = _argmin_on(lambda el: -rate(el), lo, hi, tol)
        out.append(LocusPoint(float(r), float(theta_s), float(theta_c)))
    return out
