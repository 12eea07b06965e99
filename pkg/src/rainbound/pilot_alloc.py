"""Weather-adaptive pilot allocation under a minimum spectral-efficiency constraint.

The allocator spends as many symbols on pilots as the rate constraint allows:
more pilots lower the attenuation noise and so the rain-rate bound, while the
spectral efficiency falls once the pilot fraction passes its rate optimum.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from ._numerics import bisect
from .errors import ConfigError, DomainError, NoSolutionError
from .fisher_bounds import RainPrior, bcrb, data_information, temporal_gain
from .itu_atmos import rain_attenuation
from .link_rate import spectral_efficiency, throughput_optimal_eta
from .scenario import LinkConfig

FIXED_BASELINES = (0.05, 0.10, 0.20)
RAIN_BRACKET = (0.0, 1000.0)
HIGH_SNR_FLOOR = 10.0


@dataclass(frozen=True)
class AllocationPolicy:
    """Rate floor ``c_min`` (bit/s/Hz) and the admissible pilot-fraction range.

    With ``pilot_limited`` the bound treats the attenuation noise as pure
    pilot-averaging noise (variance proportional to ``1/eta``), dropping the
    systematic floor; set it False to keep the floor.
    """

    c_min: float = 1.0
    eta_min: float = 0.01
    eta_max: float = 0.5
    tol: float = 1e-4
    rate_tol: float = 1e-3
    pilot_limited: bool = True

    def __post_init__(self):
        if not 0.0 < self.eta_min < self.eta_max < 1.0:
            raise ConfigError(f"need 0 < eta_min < eta_max < 1, got {self.eta_min}, {self.eta_max}")
        if not self.c_min > 0:
            raise ConfigError("c_min must be positive")
        if not self.tol > 0 or not self.rate_tol > 0:
            raise ConfigError("tolerances must be positive")

    @property
    def bisection_steps(self) -> int:
        return max(0, math.ceil(math.log2((self.eta_max - self.eta_min) / self.tol)))


class Regime(str, enum.Enum):
    FULL_SENSING = "full_sensing"
    THROUGHPUT_TRACKING = "throughput_tracking"
    OUTAGE = "outage"


@dataclass(frozen=True)
class AllocationResult:
    rain_rate: float
    eta_star: float
    regime: Regime
    achieved_c: float
    bound_rmse: float
    mean_snr: float
    iterations: int = 0


def mean_snr_of_rain(rain_rate: float, link: LinkConfig) -> float:
    """Mean SNR after the band-mean rain attenuation plus the fixed baseline (dB)."""
    a = float(np.mean(rain_attenuation(rain_rate, link.grid, link.geometry))) + link.baseline_db
    return link.snr0 * 10.0 ** (-a / 10.0)


def bound_at(rain_rate: float, eta: float, link: LinkConfig, prior: RainPrior | None = None,
             window: int = 1, snr: float | None = None) -> float:
    """Bound RMSE (mm/h) at pilot fraction ``eta``, with noise tied to the pilot count."""
    if snr is None:
        snr = mean_snr_of_rain(rain_rate, link)
    sigma = math.sqrt(link.noise_variance(snr=snr, eta=eta))
    j_d = data_information(rain_rate, link.grid, link.geometry, sigma)
    g_t = 1.0 if prior is None else temporal_gain(prior.temporal_rho, window)
    return bcrb(j_d, prior, g_t).rmse


def _bound_link(link: LinkConfig, policy: AllocationPolicy) -> LinkConfig:
    return link.replace(sigma_sys=0.0) if policy.pilot_limited else link


def _rate_floor_eta(snr: float, link: LinkConfig, policy: AllocationPolicy) -> float:
    return min(max(throughput_optimal_eta(snr, link.n_sym), policy.eta_min), policy.eta_max)


def allocate_at_snr(snr: float, policy: AllocationPolicy, n_sym: int) -> tuple[float, Regime, int]:
    """Pilot fraction, regime and bisection count at a given mean SNR.

    Bisection runs on ``[max(eta_rate, eta_min), eta_max]`` where the rate is
    decreasing in ``eta``, for exactly ``policy.bisection_steps`` iterations,
    and keeps the feasible end of the final bracket (ties go to the larger
    fraction).
    """
    rate = lambda e: spectral_efficiency(e, n_sym, snr)
    lo = min(max(throughput_optimal_eta(snr, n_sym), policy.eta_min), policy.eta_max)
    hi = policy.eta_max
    if rate(hi) >= policy.c_min:
        return hi, Regime.FULL_SENSING, 0
    if rate(lo) < policy.c_min:
        return lo, Regime.OUTAGE, 0
    steps = policy.bisection_steps
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if rate(mid) >= policy.c_min:
            lo = mid
        else:
            hi = mid
    return lo, Regime.THROUGHPUT_TRACKING, steps


def eta_star(rain_rate: float, policy: AllocationPolicy, link: LinkConfig,
             prior: RainPrior | None = None, window: int = 1) -> AllocationResult:
    """Largest pilot fraction meeting the rate floor at ``rain_rate``."""
    if rain_rate < 0:
        raise DomainError("rain rate must be non-negative")
    snr = mean_snr_of_rain(rain_rate, link)
    eta, regime, iterations = allocate_at_snr(snr, policy, link.n_sym)
    rmse = math.nan
    if rain_rate > 0:
        rmse = bound_at(rain_rate, eta, _bound_link(link, policy), prior, window, snr)
    c = spectral_efficiency(eta, link.n_sym, snr)
    return AllocationResult(float(rain_rate), float(eta), regime, float(c), rmse, snr, iterations)


def _threshold(fn, bracket) -> float:
    lo, hi = bracket
    if fn(lo) <= 0:
        return lo
    if fn(hi) > 0:
        return hi
    try:
        return bisect(fn, lo, hi, xtol=1e-6)
    except NoSolutionError:  # pragma: no cover - excluded by the sign checks above
        return hi


def regime_thresholds(policy: AllocationPolicy, link: LinkConfig,
                      bracket=RAIN_BRACKET) -> tuple[float, float]:
    """Rain rates ``(R_sat, R_out)`` bounding the three allocation regimes.

    ``R_sat`` is where ``eta_max`` stops meeting the rate floor and ``R_out``
    where even the rate-optimal fraction fails. Attenuation grows
    monotonically with rain, so both roots are found by bisection in ``R``.
    Thresholds that are never crossed saturate at the bracket edges.
    """
    def sat(r):
        return spectral_efficiency(policy.eta_max, link.n_sym, mean_snr_of_rain(r, link)) - policy.c_min

    def out(r):
        snr = mean_snr_of_rain(r, link)
        return spectral_efficiency(_rate_floor_eta(snr, link, policy), link.n_sym, snr) - policy.c_min

    r_sat = _threshold(sat, bracket)
    r_out = max(_threshold(out, bracket), r_sat)
    return r_sat, r_out


class HighSnrEta(NamedTuple):
    eta: float
    valid: bool


def eta_high_snr(snr: float, c_min: float) -> HighSnrEta:
    """High-SNR asymptote ``1 - c_min / log2(1 + snr)``, clamped to ``[0, 1]``.

    ``valid`` is False below an SNR of 10 (linear), where the asymptote is
    unreliable.
    """
    if not snr > 0:
        raise DomainError("snr must be positive")
    eta = 1.0 - c_min / math.log2(1.0 + snr)
    return HighSnrEta(min(max(eta, 0.0), 1.0), snr >= HIGH_SNR_FLOOR)


@dataclass(frozen=True)
class SweepRow:
    rain_rate: float
    c_min: float
    scheme: str
    eta: float
    regime: str
    spectral_efficiency: float
    bound_rmse: float
    violates: bool


def allocation_sweep(rain_rates: Sequence[float], policies: Sequence[AllocationPolicy], link: LinkConfig,
                     prior: RainPrior | None = None, window: int = 1,
                     baselines: Sequence[float] = FIXED_BASELINES) -> list[SweepRow]:
    """Adaptive allocation and fixed-fraction baselines on an ``(R, c_min)`` grid.

    Baseline rows flag ``violates`` when their spectral efficiency misses
    ``c_min`` by more than the policy's rate tolerance.
    """
    if len(rain_rates) == 0 or len(policies) == 0:
        raise ConfigError("rain-rate grid and policy list must be non-empty")
    rows = []
    for policy in policies:
        for r in rain_rates:
            res = eta_star(r, policy, link, prior, window)
            rows.append(SweepRow(float(r), policy.c_min, "adaptive", res.eta_star, res.regime.value,
                                 res.achieved_c, res.bound_rmse, False))
            for eta in baselines:
                c = spectral_efficiency(eta, link.n_sym, res.mean_snr)
                rmse = bound_at(r, eta, _bound_link(link, policy), prior, window, res.mean_snr)
                rows.append(SweepRow(float(r), policy.c_min, f"fixed_{eta:g}", float(eta), "fixed",
                                     c, rmse, c < policy.c_min - policy.rate_tol))
    return rows


def improvement_over_baselines(rain_rate: float, policy: AllocationPolicy, link: LinkConfig,
                               prior: RainPrior | None = None, window: int = 1,
                               baselines: Sequence[float] = FIXED_BASELINES) -> float:
    """Relative bound-variance reduction of the adaptive scheme over the best feasible baseline.

    Returns ``nan`` when no baseline meets the rate floor.
    """
    res = eta_star(rain_rate, policy, link, prior, window)
    bl = _bound_link(link, policy)
    feasible = [bound_at(rain_rate, e, bl, prior, window, res.mean_snr) for e in baselines
                if spectral_efficiency(e, link.n_sym, res.mean_snr) >= policy.c_min]
    if not feasible:
        return math.nan
    return 1.0 - (res.bound_rmse / min(feasible)) ** 2
