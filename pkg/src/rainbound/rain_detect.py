"""CUSUM detection of rain onset on a band-mean attenuation series.

Samples arrive once per minute, so delays and run lengths are in minutes.
Alarm times count samples from 1: an alarm raised on the ``n``-th sample has
``alarm_time == n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .errors import DomainError, UndetectableError

SIEGMUND_SHIFT = 1.166
WET_ANTENNA_SIGMA_DB = 2.0


def design_mean(design_rate: float, k_bar: float = 0.022, alpha_bar: float = 1.19,
                l_eff: float = 3.0) -> float:
    """Expected rain attenuation (dB) ``k R_d**alpha L_eff`` at the design rate."""
    if design_rate < 0:
        raise DomainError("design rate must be non-negative")
    return k_bar * design_rate ** alpha_bar * l_eff


@dataclass(frozen=True)
class CusumConfig:
    """Detector tuned to the attenuation expected at ``design_rate`` (mm/h)."""

    design_rate: float = 5.0
    sigma_n: float = 1.0
    p_fa: float = 1e-3
    k_bar: float = 0.022
    alpha_bar: float = 1.19
    l_eff: float = 3.0

    def __post_init__(self):
        if not self.design_rate > 0:
            raise DomainError("design rate must be positive")
        if not self.sigma_n > 0:
            raise DomainError("sigma_n must be positive")
        if not 0.0 < self.p_fa < 0.5:
            raise DomainError("false-alarm probability must lie in (0, 0.5)")
        if min(self.k_bar, self.alpha_bar, self.l_eff) <= 0:
            raise DomainError("band coefficients and path must be positive")

    @property
    def mu_d(self) -> float:
        return design_mean(self.design_rate, self.k_bar, self.alpha_bar, self.l_eff)

    @property
    def h(self) -> float:
        return self.sigma_n ** 2 / self.mu_d * math.log(1.0 / self.p_fa)

    def mean_attenuation(self, rain_rate: float) -> float:
        return design_mean(rain_rate, self.k_bar, self.alpha_bar, self.l_eff)

    def drift(self, rain_rate: float) -> float:
        """Mean CUSUM increment per minute under rain rate ``rain_rate``."""
        return self.mean_attenuation(rain_rate) - self.mu_d / 2.0

    def with_wet_antenna(self) -> "CusumConfig":
        return replace(self, sigma_n=WET_ANTENNA_SIGMA_DB)


@dataclass(frozen=True)
class CusumState:
    s: float = 0.0
    alarmed: bool = False
    alarm_time: int | None = None
    t: int = 0


def cusum_update(state: CusumState, sample: float, config: CusumConfig) -> CusumState:
    """One step ``S <- max(0, S + A - mu_d/2)``; the alarm latches once ``S > h``."""
    if not math.isfinite(sample):
        raise DomainError("attenuation sample must be finite")
    s = max(0.0, state.s + sample - config.mu_d / 2.0)
    t = state.t + 1
    if state.alarmed:
        return CusumState(s, True, state.alarm_time, t)
    if s > config.h:
        return CusumState(s, True, t, t)
    return CusumState(s, False, None, t)


def add_wald(rain_rate: float, config: CusumConfig) -> float:
    """Wald approximation of the average detection delay (minutes)."""
    drift = config.drift(rain_rate)
    if drift <= 0:
        raise UndetectableError(f"R={rain_rate} mm/h gives non-positive drift {drift:.4g} dB")
    return config.h / drift


def add_design_matched(config: CusumConfig) -> float:
    """Delay at the design rate, ``2 sigma^2 ln(1/P_FA) / mu_d^2``."""
    return 2.0 * config.sigma_n ** 2 * math.log(1.0 / config.p_fa) / config.mu_d ** 2


def detection_probability(rain_rate: float, window: float, config: CusumConfig) -> float:
    """Probability of an alarm within ``window`` minutes of onset, exponential delay model."""
    if not window > 0:
        raise DomainError("window must be positive")
    if config.drift(rain_rate) <= 0:
        return 0.0
    return 1.0 - math.exp(-window / add_wald(rain_rate, config))


class SeriesRun(NamedTuple):
    alarm_time: int | None
    trajectory: np.ndarray


def run_series(series, config: CusumConfig) -> SeriesRun:
    """Run the detector over a whole series and keep the statistic trajectory."""
    x = np.asarray(series, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("series must be finite")
    traj = np.empty(x.size)
    s = 0.0
    alarm = None
    half = config.mu_d / 2.0
    h = config.h
    for i, a in enumerate(x):
        s = max(0.0, s + a - half)
        traj[i] = s
        if alarm is None and s > h:
            alarm = i + 1
    return SeriesRun(alarm, traj)


def run_batch(samples, config: CusumConfig) -> np.ndarray:
    """First alarm time of every row of a ``trials x T`` sample matrix (0 means none)."""
    x = np.atleast_2d(np.asarray(samples, dtype=float))
    s = np.zeros(x.shape[0])
    alarm = np.zeros(x.shape[0], dtype=np.int64)
    half = config.mu_d / 2.0
    for t in range(x.shape[1]):
        s = np.maximum(0.0, s + x[:, t] - half)
        hit = (alarm == 0) & (s > config.h)
        alarm[hit] = t + 1
    return alarm


def arl0_nominal(config: CusumConfig) -> float:
    """``exp(h mu_d / sigma^2) = 1 / P_FA``, a lower bound on the in-control run length."""
    return math.exp(config.h * config.mu_d / config.sigma_n ** 2)


def arl0_siegmund(config: CusumConfig) -> float:
    """Siegmund's corrected-diffusion approximation of the in-control run length."""
    delta = config.mu_d / (2.0 * config.sigma_n)
    b = config.h / config.sigma_n + SIEGMUND_SHIFT
    z = 2.0 * delta * b
    return (math.exp(z) - 1.0 - z) / (2.0 * delta ** 2)
