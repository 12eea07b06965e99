"""Link and noise configuration shared across the bound, geometry and allocation code."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .errors import DomainError
from .itu_atmos import FrequencyGrid, PathGeometry

C0 = (10.0 / math.log(10.0)) ** 2


@dataclass(frozen=True)
class NoiseModel:
    """dB-domain attenuation noise from pilot power averaging.

    ``variance = c0 / N_p * (1 + 1/snr)**2 + sigma_sys**2`` unless
    ``fixed_sigma_n`` overrides it.
    """

    sigma_sys: float = 0.63
    c0: float = C0
    pilot_count: int = 30
    snr: float = 10.0
    fixed_sigma_n: float | None = None

    def __post_init__(self):
        if self.fixed_sigma_n is not None:
            if not self.fixed_sigma_n > 0:
                raise DomainError("fixed sigma_n must be positive")
            return
        if self.pilot_count < 1 or self.snr <= 0 or self.c0 <= 0 or self.sigma_sys < 0:
            raise DomainError("noise model needs N_p >= 1, snr > 0, c0 > 0, sigma_sys >= 0")

    @property
    def estimation_variance(self) -> float:
        """Pilot-averaging term alone, without the systematic floor.

        Infinite once the SNR is so low that the term overflows.
        """
        try:
            return self.c0 / self.pilot_count * (1.0 + 1.0 / self.snr) ** 2
        except (OverflowError, ZeroDivisionError):
            return math.inf

    @property
    def variance(self) -> float:
        if self.fixed_sigma_n is not None:
            return self.fixed_sigma_n ** 2
        return self.estimation_variance + self.sigma_sys ** 2

    @property
    def sigma_n(self) -> float:
        return math.sqrt(self.variance)


@dataclass(frozen=True)
class LinkConfig:
    """Geometry and signal budget of one downlink.

    ``sigma_n`` is the measured clear-sky noise at the configured elevation and
    pilot fraction. When set, pilot- and SNR-dependent noise is computed as
    ``sigma_n**2`` times the relative change of the pilot-averaging model;
    when ``None`` the model is used as is.
    """

    grid: FrequencyGrid = field(default_factory=FrequencyGrid.ku)
    geometry: PathGeometry = field(default_factory=PathGeometry)
    snr0_db: float = 10.0
    n_sym: int = 302
    eta: float = 0.1
    bandwidth_mhz: float = 240.0
    sigma_sys: float = 0.63
    c0: float = C0
    sigma_n: float | None = 1.0
    baseline_db: float = 0.0

    def __post_init__(self):
        if self.n_sym < 2:
            raise DomainError("frame needs at least two symbols")
        if not 0.0 < self.eta < 1.0:
            raise DomainError("pilot fraction must lie in (0, 1)")
        if self.sigma_n is not None and not self.sigma_n > 0:
            raise DomainError("sigma_n must be positive")

    @property
    def snr0(self) -> float:
        return 10.0 ** (self.snr0_db / 10.0)

    @property
    def pilot_count(self) -> int:
        return pilot_count(self.eta, self.n_sym)

    @property
    def l_eff(self) -> float:
        return self.geometry.anchored_rain_path()

    def noise_model(self, snr: float | None = None, eta: float | None = None) -> NoiseModel:
        """Uncalibrated pilot-averaging noise model at ``snr`` and ``eta``."""
        return NoiseModel(
            sigma_sys=self.sigma_sys,
            c0=self.c0,
            pilot_count=pilot_count(self.eta if eta is None else eta, self.n_sym),
            snr=self.snr0 if snr is None else snr,
        )

    def reference_noise(self) -> NoiseModel:
        """Noise at the configured operating point (fixed when ``sigma_n`` is set)."""
        if self.sigma_n is not None:
            return NoiseModel(fixed_sigma_n=self.sigma_n)
        return self.noise_model()

    def noise_variance(self, snr: float | None = None, eta: float | None = None) -> float:
        """Noise variance (dB^2) at ``snr`` and ``eta``, calibrated to ``sigma_n``."""
        model = self.noise_model(snr, eta).variance
        if self.sigma_n is None:
            return model
        return self.sigma_n ** 2 * model / self.noise_model().variance

    def replace(self, **changes) -> "LinkConfig":
        return replace(self, **changes)


def pilot_count(eta: float, n_sym: int) -> int:
    """Physical pilot count ``round(eta n_sym)``, at least one."""
    return max(1, int(round(eta * n_sym)))
