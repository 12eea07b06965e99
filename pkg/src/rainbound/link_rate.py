"""Pilot-aided OFDM rate model under rain fading.

Pilot fraction ``eta`` splits an ``n_sym``-symbol frame into ``eta * n_sym``
pilots and the rest data. SNRs are linear unless a name says ``_db``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._numerics import golden_section_minimize
from .errors import DomainError


@dataclass(frozen=True)
class FrameConfig:
    n_sym: int = 302
    eta: float = 0.1
    bandwidth_mhz: float = 240.0
    snr0: float = 10.0

    def __post_init__(self):
        if self.snr0 <= 0:
            raise DomainError("clear-sky SNR must be positive")
        n_p = round(self.eta * self.n_sym)
        if not 1 <= n_p <= self.n_sym - 1:
            raise DomainError(f"eta={self.eta} gives {n_p} pilots out of {self.n_sym} symbols")

    @property
    def pilot_count(self) -> int:
        return round(self.eta * self.n_sym)


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


def mean_snr_under_rain(snr0, attenuation_db):
    """Mean SNR after ``attenuation_db`` of excess path loss."""
    if np.any(np.asarray(snr0) <= 0):
        raise DomainError("clear-sky SNR must be positive")
    out = np.asarray(snr0, dtype=float) * 10.0 ** (-np.asarray(attenuation_db, dtype=float) / 10.0)
    return float(out) if out.ndim == 0 else out


def csi_mse(eta, n_sym, snr):
    """Pilot-based channel estimate MSE ``1 / (eta n_sym snr)``."""
    eta = np.asarray(eta, dtype=float)
    if np.any(eta * n_sym < 1):
        raise DomainError("need at least one pilot symbol")
    out = 1.0 / (eta * n_sym * np.asarray(snr, dtype=float))
    return float(out) if out.ndim == 0 else out


def spectral_efficiency(eta, n_sym, snr):
    """Spectral efficiency (bit/s/Hz) with imperfect pilot-based CSI.

    ``(1 - eta) log2(1 + snr^2 eta N / (1 + snr eta N))``. Vectorised over
    ``eta`` and ``snr``.
    """
    eta = np.asarray(eta, dtype=float)
    snr = np.asarray(snr, dtype=float)
    if np.any(eta <= 0) or np.any(eta > 1):
        raise DomainError("pilot fraction must lie in (0, 1]")
    x = eta * n_sym * snr
    out = (1.0 - eta) * np.log2(1.0 + snr * x / (1.0 + x))
    return float(out) if out.ndim == 0 else out


def spectral_efficiency_grad_eta(eta, n_sym, snr):
    """Analytic derivative of :func:`spectral_efficiency` with respect to ``eta``."""
    eta = np.asarray(eta, dtype=float)
    snr = np.asarray(snr, dtype=float)
    x = eta * n_sym * snr
    eff = snr * x / (1.0 + x)
    deff = snr * n_sym * snr / (1.0 + x) ** 2
    out = -np.log2(1.0 + eff) + (1.0 - eta) * deff / ((1.0 + eff) * math.log(2.0))
    return float(out) if out.ndim == 0 else out


def throughput_optimal_eta(snr, n_sym):
    """Throughput-optimal pilot fraction ``(sqrt(1 + g N) - 1) / (g N)``.

    This closed form sits slightly above the exact maximiser of
    :func:`spectral_efficiency` (see :func:`rate_maximizing_eta`), so the rate
    is strictly decreasing in ``eta`` from this point on.
    """
    gn = np.asarray(snr, dtype=float) * n_sym
    if np.any(gn <= 0):
        raise DomainError("snr * n_sym must be positive")
    out = (np.sqrt(1.0 + gn) - 1.0) / gn
    return float(out) if out.ndim == 0 else out


def rate_maximizing_eta(snr: float, n_sym: int, tol: float = 1e-9) -> float:
    """Exact maximiser of the (concave) spectral efficiency over ``eta``."""
    return golden_section_minimize(lambda e: -spectral_efficiency(e, n_sym, snr),
                                   1e-9, 1.0 - 1e-9, tol=tol)
