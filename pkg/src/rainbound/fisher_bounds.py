"""Fisher information, Cramer-Rao and Van Trees bounds for rain-rate sensing.

Information quantities for the rain rate carry units of (mm/h)^-2; variances
are in (mm/h)^2. ``J_D`` is the data (likelihood) information, ``J_P`` the
prior information of the log-normal rain-rate distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from ._numerics import bisect, jacobi_eigvalsh
from .errors import DomainError, NoSolutionError, NumericError
from .itu_atmos import AtmosphericState, FrequencyGrid, PathGeometry, sensitivity_matrix
from .link_rate import spectral_efficiency
from .scenario import LinkConfig, NoiseModel

__all__ = [
    "NoiseModel", "RainPrior", "BoundResult", "fim", "data_information", "crb_rain_only",
    "crb_joint_schur", "condition_number", "gradient_coherence", "prior_fisher_info",
    "temporal_gain", "temporal_gain_limit", "t95", "bcrb", "bcrb_crb_ratio", "rmin_solve",
    "rmin_closed_form", "wideband_gain_ratio", "pareto_frontier", "side_information_table",
]

RMIN_BRACKET = (1e-3, 1e3)


@dataclass(frozen=True)
class RainPrior:
    """Log-normal rain-rate prior with first-order Gauss-Markov dynamics in ``ln R``."""

    mean_rate: float = 5.2
    coeff_variation: float = 1.05
    temporal_rho: float = 0.95

    def __post_init__(self):
        if not self.mean_rate > 0 or not self.coeff_variation > 0:
            raise DomainError("mean rate and coefficient of variation must be positive")
        if not 0.0 <= self.temporal_rho < 1.0:
            raise DomainError("temporal correlation must lie in [0, 1)")

    @property
    def sigma_ln(self) -> float:
        return math.sqrt(math.log1p(self.coeff_variation ** 2))

    @property
    def mu_ln(self) -> float:
        return math.log(self.mean_rate) - self.sigma_ln ** 2 / 2.0

    @property
    def mode(self) -> float:
        return math.exp(self.mu_ln - self.sigma_ln ** 2)

    def logpdf(self, r):
        r = np.asarray(r, dtype=float)
        s = self.sigma_ln
        return -np.log(r * s * math.sqrt(2 * math.pi)) - (np.log(r) - self.mu_ln) ** 2 / (2 * s * s)

    def score(self, r):
        """``d ln p(R) / dR``."""
        r = np.asarray(r, dtype=float)
        return -(1.0 + (np.log(r) - self.mu_ln) / self.sigma_ln ** 2) / r


@dataclass(frozen=True)
class BoundResult:
    j_data: float
    j_prior: float
    temporal_gain: float
    n_links: int
    variance: float

    @property
    def rmse(self) -> float:
        return math.sqrt(self.variance)

    @property
    def total_information(self) -> float:
        return self.n_links * self.temporal_gain * self.j_data + self.j_prior


def fim(sensitivity, sigma_n: float) -> np.ndarray:
    """Fisher information ``G^T G / sigma_n^2`` for i.i.d. Gaussian dB noise."""
    g = np.atleast_2d(np.asarray(sensitivity, dtype=float))
    if g.shape[0] == 1 and np.ndim(sensitivity) == 1:
        g = g.T
    if not sigma_n > 0:
        raise DomainError("sigma_n must be positive")
    if not np.all(np.isfinite(g)):
        raise NumericError("sensitivity matrix has non-finite entries")
    j = g.T @ g / sigma_n ** 2
    return 0.5 * (j + j.T)


def _sigma(noise) -> float | np.ndarray:
    if isinstance(noise, NoiseModel):
        return noise.sigma_n
    sigma = np.asarray(noise, dtype=float)
    if np.any(sigma <= 0):
        raise DomainError("sigma_n must be positive")
    return float(sigma) if sigma.ndim == 0 else sigma


def data_information(rain_rate: float, grid: FrequencyGrid, geom: PathGeometry, noise) -> float:
    """Rain-only data information ``J_D = sum_k (dA_k/dR)^2 / sigma_k^2``.

    ``noise`` is a :class:`NoiseModel`, a common ``sigma_n`` (dB) or one
    ``sigma_n`` per subcarrier.
    """
    col = sensitivity_matrix(AtmosphericState(rain_rate), grid, geom, ("rain_rate",))[:, 0]
    return float(np.sum(col ** 2 / _sigma(noise) ** 2))


def crb_rain_only(state: AtmosphericState | float, grid: FrequencyGrid, geom: PathGeometry,
                  noise: NoiseModel | float) -> float:
    """CRB on the rain rate with all nuisance parameters known."""
    r = state.rain_rate if isinstance(state, AtmosphericState) else float(state)
    if not r > 0:
        raise DomainError("rain-only CRB needs R > 0")
    j = data_information(r, grid, geom, noise)
    if j <= 0:
        raise DomainError("zero data information")
    return 1.0 / j


def crb_joint_schur(j, index: int = 0) -> float:
    """Marginal CRB of parameter ``index`` with the others unknown (Schur complement).

    Returns ``inf`` when the nuisance block is numerically singular.
    """
    j = np.atleast_2d(np.asarray(j, dtype=float))
    p = j.shape[0]
    if p == 1:
        return 1.0 / j[0, 0]
    rest = [i for i in range(p) if i != index]
    j_rr = j[index, index]
    j_rn = j[index, rest]
    j_nn = j[np.ix_(rest, rest)]
    try:
        chol = np.linalg.cholesky(j_nn)
    except np.linalg.LinAlgError:
        return math.inf
    y = np.linalg.solve(chol, j_rn)
    schur = j_rr - float(y @ y)
    if not schur > j_rr * 1e-15:
        return math.inf
    return 1.0 / schur


def condition_number(j) -> float:
    """Eigenvalue ratio ``lambda_max / lambda_min``; ``inf`` for singular matrices."""
    ev = jacobi_eigvalsh(j)
    if ev[-1] <= 0:
        return math.inf
    if ev[0] <= ev[-1] * 1e-16:
        return math.inf
    return float(ev[-1] / ev[0])


def gradient_coherence(g_a, g_b) -> float:
    """Absolute cosine between two spectral gradient vectors."""
    a = np.asarray(g_a, dtype=float)
    b = np.asarray(g_b, dtype=float)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise DomainError("gradient vectors must be non-zero")
    return float(min(1.0, abs(a @ b) / (na * nb)))


def prior_fisher_info(prior: RainPrior) -> float:
    """Closed-form prior information of the log-normal rain-rate prior."""
    s2 = prior.sigma_ln ** 2
    return (1.0 + 1.0 / s2) / prior.mean_rate ** 2 * math.exp(3.0 * s2)


def temporal_gain(rho: float, window: int) -> float:
    """Quasi-static information gain of a ``window``-snapshot Gauss-Markov record."""
    if not 0.0 <= rho < 1.0:
        raise DomainError("rho must lie in [0, 1)")
    if window < 1 or int(window) != window:
        raise DomainError("window must be a positive integer")
    return (1.0 - rho ** (2 * window)) / (1.0 - rho ** 2)


def temporal_gain_limit(rho: float) -> float:
    return 1.0 / (1.0 - rho ** 2)


def t95(rho: float, fraction: float = 0.95) -> float:
    """Continuous window length capturing ``fraction`` of the saturated temporal gain."""
    if not 0.0 < rho < 1.0:
        raise DomainError("rho must lie in (0, 1)")
    return math.log(1.0 - fraction) / (2.0 * math.log(rho))


def _prior_information(prior) -> float:
    if prior is None:
        return 0.0
    if isinstance(prior, RainPrior):
        return prior_fisher_info(prior)
    return float(prior)


def bcrb(j_data: float, prior: RainPrior | float | None = None, temporal_gain: float = 1.0,
         n_links: int = 1) -> BoundResult:
    """Van Trees bound ``1 / (N G_T J_D + J_P)`` for ``N`` equal links.

    ``prior`` may be a :class:`RainPrior`, a prior information value, or
    ``None`` (no prior, giving the CRB).
    """
    j_prior = _prior_information(prior)
    if j_data < 0 or j_prior < 0 or temporal_gain < 0 or n_links < 0:
        raise DomainError("informations, gain and link count must be non-negative")
    total = n_links * temporal_gain * j_data + j_prior
    if not total > 0:
        raise DomainError("total information is zero")
    return BoundResult(float(j_data), float(j_prior), float(temporal_gain), int(n_links), 1.0 / total)


def bcrb_crb_ratio(j_data: float, j_prior: float) -> float:
    if not j_data > 0:
        raise DomainError("J_D must be positive")
    return 1.0 / (1.0 + j_prior / j_data)


def rmin_solve(bound_fn: Callable[[float], float], bracket: tuple[float, float] = RMIN_BRACKET,
               xtol: float = 1e-6, scan_points: int = 61) -> float:
    """Smallest rain rate at which the bound's RMSE equals the rain rate itself.

    Solved by bisection on ``sqrt(bound(R)) - R``. When the bound grows again
    at heavy rain (SNR collapse) the end points share a sign, so the bracket is
    first narrowed to the first sign change on a log-spaced scan.
    """
    lo, hi = bracket

    def fn(r):
        # an infinite bound (no information left) counts as a huge positive gap
        v = math.sqrt(bound_fn(r)) - r
        return v if math.isfinite(v) else 1e300

    try:
        return bisect(fn, lo, hi, xtol=xtol)
    except NoSolutionError:
        pass
    grid = np.geomspace(lo, hi, scan_points)
    prev = fn(grid[0])
    for a, b in zip(grid[:-1], grid[1:]):
        cur = fn(b)
        if (prev > 0) != (cur > 0):
            return bisect(fn, float(a), float(b), xtol=xtol)
        prev = cur
    raise NoSolutionError(f"unit relative error is not crossed on [{lo}, {hi}] mm/h")


def rmin_closed_form(sigma_n: float, n_subcarriers: int, k_bar: float, alpha_bar: float,
                     l_eff: float) -> float:
    """Band-averaged minimum detectable rain rate."""
    if min(sigma_n, n_subcarriers, k_bar, alpha_bar, l_eff) <= 0:
        raise DomainError("all inputs must be positive")
    base = sigma_n ** 2 / (n_subcarriers * k_bar ** 2 * alpha_bar ** 2 * l_eff ** 2)
    return base ** (1.0 / (2.0 * alpha_bar))


def wideband_gain_ratio(grid: FrequencyGrid, rain_rate: float, reference: int = 0) -> float:
    """CRB of the single subcarrier ``reference`` over the CRB of the whole grid."""
    terms = (grid.k * grid.alpha * rain_rate ** (grid.alpha - 1.0)) ** 2
    return float(np.sum(terms) / terms[reference])


class ParetoPoint(NamedTuple):
    eta: float
    spectral_efficiency: float
    rmse: float


def pareto_frontier(rain_rate: float, prior: RainPrior | None, link: LinkConfig,
                    etas: Sequence[float], window: int = 1) -> list[ParetoPoint]:
    """Spectral efficiency against the bound RMSE along a pilot-fraction grid.

    The pilot count ``round(eta n_sym)`` and the rain-degraded mean SNR set the
    noise at each point; ``window`` is the Gauss-Markov observation window.
    """
    from .pilot_alloc import mean_snr_of_rain

    if min(etas) <= 0:
        raise DomainError("pilot fractions must be positive")
    snr = mean_snr_of_rain(rain_rate, link)
    g_t = 1.0 if prior is None else temporal_gain(prior.temporal_rho, window)
    out = []
    for eta in etas:
        var = link.noise_variance(snr=snr, eta=eta)
        j_d = data_information(rain_rate, link.grid, link.geometry, math.sqrt(var))
        res = bcrb(j_d, prior, g_t)
        out.append(ParetoPoint(float(eta), spectral_efficiency(eta, link.n_sym, snr), res.rmse))
    return out


class SideInfoRow(NamedTuple):
    unknowns: tuple[str, ...]
    crb: float
    relative_crb: float
    condition_number: float


SIDE_INFO_ROWS = (
    ("rain_rate",),
    ("rain_rate", "offset"),
    ("rain_rate", "water_vapor"),
    ("rain_rate", "cloud_lwc"),
    ("rain_rate", "water_vapor", "cloud_lwc"),
    ("rain_rate", "water_vapor", "cloud_lwc", "offset"),
)


def side_information_table(state: AtmosphericState, grid: FrequencyGrid, geom: PathGeometry,
                           sigma_n: float, rows=SIDE_INFO_ROWS) -> list[SideInfoRow]:
    """Marginal rain CRB and FIM conditioning for each set of unknown parameters.

    ``relative_crb`` is the percentage excess of the marginal CRB over the
    rain-only CRB.
    """
    base = None
    out = []
    for names in rows:
        j = fim(sensitivity_matrix(state, grid, geom, names), sigma_n)
        crb = crb_joint_schur(j, 0)
        if base is None:
            base = 1.0 / j[0, 0]
        out.append(SideInfoRow(tuple(names), crb, 100.0 * (crb / base - 1.0), condition_number(j)))
    return out
