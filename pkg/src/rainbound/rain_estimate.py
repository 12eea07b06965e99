"""Point estimation of the rain rate from a multi-frequency attenuation snapshot.

Both estimators run Gauss-Newton in ``x = ln R``, which keeps iterates
positive, with step halving so that every accepted step lowers the objective.
Known gas, cloud and offset contributions enter as the per-subcarrier
nuisance vector ``c``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError
from .fisher_bounds import RainPrior
from .itu_atmos import AtmosphericState, FrequencyGrid, PathGeometry, rain_attenuation, sensitivity_matrix

RATE_FLOOR = 0.1
MAX_ITER = 25
MAX_HALVINGS = 20
REL_TOL = 1e-6
_X_BOUNDS = (math.log(1e-6), math.log(1e4))


@dataclass(frozen=True)
class EstimatorReport:
    estimate: float
    iterations: int
    converged: bool
    objective_value: float
    initializer: float
    floored: bool = False
    offset: float | None = None


@dataclass(frozen=True)
class InitialGuess:
    rate: float
    floored: bool


def mle_init(a_hat, k_c: float, alpha_c: float, l_eff: float, nuisance=None) -> InitialGuess:
    """Single-frequency power-law inversion of the mean rain attenuation.

    Falls back to :data:`RATE_FLOOR` (flagged) when the mean attenuation left
    after removing the nuisance terms is not positive.
    """
    a = np.asarray(a_hat, dtype=float)
    c = np.zeros_like(a) if nuisance is None else np.broadcast_to(np.asarray(nuisance, dtype=float), a.shape)
    mean_rain = float(np.mean(a - c))
    if not mean_rain > 0:
        return InitialGuess(RATE_FLOOR, True)
    return InitialGuess((mean_rain / (k_c * l_eff)) ** (1.0 / alpha_c), False)


def _initial(a, c, grid: FrequencyGrid, geom: PathGeometry) -> InitialGuess:
    k_c, alpha_c = grid.center_coefficients()
    return mle_init(a, k_c, alpha_c, geom.anchored_rain_path(), c)


class _Problem:
    """Penalised least squares ``sum r^2 + 2 sigma^2 penalty(x)`` in ``x = ln R``."""

    def __init__(self, a, c, grid, geom, sigma_n, prior: RainPrior | None, joint_offset: bool):
        self.y = a - c
        self.grid = grid
        self.geom = geom
        self.weight = 2.0 * sigma_n ** 2
        self.prior = prior
        self.joint_offset = joint_offset

    def residual(self, x: float) -> tuple[np.ndarray, float]:
        r = self.y - rain_attenuation(math.exp(x), self.grid, self.geom)
        offset = float(np.mean(r)) if self.joint_offset else 0.0
        return r - offset, offset

    def penalty(self, x: float) -> tuple[float, float, float]:
        if self.prior is None:
            return 0.0, 0.0, 0.0
        s2 = self.prior.sigma_ln ** 2
        d = x - self.prior.mu_ln
        return d * d / (2.0 * s2) + x, d / s2 + 1.0, 1.0 / s2

    def objective(self, x: float) -> float:
        r, _ = self.residual(x)
        return float(r @ r) + self.weight * self.penalty(x)[0]

    def step(self, x: float) -> float:
        r, _ = self.residual(x)
        rate = math.exp(x)
        jac = rate * sensitivity_matrix(AtmosphericState(rate), self.grid, self.geom, ("rain_rate",))[:, 0]
        if self.joint_offset:
            jac = jac - jac.mean()
        _, dp, d2p = self.penalty(x)
        grad = -2.0 * float(r @ jac) + self.weight * dp
        hess = 2.0 * float(jac @ jac) + self.weight * d2p
        if not hess > 0:
            return 0.0
        return -grad / hess


def _solve(problem: _Problem, x0: float, max_iter: int) -> tuple[float, int, bool]:
    x = x0
    f = problem.objective(x)
    lo, hi = _X_BOUNDS
    for it in range(1, max_iter + 1):
        dx = problem.step(x)
        if not math.isfinite(dx):
            return x, it, False
        accepted = False
        for _ in range(MAX_HALVINGS + 1):
            x_new = min(max(x + dx, lo), hi)
            f_new = problem.objective(x_new)
            if f_new <= f:
                accepted = True
                break
            dx *= 0.5
        if not accepted:
            # no descent along the Newton direction: stationary to working precision
            return x, it, abs(dx) < REL_TOL
        step = x_new - x
        x, f = x_new, f_new
        # relative step in R is expm1(|dx|), which is |dx| to first order
        if math.expm1(abs(step)) < REL_TOL:
            return x, it, True
    return x, max_iter, False


def _estimate(a_hat, grid, geom, nuisance, sigma_n, prior, joint_offset, max_iter, x0) -> EstimatorReport:
    a = np.asarray(a_hat, dtype=float)
    if a.shape != (grid.size,):
        raise DomainError(f"expected {grid.size} attenuation values, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("attenuation values must be finite")
    if not sigma_n > 0:
        raise DomainError("sigma_n must be positive")
    c = np.zeros(grid.size) if nuisance is None else np.broadcast_to(np.asarray(nuisance, dtype=float), a.shape)
    init = _initial(a, c, grid, geom) if x0 is None else InitialGuess(float(x0), False)
    problem = _Problem(a, c, grid, geom, sigma_n, prior, joint_offset)
    x, iterations, converged = _solve(problem, math.log(init.rate), max_iter)
    offset = problem.residual(x)[1] if joint_offset else None
    return EstimatorReport(math.exp(x), iterations, converged, problem.objective(x), init.rate,
                           init.floored, offset)


def mle_newton(a_hat, grid: FrequencyGrid, geom: PathGeometry, nuisance=None, sigma_n: float = 1.0,
               joint_offset: bool = False, max_iter: int = MAX_ITER, x0: float | None = None) -> EstimatorReport:
    """Least-squares rain-rate estimate from one attenuation snapshot.

    Parameters
    ----------
    a_hat : array_like
        Measured attenuation per subcarrier (dB).
    nuisance : array_like, optional
        Known non-rain attenuation per subcarrier (dB).
    joint_offset : bool
        Also estimate a common offset, eliminated in closed form each step.
    x0 : float, optional
        Starting rain rate; defaults to the band-centre power-law inversion.
    """
    return _estimate(a_hat, grid, geom, nuisance, sigma_n, None, joint_offset, max_iter, x0)


def map_newton(a_hat, grid: FrequencyGrid, geom: PathGeometry, nuisance=None, sigma_n: float = 1.0,
               prior: RainPrior | None = None, joint_offset: bool = False, max_iter: int = MAX_ITER,
               x0: float | None = None) -> EstimatorReport:
    """MAP estimate under the log-normal rain prior.

    Minimises ``sum r^2 + 2 sigma_n^2 [(ln R - mu)^2 / (2 sigma_ln^2) + ln R]``,
    whose prior-only minimiser is the prior mode ``exp(mu - sigma_ln^2)``.
    """
    return _estimate(a_hat, grid, geom, nuisance, sigma_n, prior or RainPrior(), joint_offset,
                     max_iter, x0)


def fuse_estimates(estimates: Sequence[float], informations: Sequence[float]) -> float:
    """Information-weighted average of per-link estimates."""
    r = np.asarray(estimates, dtype=float)
    j = np.asarray(informations, dtype=float)
    if r.shape != j.shape or r.ndim != 1 or r.size == 0:
        raise DomainError("estimates and informations must be equal-length non-empty vectors")
    if np.any(j < 0):
        raise DomainError("informations must be non-negative")
    total = float(j.sum())
    if not total > 0:
        raise DomainError("all fusion weights are zero")
    return float((j / total) @ r)
