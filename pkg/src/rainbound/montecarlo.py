"""Seeded synthetic data and Monte Carlo checks of the bounds, estimators and detector.

Trials are drawn in fixed-size chunks; chunk ``i`` of stream ``s`` under seed
``seed`` always uses the generator ``Philox(SeedSequence(seed, spawn_key=(s, i)))``.
Results are therefore bit-identical for a given :class:`RngSpec` and do not
depend on how chunks are scheduled.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence

import numpy as np
from scipy.signal import lfilter

from .errors import DomainError
from .fisher_bounds import RainPrior, bcrb, data_information, temporal_gain
from .itu_atmos import AtmosphericState, attenuation_breakdown
from .rain_detect import CusumConfig, add_wald, run_batch
from .rain_estimate import fuse_estimates, map_newton, mle_newton
from .scenario import LinkConfig

CHUNK = 1000
_MASK64 = (1 << 64) - 1


class NoiseMode(str, enum.Enum):
    DB_GAUSSIAN = "db_gaussian"
    CHI_SQUARED_PILOT = "chi_squared_pilot"


@dataclass(frozen=True)
class RngSpec:
    seed: int = 20240601
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not 0 <= v <= _MASK64:
                raise DomainError(f"{name} must be an unsigned 64-bit integer")

    def generator(self, chunk: int = 0) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=int(self.seed), spawn_key=(int(self.stream_id), int(chunk)))
        return np.random.Generator(np.random.Philox(ss))

    def substream(self, offset: int) -> "RngSpec":
        return RngSpec(self.seed, (self.stream_id + offset) & _MASK64)


def chunks(trials: int, size: int = CHUNK) -> Iterator[tuple[int, int]]:
    """``(chunk_index, n)`` pairs covering ``trials`` in order."""
    for i, start in enumerate(range(0, trials, size)):
        yield i, min(size, trials - start)


@dataclass(frozen=True)
class SyntheticScenario:
    truth: AtmosphericState | Sequence[float]
    link: LinkConfig = field(default_factory=LinkConfig)
    noise_mode: NoiseMode = NoiseMode.DB_GAUSSIAN
    trials: int = 10_000

    def __post_init__(self):
        object.__setattr__(self, "noise_mode", NoiseMode(self.noise_mode))
        if self.trials < 1:
            raise DomainError("trials must be at least 1")


def clean_attenuation(truth: AtmosphericState, link: LinkConfig) -> np.ndarray:
    return attenuation_breakdown(link.grid, truth, link.geometry).total


def known_nuisance(truth: AtmosphericState, link: LinkConfig) -> np.ndarray:
    """Gas, cloud and offset addends, handed to the estimators as side information."""
    parts = attenuation_breakdown(link.grid, truth, link.geometry)
    return parts.gas + parts.cloud + parts.offset


def gen_observation(truth: AtmosphericState, link: LinkConfig, mode: NoiseMode | str,
                    rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Noisy attenuation snapshot(s) in dB, shape ``(K,)`` or ``(size, K)``.

    ``db_gaussian`` adds ``N(0, sigma_n^2)`` to the clean attenuation.
    ``chi_squared_pilot`` averages ``N_p`` exponential pilot powers at the
    rain-degraded SNR, subtracts the known unit noise power, converts to
    attenuation against the clear-sky SNR, and adds the systematic term.
    """
    mode = NoiseMode(mode)
    a = clean_attenuation(truth, link)
    shape = (link.grid.size,) if size is None else (size, link.grid.size)
    if mode is NoiseMode.DB_GAUSSIAN:
        return a + link.reference_noise().sigma_n * rng.standard_normal(shape)
    n_p = link.pilot_count
    snr = link.snr0 * 10.0 ** (-a / 10.0)
    p_hat = (snr + 1.0) * rng.gamma(n_p, 1.0, size=shape) / n_p
    s_hat = np.maximum(p_hat - 1.0, np.finfo(float).tiny)
    return 10.0 * np.log10(link.snr0 / s_hat) + link.sigma_sys * rng.standard_normal(shape)


def gen_rain_series(prior: RainPrior, length: int, rng: np.random.Generator,
                    rho: float | None = None) -> np.ndarray:
    """Log-normal Gauss-Markov rain series (mm/h), stationary from the first sample."""
    if length < 1:
        raise DomainError("series length must be at least 1")
    rho = prior.temporal_rho if rho is None else rho
    if not 0.0 <= rho < 1.0:
        raise DomainError("rho must lie in [0, 1)")
    s = prior.sigma_ln
    w = rng.standard_normal(length)
    w[1:] *= s * math.sqrt(1.0 - rho * rho)
    w[0] *= s
    dev = lfilter([1.0], [1.0, -rho], w)
    return np.exp(prior.mu_ln + dev)


def _rmse(errors: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.square(errors))))


class PriorInfoEstimate(NamedTuple):
    value: float
    std_error: float
    draws: int


def prior_information_mc(prior: RainPrior, draws: int = 1_000_000, rng: RngSpec = RngSpec(),
                         tilted: bool = True) -> PriorInfoEstimate:
    """Monte Carlo estimate of the prior information ``E[score(R)^2]``.

    The ``1/R^2`` factor makes plain sampling heavy tailed. With ``tilted``
    the log-rate is drawn from ``N(mu - 2 sigma^2, sigma^2)``, for which
    ``exp(-2x) N(x; mu, sigma^2)`` is the tilted density times the constant
    ``exp(2 sigma^2 - 2 mu)``, leaving a polynomial integrand.
    """
    if draws < 2:
        raise DomainError("need at least two draws")
    mu, s = prior.mu_ln, prior.sigma_ln
    values = []
    for ci, n in chunks(draws, 100_000):
        z = rng.generator(ci).standard_normal(n)
        if tilted:
            x = mu - 2.0 * s * s + s * z
            values.append(math.exp(2.0 * s * s - 2.0 * mu) * (1.0 + (x - mu) / (s * s)) ** 2)
        else:
            values.append(prior.score(np.exp(mu + s * z)) ** 2)
    v = np.concatenate(values)
    return PriorInfoEstimate(float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size)), int(v.size))


class EfficiencyRow(NamedTuple):
    rain_rate: float
    mle_rmse: float
    map_rmse: float
    crb_rmse: float
    bcrb_rmse: float
    mle_ratio: float
    map_ratio: float
    median_iterations: float
    failures: int


def estimator_efficiency_experiment(rain_rates: Sequence[float], link: LinkConfig, trials: int = 10_000,
                                    rng: RngSpec = RngSpec(), prior: RainPrior | None = None,
                                    noise_mode: NoiseMode | str = NoiseMode.DB_GAUSSIAN) -> list[EfficiencyRow]:
    """MLE and MAP Monte Carlo RMSE against the CRB and single-snapshot Van Trees bound."""
    if trials < 1:
        raise DomainError("trials must be at least 1")
    prior = prior or RainPrior()
    sigma = link.reference_noise().sigma_n
    rows = []
    for idx, r in enumerate(rain_rates):
        truth = AtmosphericState(r)
        c = known_nuisance(truth, link)
        stream = rng.substream(idx)
        mle_err, map_err, iters = [], [], []
        failures = 0
        for ci, n in chunks(trials):
            obs = gen_observation(truth, link, noise_mode, stream.generator(ci), n)
            for a in obs:
                m1 = mle_newton(a, link.grid, link.geometry, c, sigma_n=sigma)
                m2 = map_newton(a, link.grid, link.geometry, c, sigma_n=sigma, prior=prior)
                failures += (not m1.converged) + (not m2.converged)
                mle_err.append(m1.estimate - r)
                map_err.append(m2.estimate - r)
                iters.append(m1.iterations)
        j_d = data_information(r, link.grid, link.geometry, sigma)
        crb = math.sqrt(1.0 / j_d)
        vt = bcrb(j_d, prior).rmse
        e1, e2 = _rmse(np.array(mle_err)), _rmse(np.array(map_err))
        rows.append(EfficiencyRow(float(r), e1, e2, crb, vt, e1 / crb, e2 / crb,
                                  float(np.median(iters)), failures))
    return rows


class DelayRow(NamedTuple):
    rain_rate: float
    wald_add: float
    mc_add: float
    ratio: float
    pd_5: float
    pd_10: float
    pd_30: float
    missed: int


def _onset_samples(rain_rate: float, config: CusumConfig, n: int, horizon: int, gen: np.random.Generator,
                   onset: str, prior: RainPrior | None) -> np.ndarray:
    noise = config.sigma_n * gen.standard_normal((n, horizon))
    if onset == "step":
        return config.mean_attenuation(rain_rate) + noise
    if onset == "gauss_markov":
        # log-rate AR(1) started at ln R with the prior's innovation scale
        p = prior or RainPrior()
        s = p.sigma_ln * math.sqrt(1.0 - p.temporal_rho ** 2)
        w = s * gen.standard_normal((n, horizon))
        w[:, 0] = 0.0
        dev = lfilter([1.0], [1.0, -p.temporal_rho], w, axis=1)
        rates = np.exp(math.log(rain_rate) + dev)
        return config.k_bar * rates ** config.alpha_bar * config.l_eff + noise
    raise DomainError(f"unknown onset model {onset!r}")


def cusum_delay_experiment(rain_rates: Sequence[float], config: CusumConfig, trials: int = 5000,
                           rng: RngSpec = RngSpec(), windows=(5, 10, 30), onset: str = "step",
                           prior: RainPrior | None = None, horizon: int | None = None) -> list[DelayRow]:
    """Mean detection delay and windowed detection frequency for rain starting at ``t = 0``.

    The delay of a trial is its alarm time (1-based), so an alarm on the first
    rainy sample counts as one minute. Trials without an alarm inside the
    horizon are counted in ``missed`` and excluded from the mean.
    """
    rows = []
    for idx, r in enumerate(rain_rates):
        try:
            wald = add_wald(r, config)
        except DomainError:
            wald = math.inf
        hz = horizon
        if hz is None:
            hz = int(min(max(20 * wald, 100), 5000)) if math.isfinite(wald) else 1000
        stream = rng.substream(idx)
        alarms = np.concatenate([
            run_batch(_onset_samples(r, config, n, hz, stream.generator(ci), onset, prior), config)
            for ci, n in chunks(trials)
        ])
        hit = alarms > 0
        mc = float(alarms[hit].mean()) if hit.any() else math.inf
        pds = [float(np.mean(hit & (alarms <= w))) for w in windows]
        rows.append(DelayRow(float(r), wald, mc, mc / wald, *pds[:3], int((~hit).sum())))
    return rows


class Arl0Result(NamedTuple):
    mean_run_length: float
    runs: int
    censored: int
    nominal: float


def arl0_experiment(config: CusumConfig, runs: int = 1000, rng: RngSpec = RngSpec(),
                    horizon: int = 200_000, block: int = 2000) -> Arl0Result:
    """In-control run length of the detector on zero-mean Gaussian noise.

    Runs still silent at ``horizon`` are censored; the reported mean treats
    them as alarming at the horizon (a lower estimate).
    """
    from .rain_detect import arl0_nominal

    gen = rng.generator(0)
    s = np.zeros(runs)
    alarm = np.zeros(runs, dtype=np.int64)
    half = config.mu_d / 2.0
    t = 0
    while t < horizon and np.any(alarm == 0):
        live = np.flatnonzero(alarm == 0)
        steps = min(block, horizon - t)
        x = config.sigma_n * gen.standard_normal((live.size, steps))
        sl = s[live]
        hit_at = np.zeros(live.size, dtype=np.int64)
        for j in range(steps):
            sl = np.maximum(0.0, sl + x[:, j] - half)
            new = (hit_at == 0) & (sl > config.h)
            hit_at[new] = t + j + 1
        s[live] = sl
        alarm[live] = hit_at
        t += steps
    censored = int(np.sum(alarm == 0))
    lengths = np.where(alarm == 0, horizon, alarm)
    return Arl0Result(float(lengths.mean()), runs, censored, arl0_nominal(config))


class ScalingRow(NamedTuple):
    n_links: int
    rmse: float


def multilink_scaling_experiment(n_grid: Sequence[int], prior: RainPrior, link: LinkConfig,
                                 rain_rate: float = 20.0, window: int = 30) -> list[ScalingRow]:
    """Van Trees RMSE for ``N`` equal links each observed over ``window`` snapshots."""
    if any(n < 1 for n in n_grid):
        raise DomainError("link counts must be positive")
    j_d = data_information(rain_rate, link.grid, link.geometry, link.reference_noise().sigma_n)
    g_t = temporal_gain(prior.temporal_rho, window)
    return [ScalingRow(int(n), bcrb(j_d, prior, g_t, int(n)).rmse) for n in n_grid]


def loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    lx, ly = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])


class FusionResult(NamedTuple):
    n_links: int
    mc_rmse: float
    predicted_rmse: float
    ratio: float


def fusion_experiment(n_links: int, link: LinkConfig, rain_rate: float = 20.0, trials: int = 200,
                      rng: RngSpec = RngSpec()) -> FusionResult:
    """Information-weighted fusion of per-link MLEs against ``1 / sqrt(sum J_D)``."""
    if n_links < 1:
        raise DomainError("need at least one link")
    sigma = link.reference_noise().sigma_n
    j_d = data_information(rain_rate, link.grid, link.geometry, sigma)
    truth = AtmosphericState(rain_rate)
    c = known_nuisance(truth, link)
    weights = np.full(n_links, j_d)
    errs = []
    for ci, n in chunks(trials, max(1, CHUNK // n_links)):
        gen = rng.generator(ci)
        for _ in range(n):
            obs = gen_observation(truth, link, NoiseMode.DB_GAUSSIAN, gen, n_links)
            est = [mle_newton(a, link.grid, link.geometry, c, sigma_n=sigma).estimate for a in obs]
            errs.append(fuse_estimates(est, weights) - rain_rate)
    mc = _rmse(np.array(errs))
    pred = 1.0 / math.sqrt(n_links * j_d)
    return FusionResult(n_links, mc, pred, mc / pred)
