from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rainbound.errors import DomainError, UndetectableError
from rainbound.montecarlo import RngSpec, arl0_experiment, cusum_delay_experiment
from rainbound.rain_detect import (CusumConfig, CusumState, add_design_matched, add_wald, arl0_nominal,
                                   arl0_siegmund, cusum_update, design_mean, detection_probability, run_batch,
                                   run_series)


def test_design_quantities():
    cfg = CusumConfig()
    assert cfg.mu_d == pytest.approx(0.022 * 5 ** 1.19 * 3.0)
    assert cfg.h == pytest.approx(math.log(1000) / cfg.mu_d)
    assert add_design_matched(cfg) == pytest.approx(cfg.h / (cfg.mu_d / 2))
    assert cfg.with_wet_antenna().sigma_n == 2.0
    assert design_mean(0.0) == 0.0


@given(st.floats(0.5, 20.0))
def test_constant_input_alarm_time(a):
    cfg = CusumConfig()
    drift = a - cfg.mu_d / 2
    run = run_series(np.full(500, a), cfg)
    if drift <= 0:
        assert run.alarm_time is None
    else:
        expected = math.floor(cfg.h / drift) + 1
        if expected <= 500:
            assert run.alarm_time == expected
    assert np.all(run.trajectory >= 0)


@given(st.lists(st.floats(-5.0, 10.0), min_size=1, max_size=200))
def test_stepwise_and_batch_agree(samples):
    cfg = CusumConfig()
    state = CusumState()
    for x in samples:
        state = cusum_update(state, x, cfg)
        assert state.s >= 0
    run = run_series(samples, cfg)
    assert state.s == pytest.approx(run.trajectory[-1])
    assert state.alarm_time == run.alarm_time
    assert run_batch([samples], cfg)[0] == (run.alarm_time or 0)


def test_alarm_latches():
    cfg = CusumConfig()
    state = CusumState()
    for _ in range(10):
        state = cusum_update(state, 10.0, cfg)
    first = state.alarm_time
    for _ in range(50):
        state = cusum_update(state, -10.0, cfg)
    assert state.alarmed and state.alarm_time == first and state.s == 0.0
    with pytest.raises(DomainError):
        cusum_update(state, math.nan, cfg)


def test_wald_delay():
    cfg = CusumConfig()
    assert add_wald(20.0, cfg) < 8.0
    assert add_wald(50.0, cfg) < 3.0
    delays = [add_wald(r, cfg) for r in (10, 15, 20, 30, 50, 80)]
    assert all(a > b for a, b in zip(delays, delays[1:]))
    with pytest.raises(UndetectableError):
        add_wald(1.0, cfg)
    assert detection_probability(1.0, 30, cfg) == 0.0
    assert detection_probability(20.0, 10, cfg) == pytest.approx(1 - math.exp(-10 / add_wald(20.0, cfg)))


def test_monte_carlo_delay_is_at_least_wald():
    cfg = CusumConfig()
    rows = cusum_delay_experiment((10.0, 20.0, 50.0), cfg, 2000, RngSpec(seed=4))
    for row in rows:
        assert row.mc_add >= row.wald_add
        assert row.missed == 0
        assert row.pd_5 <= row.pd_10 <= row.pd_30
    assert rows[1].ratio < 1.3 and rows[2].ratio < 1.3


def test_gauss_markov_onset_runs():
    rows = cusum_delay_experiment((20.0,), CusumConfig(), 500, RngSpec(seed=6), onset="gauss_markov")
    assert rows[0].mc_add > 0 and rows[0].pd_30 > 0.5
    with pytest.raises(DomainError):
        cusum_delay_experiment((20.0,), CusumConfig(), 10, onset="ramp")


def test_in_control_run_length():
    # nominal 1/P_FA is a lower bound; Siegmund's approximation is close to simulation
    cfg = CusumConfig(p_fa=1e-2)
    assert arl0_nominal(cfg) == pytest.approx(100.0)
    res = arl0_experiment(cfg, runs=1000, rng=RngSpec(seed=7))
    assert res.censored == 0
    assert res.mean_run_length >= arl0_nominal(cfg)
    assert res.mean_run_length == pytest.approx(arl0_siegmund(cfg), rel=0.1)
    assert arl0_siegmund(CusumConfig()) > arl0_nominal(CusumConfig())
