from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rainbound._numerics import is_unimodal
from rainbound.errors import DomainError
from rainbound.scenario import LinkConfig
from rainbound.slant_geometry import (NoiseMode, elevation_sweep, leff_of_elevation, operating_bound,
                                      optimal_locus, rmin_of_elevation, sensing_optimal_elevation_closed,
                                      sensing_optimal_elevation_numeric, snr_of_elevation, subcarrier_snr)


@given(st.floats(1.0, 90.0))
def test_path_and_snr_scale_with_elevation(el):
    s = math.sin(math.radians(el)) / math.sin(math.radians(38.0))
    assert leff_of_elevation(el) == pytest.approx(3.0 / s)
    assert snr_of_elevation(el, 10.0) == pytest.approx(10.0 * s * s)


def test_elevation_validation():
    with pytest.raises(DomainError):
        leff_of_elevation(0.0)
    with pytest.raises(DomainError):
        snr_of_elevation(91.0, 10.0)


def test_subcarrier_snr_rain_toggle(band_link):
    dry = subcarrier_snr(38.0, 20.0, band_link, rain_in_snr=False)
    wet = subcarrier_snr(38.0, 20.0, band_link)
    assert np.all(dry == pytest.approx(10.0))
    assert np.all(wet < dry)


def _closed_form_oracle(link: LinkConfig) -> float:
    # brute-force minimum of sigma^2(theta) / L_eff(theta)^2 on a fine grid
    el = np.linspace(1.0, 90.0, 200_001)
    snr = snr_of_elevation(el, link.snr0)
    var = link.c0 / link.pilot_count * (1 + 1 / snr) ** 2 + link.sigma_sys ** 2
    leff = 3.0 * math.sin(math.radians(38.0)) / np.sin(np.radians(el))
    return float(el[np.argmin(var / leff ** 2)])


@pytest.mark.parametrize("snr_db,sigma_sys", [(10.0, 0.63), (10.0, 0.0), (15.0, 1.0), (5.0, 0.3)])
def test_closed_form_elevation_against_grid(snr_db, sigma_sys):
    link = LinkConfig(snr0_db=snr_db, sigma_sys=sigma_sys)
    res = sensing_optimal_elevation_closed(link)
    assert not res.saturated
    assert res.elevation == pytest.approx(_closed_form_oracle(link), abs=0.01)
    assert res.beta_star == pytest.approx(1 / (res.x_star - 1))


def test_closed_form_saturates_at_zenith():
    res = sensing_optimal_elevation_closed(LinkConfig(snr0_db=-10.0))
    assert res.saturated and res.elevation == 90.0


def test_closed_form_and_numeric_agree(band_link):
    closed = sensing_optimal_elevation_closed(band_link).elevation
    assert 9.2 <= closed <= 10.2
    assert sensing_optimal_elevation_numeric(band_link) == pytest.approx(closed, abs=0.2)


def test_realistic_profile(band_link):
    r38 = rmin_of_elevation(38.0, band_link)
    r15 = rmin_of_elevation(15.0, band_link)
    r20 = rmin_of_elevation(20.0, band_link)
    assert r15 < r20 < r38
    sweep = elevation_sweep([5.0, 7.5, 10.0, 12.5, 15.0, 20.0, 30.0, 45.0, 60.0, 90.0], band_link)
    assert is_unimodal(sweep.rmin_values)
    assert sweep.p618_zone == (True, True, True, True, False, False, False, False, False, False)
    assert sum(sweep.below_terminal_floor) == 5


def test_constant_noise_profile_keeps_falling(band_link):
    sweep = elevation_sweep([10.0, 20.0, 38.0, 60.0, 90.0], band_link, NoiseMode.CONSTANT)
    assert all(a < b for a, b in zip(sweep.rmin_values, sweep.rmin_values[1:]))
    # constant noise leaves only the path-length effect: R_min ~ L_eff^(-1/alpha)
    alpha = band_link.grid.band_mean().alpha
    ratio = sweep.rmin_values[0] / sweep.rmin_values[2]
    expected = (leff_of_elevation(10.0) / leff_of_elevation(38.0)) ** (-1 / alpha)
    assert ratio == pytest.approx(expected, rel=1e-5)


def test_operating_bound_collapses_to_inf_without_information(band_link):
    assert operating_bound(5000.0, 5.0, band_link) == math.inf


def test_optimal_locus(band_link):
    locus = optimal_locus([3.0, 10.0, 25.0], band_link)
    sens = [p.theta_sens for p in locus]
    assert all(15.0 <= s <= 90.0 for s in sens)
    assert sens == sorted(sens)
    assert all(p.theta_comm == pytest.approx(90.0, abs=0.1) for p in locus)
    assert all(p.gap > 0 for p in locus)
    with pytest.raises(DomainError):
        optimal_locus([0.0], band_link)
