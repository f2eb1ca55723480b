import math

import pytest

from cachecast.channel import RngStream, SystemConfig
from cachecast.mathx import lambert_w
from cachecast.selection import (
    ThresholdPolicy,
    empirical_optimal_threshold,
    optimal_threshold_general,
    optimal_threshold_rayleigh,
    simulated_selection_rate,
    snr_above_probability,
)


def test_closed_form_is_stationary():
    # maximizer of f(s) = exp(-s/P) ln(1+s); central difference at s*
    for P in (10.0, 1e3, 1e5):
        s = optimal_threshold_rayleigh(P)
        f = lambda t: math.exp(-t / P) * math.log1p(t)
        h = 1e-4 * (1 + s)
        deriv = (f(s + h) - f(s - h)) / (2 * h)
        # truncation error of the central difference dominates the residual
        assert abs(deriv) < 1e-8
    with pytest.raises(ValueError):
        optimal_threshold_rayleigh(0.0)


def test_general_solver_recovers_rayleigh():
    P = 1000.0
    cdf = lambda s: 1.0 - math.exp(-s / P)
    pdf = lambda s: math.exp(-s / P) / P
    s_gen = optimal_threshold_general(cdf, pdf, bracket=(1.0, P))
    assert s_gen == pytest.approx(optimal_threshold_rayleigh(P), rel=1e-8)


def test_general_solver_rejects_bad_bracket():
    P = 1000.0
    cdf = lambda s: 1.0 - math.exp(-s / P)
    pdf = lambda s: math.exp(-s / P) / P
    with pytest.raises(ValueError):
        optimal_threshold_general(cdf, pdf, bracket=(1.0, 2.0))
    with pytest.raises(ValueError):
        optimal_threshold_general(cdf, pdf, bracket=(5.0, 5.0))


def test_threshold_policy_expected_selected():
    pol = ThresholdPolicy.rayleigh(100.0, 1000.0, 500)
    assert pol.expected_selected == pytest.approx(500 * math.exp(-0.1))


def test_snr_above_probability():
    scenario = SystemConfig(num_users=3, num_tx_antennas=1, total_power=100.0)
    assert snr_above_probability(scenario, 0.0) == 1.0
    assert snr_above_probability(scenario, 50.0) == pytest.approx(math.exp(-0.5), rel=1e-10)
    # multi-antenna tail is the Gamma(nt) survival at nt*s/P
    four = SystemConfig(num_users=3, num_tx_antennas=4, total_power=100.0)
    assert 0.0 < snr_above_probability(four, 100.0) < 1.0


def test_simulated_rate_and_fraction():
    scenario = SystemConfig(
        num_users=2_000, num_tx_antennas=1, total_power=1000.0, normalized_cache=0.05
    )
    s = optimal_threshold_rayleigh(1000.0)
    est = simulated_selection_rate(scenario, s, RngStream(4), 20_000)
    assert est.rate.mean > 0
    assert est.selected_fraction == pytest.approx(math.exp(-s / 1000.0), abs=5e-4)
    again = simulated_selection_rate(scenario, s, RngStream(4), 20_000)
    assert est.rate.mean == again.rate.mean


def test_simulated_rate_validation():
    multi = SystemConfig(
        num_users=4, num_tx_antennas=1, total_power=10.0, num_subchannels=2, normalized_cache=0.1
    )
    with pytest.raises(ValueError):
        simulated_selection_rate(multi, 1.0, RngStream(0), 10)


def test_empirical_threshold_near_closed_form():
    P = 1000.0
    s_star = optimal_threshold_rayleigh(P)
    scenario = SystemConfig(
        num_users=10_000, num_tx_antennas=1, total_power=P, normalized_cache=0.05
    )
    s_emp = empirical_optimal_threshold(
        scenario, RngStream(5), 50_000, bracket=(0.3 * s_star, 3.0 * s_star)
    )
    assert s_emp == pytest.approx(s_star, rel=0.1)
    rerun = empirical_optimal_threshold(
        scenario, RngStream(5), 50_000, bracket=(0.3 * s_star, 3.0 * s_star)
    )
    assert s_emp == rerun


def test_selected_fraction_limit():
    # at s* the surviving fraction tends to exp(1/P - 1/W(P))
    P = 1000.0
    s_star = optimal_threshold_rayleigh(P)
    assert math.exp(-s_star / P) == pytest.approx(
        math.exp(1.0 / P - 1.0 / lambert_w(P)), rel=1e-12
    )
