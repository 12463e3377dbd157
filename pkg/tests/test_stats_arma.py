"""Differencing, ACF/PACF, and the exact ARMA likelihood vs the MVN oracle."""

import numpy as np
import pytest

from gridtrust.ts import (
    acf,
    arma_loglik,
    difference,
    is_invertible,
    is_stationary,
    pacf,
    pacf_to_ar,
    pacf_to_ma,
    simulate_arma,
)

from oracles import mvn_arma_loglik, simulate_ar


# --- differencing -----------------------------------------------------------


def test_difference_basic():
    assert difference([1.0, 2.0, 3.0, 4.0], 1).tolist() == [1.0, 1.0, 1.0]


def test_difference_identity():
    y = np.array([3.0, 1.0, 4.0])
    out = difference(y, 0)
    assert np.array_equal(out, y)


def test_difference_linear_ramp_constant():
    y = 2.5 * np.arange(50) + 1.0
    assert np.allclose(difference(y, 1), 2.5)


def test_difference_too_short():
    with pytest.raises(ValueError):
        difference([1.0], 1)


# --- ACF / PACF ---------------------------------------------------------------


def test_acf_lag_zero_is_one():
    rng = np.random.default_rng(0)
    res = acf(rng.standard_normal(100), 10)
    assert res.values[0] == 1.0
    assert res.band == pytest.approx(1.96 / 10.0)


def test_acf_ar1_matches_power_law():
    rng = np.random.default_rng(42)
    y = simulate_ar(rng, [0.8], 10_000)
    res = acf(y, 5)
    for k in range(1, 6):
        assert res.values[k] == pytest.approx(0.8**k, abs=0.03)


def test_acf_alternating_series():
    y = np.array([1.0, -1.0] * 50)
    res = acf(y, 3)
    assert res.values[1] == pytest.approx(-1.0, abs=0.02)


def test_acf_degenerate_rejected():
    with pytest.raises(ValueError):
        acf(np.full(50, 3.0), 5)
    with pytest.raises(ValueError):
        acf(np.arange(5.0), 10)


def test_pacf_ar1_cuts_off_after_lag1():
    rng = np.random.default_rng(7)
    y = simulate_ar(rng, [0.8], 10_000)
    res = pacf(y, 8)
    assert res.values[1] == pytest.approx(0.8, abs=0.03)
    assert np.all(np.abs(res.values[2:]) < res.band * 1.5)


def test_pacf_ar2_second_lag():
    rng = np.random.default_rng(21)
    y = simulate_ar(rng, [0.4, 0.3], 10_000)
    res = pacf(y, 5)
    assert res.values[2] == pytest.approx(0.3, abs=0.03)


def test_pacf_white_noise_band_rate():
    # Monte-Carlo: over seeds and lags, about 95% of white-noise PACF values
    # sit inside the critical band; require at least 90%.
    inside = total = 0
    for seed in range(40):
        rng = np.random.default_rng(1000 + seed)
        res = pacf(rng.standard_normal(400), 5)
        for k in range(1, 6):
            total += 1
            inside += abs(res.values[k]) <= res.band
    assert inside / total >= 0.90


# --- stationarity helpers -------------------------------------------------------


@pytest.mark.parametrize("phi,ok", [([0.5], True), ([0.99], True), ([1.01], False), ([0.5, 0.6], False), ([], True)])
def test_stationarity_check(phi, ok):
    assert is_stationary(np.array(phi)) is ok


def test_pacf_transform_always_stationary():
    rng = np.random.default_rng(3)
    for _ in range(200):
        r = rng.uniform(-0.999, 0.999, size=rng.integers(1, 5))
        assert is_stationary(pacf_to_ar(r))
        assert is_invertible(pacf_to_ma(r))


def test_pacf_transform_identity_on_ar1():
    assert pacf_to_ar(np.array([0.7]))[0] == 0.7


# --- exact likelihood -------------------------------------------------------------


def test_loglik_white_noise_closed_form():
    rng = np.random.default_rng(11)
    y = rng.standard_normal(50)
    sigma2 = 1.7
    ll = arma_loglik(y, np.array([]), np.array([]), sigma2)
    expected = -0.5 * (50 * np.log(2 * np.pi * sigma2) + float(y @ y) / sigma2)
    assert ll == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize(
    "phi,theta",
    [
        ([], []),
        ([0.6], []),
        ([], [0.4]),
        ([0.6], [0.4]),
        ([0.5, -0.2], []),
        ([], [0.3, 0.25]),
        ([0.5, -0.2], [0.3]),
        ([0.8], [0.3, 0.25]),
        ([0.5, -0.2], [0.3, 0.25]),
    ],
)
def test_loglik_matches_mvn_oracle(phi, theta):
    rng = np.random.default_rng(17)
    for n in (5, 15, 20):
        y = rng.standard_normal(n)
        for sigma2 in (0.5, 1.0, 2.3):
            ours = arma_loglik(y, np.array(phi), np.array(theta), sigma2)
            oracle = mvn_arma_loglik(y, phi, theta, sigma2)
            assert abs(ours - oracle) < 1e-6


def test_loglik_rejects_invalid_params():
    y = np.zeros(10) + np.arange(10)
    with pytest.raises(ValueError):
        arma_loglik(y, np.array([1.2]), np.array([]), 1.0)
    with pytest.raises(ValueError):
        arma_loglik(y, np.array([]), np.array([-1.2]), 1.0)
    with pytest.raises(ValueError):
        arma_loglik(y, np.array([]), np.array([]), -1.0)


def test_simulate_arma_roundtrip_likelihood():
    # the likelihood should prefer the true parameters over white noise
    rng = np.random.default_rng(23)
    eps = rng.standard_normal(500)
    y = simulate_arma(eps, np.array([0.7]), np.array([]))
    ll_true = arma_loglik(y, np.array([0.7]), np.array([]), 1.0)
    ll_wn = arma_loglik(y, np.array([]), np.array([]), float(np.var(y)))
    assert ll_true > ll_wn
