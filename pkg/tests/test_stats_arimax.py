"""ARIMAX fitting, forecasting, cross-validation and AIC order selection."""

import numpy as np
import pytest

from gridtrust.design import Group, build_plan
from gridtrust.synth import SyntheticTrustParams, gen_trust_arimax
from gridtrust.ts import (
    ArimaOrder,
    FitError,
    aic_grid,
    arimax_fit,
    cross_validate,
    forecast_one_step,
    ols_baseline,
    prediction_rmse,
    simulate_arma,
)

BETA = (0.42, 0.52, 0.62)


@pytest.fixture(scope="module")
def ar_series(plan_g0):
    params = SyntheticTrustParams(beta=BETA, phi=(0.7,), noise_sd=0.05)
    return gen_trust_arimax(params, plan_g0, seed=31)


def test_order_validation():
    with pytest.raises(ValueError):
        ArimaOrder(-1, 0, 0)
    with pytest.raises(ValueError):
        ArimaOrder(1, 2, 0)


def test_000_reduces_to_ols(ar_series):
    fit = arimax_fit(ar_series, ArimaOrder(0, 0, 0))
    ols = ols_baseline(ar_series)
    assert np.allclose(fit.beta, ols.coef, atol=1e-6)
    assert fit.one_step_rmse == pytest.approx(ols.rmse, abs=1e-10)
    # sigma2 is the mean squared residual at the OLS optimum
    assert fit.sigma2 == pytest.approx(ols.rmse**2, rel=1e-9)


def test_fit_is_deterministic(ar_series):
    a = arimax_fit(ar_series, ArimaOrder(1, 0, 1), seed=9)
    b = arimax_fit(ar_series, ArimaOrder(1, 0, 1), seed=9)
    assert np.array_equal(a.beta, b.beta)
    assert np.array_equal(a.phi, b.phi)
    assert np.array_equal(a.theta, b.theta)
    assert a.loglik == b.loglik and a.nfev == b.nfev


def test_parameter_recovery_single_seed(plan_g0):
    params = SyntheticTrustParams(beta=BETA, phi=(0.6,), noise_sd=0.04)
    series = gen_trust_arimax(params, plan_g0, seed=7, n_trials=2000)
    fit = arimax_fit(series, ArimaOrder(1, 0, 0), seed=1)
    assert np.all(np.abs(fit.beta - np.array(BETA)) < 3 * fit.stderr[:3])
    assert abs(fit.phi[0] - 0.6) < 3 * fit.stderr[3]
    assert fit.converged


def test_aic_formula(ar_series):
    fit = arimax_fit(ar_series, ArimaOrder(1, 0, 0))
    k = len(fit.beta) + 1 + 0 + 1
    assert fit.aic == pytest.approx(2 * k - 2 * fit.loglik, abs=1e-12)
    assert fit.k_params == k


def test_fitted_params_remain_valid(ar_series):
    from gridtrust.ts import is_invertible, is_stationary

    fit = arimax_fit(ar_series, ArimaOrder(2, 0, 2), seed=3)
    assert is_stationary(fit.phi)
    assert is_invertible(fit.theta)


def test_too_short_series_rejected():
    # length must exceed p + q + d + n_exog + 5
    with pytest.raises(FitError):
        arimax_fit(np.arange(7.0), ArimaOrder(1, 0, 1))
    with pytest.raises(FitError):
        arimax_fit(np.arange(12.0), ArimaOrder(4, 1, 4))


# --- forecasting -----------------------------------------------------------


def test_forecast_pure_regression_equals_mean(plan_g0):
    series = gen_trust_arimax(
        SyntheticTrustParams(beta=BETA, noise_sd=0.02), plan_g0, seed=2
    )
    fit = arimax_fit(series, ArimaOrder(0, 0, 0))
    preds = forecast_one_step(fit, series)
    x, _ = series.select_exog("capability")
    assert np.allclose(preds, x @ fit.beta, atol=1e-12)


def test_forecast_noiseless_ar1_error_vanishes():
    # y follows a known AR(1) exactly; with the true coefficient the one-step
    # error must decay to zero after the stationary-init transient
    phi = 0.8
    y = simulate_arma(np.zeros(60), np.array([phi]), np.array([]), init=5.0)
    fit = arimax_fit(y, ArimaOrder(1, 0, 0), seed=1)
    v = y - forecast_one_step(fit, y)
    assert np.max(np.abs(v[10:])) < 0.05 * abs(v[0])


def test_training_rmse_matches_forecast(ar_series):
    fit = arimax_fit(ar_series, ArimaOrder(1, 0, 0))
    preds = forecast_one_step(fit, ar_series)
    assert prediction_rmse(ar_series.values, preds) == pytest.approx(fit.one_step_rmse)


def test_cross_validate_self_is_training_rmse(ar_series):
    fit = arimax_fit(ar_series, ArimaOrder(1, 0, 0))
    assert cross_validate(fit, ar_series) == pytest.approx(fit.one_step_rmse)


def test_cross_validate_same_generator(plan_g0, plan_g1):
    params = SyntheticTrustParams(beta=BETA, phi=(0.6,), noise_sd=0.05)
    a = gen_trust_arimax(params, plan_g0, seed=101)
    b = gen_trust_arimax(params, plan_g1, seed=202)
    fit = arimax_fit(a, ArimaOrder(1, 0, 0), seed=1)
    cross = cross_validate(fit, b)
    assert abs(cross - fit.one_step_rmse) / fit.one_step_rmse < 0.20


def test_white_noise_model_rmse_is_residual_sd(ar_series):
    fit = arimax_fit(ar_series, ArimaOrder(0, 0, 0))
    x, _ = ar_series.select_exog("capability")
    resid = ar_series.values - x @ fit.beta
    assert fit.one_step_rmse == pytest.approx(float(np.sqrt(np.mean(resid**2))), abs=1e-12)


def test_forecast_exog_shape_mismatch(ar_series):
    fit = arimax_fit(ar_series, ArimaOrder(0, 0, 0))
    with pytest.raises(ValueError):
        forecast_one_step(fit, ar_series.values, exog=np.zeros((63, 2)))


def test_d1_first_prediction_is_nan(ar_series):
    fit = arimax_fit(ar_series, ArimaOrder(0, 1, 1), seed=2)
    preds = forecast_one_step(fit, ar_series)
    assert np.isnan(preds[0]) and not np.any(np.isnan(preds[1:]))


# --- AIC grid -----------------------------------------------------------------


def test_aic_grid_shape_and_selection(ar_series):
    grid = aic_grid(ar_series, range(3), range(3), d=0, seed=4, restarts=2, max_evals=2000)
    assert grid.table.shape == (3, 3)
    assert not np.any(np.isnan(grid.table))
    assert grid.selected is not None
    i, j = grid.p_values.index(grid.selected.p), grid.q_values.index(grid.selected.q)
    assert grid.table[i, j] == np.nanmin(grid.table)


def test_aic_grid_prefers_true_order_arima110():
    rng = np.random.default_rng(905)
    dy = simulate_arma(rng.standard_normal(2000), np.array([0.8]), np.array([]))
    y = np.cumsum(dy)
    grid = aic_grid(y, [0, 1], [0], d=1, exog_columns="none", seed=2, restarts=2)
    aic_010 = grid.table[0, 0]
    aic_110 = grid.table[1, 0]
    assert aic_110 < aic_010
    assert grid.selected.as_tuple() == (1, 1, 0)


def test_aic_grid_records_failures_without_aborting():
    y = np.arange(12.0) + np.sin(np.arange(12.0))
    grid = aic_grid(y, range(5), range(5), d=1, exog_columns="none", seed=1, restarts=1, max_evals=300)
    # large orders cannot fit 12 points; the cells must be missing, not fatal
    assert np.isnan(grid.table[4, 4])
    assert grid.cells[(4, 4)].error is not None
    assert not np.isnan(grid.table[0, 0])


def test_pure_arima_without_exog():
    rng = np.random.default_rng(3)
    y = simulate_arma(rng.standard_normal(300), np.array([0.5]), np.array([]))
    fit = arimax_fit(y, ArimaOrder(1, 0, 0), seed=1)
    assert fit.beta.size == 0
    assert abs(fit.phi[0] - 0.5) < 0.15


def test_arimax_beats_ols_on_autocorrelated_trust(ar_series):
    fit = arimax_fit(ar_series, ArimaOrder(1, 0, 0), seed=1)
    ols = ols_baseline(ar_series)
    assert fit.one_step_rmse < ols.rmse
