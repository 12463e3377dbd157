"""Time-series estimation stack: OLS, ACF/PACF, exact ARMA likelihood,
ARIMAX maximum-likelihood fitting, AIC order selection and forecasting."""

from .arma import (
    CorrelogramResult,
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
from .arimax import (
    AicGrid,
    ArimaOrder,
    ArimaxFit,
    FitError,
    aic_grid,
    arimax_fit,
    cross_validate,
    forecast_one_step,
    ols_baseline,
    prediction_rmse,
)
from .neldermead import MinimizeResult, multistart, nelder_mead
from .ols import OlsFit, RankDeficiencyError, ols_fit
from .series import (
    CAPABILITY_COLUMNS,
    EXOG_COLUMNS,
    STRATEGY_COLUMNS,
    TrustSeries,
    plan_exog,
)

__all__ = [
    "AicGrid",
    "ArimaOrder",
    "ArimaxFit",
    "CAPABILITY_COLUMNS",
    "CorrelogramResult",
    "EXOG_COLUMNS",
    "FitError",
    "MinimizeResult",
    "OlsFit",
    "RankDeficiencyError",
    "STRATEGY_COLUMNS",
    "TrustSeries",
    "acf",
    "aic_grid",
    "arimax_fit",
    "arma_loglik",
    "cross_validate",
    "difference",
    "forecast_one_step",
    "is_invertible",
    "is_stationary",
    "multistart",
    "nelder_mead",
    "ols_baseline",
    "ols_fit",
    "pacf",
    "pacf_to_ar",
    "pacf_to_ma",
    "plan_exog",
    "prediction_rmse",
    "simulate_arma",
]
