"""Regression with ARIMA(p,d,q) errors, fit by exact maximum likelihood.

Model: y_t = beta'x_t + eta_t where the d-th difference of eta follows a
stationary/invertible ARMA(p,q) with Gaussian innovations. Both y and the
design are differenced d times, so beta keeps its level interpretation and
the (0,0,0) case reduces exactly to OLS.

Estimation concentrates beta and sigma^2 out of the likelihood: for a
candidate (phi, theta), the innovations filter whitens y and each design
column with shared gains, beta comes from weighted least squares on the
whitened system, and sigma^2 is the scaled innovation variance. The simplex
search therefore runs only over p+q parameters, in partial-autocorrelation
space so every iterate is stationary and invertible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy import stats

from .arma import (
    arma_innovations,
    arma_loglik,
    difference,
    is_invertible,
    is_stationary,
    pacf_to_ar,
    pacf_to_ma,
)
from .neldermead import multistart
from .ols import OlsFit, ols_fit
from .series import Selector, TrustSeries


@dataclass(frozen=True)
class ArimaOrder:
    p: int
    d: int
    q: int

    def __post_init__(self) -> None:
        if self.p < 0 or self.q < 0:
            raise ValueError("orders must be >= 0")
        if self.d not in (0, 1):
            raise ValueError("differencing order must be 0 or 1")

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.p, self.d, self.q)


@dataclass
class ArimaxFit:
    order: ArimaOrder
    beta: np.ndarray
    beta_names: tuple[str, ...]
    phi: np.ndarray
    theta: np.ndarray
    sigma2: float
    loglik: float
    aic: float
    residuals: np.ndarray
    one_step_rmse: float
    stderr: np.ndarray
    param_names: tuple[str, ...]
    converged: bool
    nfev: int
    nobs: int

    @property
    def k_params(self) -> int:
        """AIC parameter count: beta + phi + theta + sigma^2."""
        return len(self.beta) + len(self.phi) + len(self.theta) + 1

    def params(self) -> np.ndarray:
        return np.concatenate([self.beta, self.phi, self.theta, [self.sigma2]])

    def zvalues(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.params() / self.stderr

    def pvalues(self) -> np.ndarray:
        return 2.0 * stats.norm.sf(np.abs(self.zvalues()))

    def to_dict(self) -> dict:
        return {
            "order": list(self.order.as_tuple()),
            "param_names": list(self.param_names),
            "beta": self.beta.tolist(),
            "beta_names": list(self.beta_names),
            "phi": self.phi.tolist(),
            "theta": self.theta.tolist(),
            "sigma2": self.sigma2,
            "loglik": self.loglik,
            "aic": self.aic,
            "one_step_rmse": self.one_step_rmse,
            "stderr": self.stderr.tolist(),
            "converged": self.converged,
            "nfev": self.nfev,
            "nobs": self.nobs,
        }


class FitError(RuntimeError):
    pass


def _resolve_inputs(
    y: Union[TrustSeries, np.ndarray],
    exog_columns: Selector,
    exog: Optional[np.ndarray],
    exog_names: Optional[Sequence[str]],
) -> tuple[np.ndarray, np.ndarray, tuple[str, ...]]:
    if isinstance(y, TrustSeries):
        x, names = y.select_exog(exog_columns)
        return y.values, x, names
    values = np.asarray(y, dtype=np.float64)
    if exog is None:
        return values, np.empty((len(values), 0)), ()
    x = np.asarray(exog, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    names = tuple(exog_names) if exog_names else tuple(f"x{i}" for i in range(x.shape[1]))
    return values, x, names


def _whitened_loglik(yd: np.ndarray, xd: np.ndarray, phi: np.ndarray, theta: np.ndarray):
    """Concentrated log-likelihood with beta and sigma^2 profiled out."""
    n = len(yd)
    stacked = np.column_stack([yd, xd]) if xd.shape[1] else yd[:, None]
    v, f = arma_innovations(stacked, phi, theta)
    # Near the stationarity boundary the initial covariance solve can turn
    # numerically indefinite; treat such points as likelihood -inf so the
    # optimizer backs away instead of propagating NaNs.
    if not (np.isfinite(f).all() and f.min() > 0.0 and np.isfinite(v).all()):
        return -np.inf, np.full(xd.shape[1], np.nan), float("nan")
    sqrt_f = np.sqrt(f)
    vy = v[:, 0] / sqrt_f
    if xd.shape[1]:
        vx = v[:, 1:] / sqrt_f[:, None]
        beta, *_ = np.linalg.lstsq(vx, vy, rcond=None)
        resid = vy - vx @ beta
    else:
        beta = np.empty(0)
        resid = vy
    sigma2 = float(resid @ resid) / n
    if sigma2 <= 0.0:
        sigma2 = 1e-300
    loglik = -0.5 * n * (math.log(2.0 * math.pi) + 1.0 + math.log(sigma2)) - 0.5 * float(
        np.sum(np.log(f))
    )
    return loglik, beta, sigma2


def _unpack(u: np.ndarray, p: int, q: int) -> tuple[np.ndarray, np.ndarray]:
    r = np.tanh(u)
    return pacf_to_ar(r[:p]), pacf_to_ma(r[p:])


def exact_loglik(
    y: np.ndarray,
    exog: np.ndarray,
    order: ArimaOrder,
    beta: np.ndarray,
    phi: np.ndarray,
    theta: np.ndarray,
    sigma2: float,
) -> float:
    """Unconcentrated log-likelihood at explicit parameter values (used by
    the numerical Hessian for standard errors)."""
    yd = difference(y, order.d)
    xd = difference_design(exog, order.d)
    z = yd - xd @ beta if xd.shape[1] else yd
    return arma_loglik(z, phi, theta, sigma2)


def difference_design(x: np.ndarray, d: int) -> np.ndarray:
    if x.shape[1] == 0:
        return x[d:] if d else x
    return np.diff(x, n=d, axis=0) if d else x


def arimax_fit(
    y: Union[TrustSeries, np.ndarray],
    order: ArimaOrder,
    exog_columns: Selector = "capability",
    exog: Optional[np.ndarray] = None,
    exog_names: Optional[Sequence[str]] = None,
    seed: int = 0,
    restarts: int = 5,
    max_evals: int = 10_000,
    compute_stderr: bool = True,
) -> ArimaxFit:
    """Maximum-likelihood fit of the regression-with-ARIMA-errors model.

    Runs a seeded multistart simplex over the transformed (phi, theta); a
    non-converged search still returns the best point found, flagged via
    ``converged``.
    """
    values, x, names = _resolve_inputs(y, exog_columns, exog, exog_names)
    p, d, q = order.as_tuple()
    n_eff = len(values) - d
    if n_eff <= p + q + d + x.shape[1] + 5:
        raise FitError(f"series too short ({len(values)}) for order {order.as_tuple()}")

    yd = difference(values, d)
    xd = difference_design(x, d)

    def objective(u: np.ndarray) -> float:
        phi, theta = _unpack(u, p, q)
        loglik, _, _ = _whitened_loglik(yd, xd, phi, theta)
        return -loglik

    rng = np.random.default_rng(seed)
    res = multistart(objective, p + q, rng, restarts=restarts, max_evals=max_evals)
    phi, theta = _unpack(res.x, p, q)
    loglik, beta, sigma2 = _whitened_loglik(yd, xd, phi, theta)
    if not np.isfinite(loglik):
        raise FitError(f"likelihood degenerate everywhere for order {order.as_tuple()}")

    k = len(beta) + p + q + 1
    aic = 2.0 * k - 2.0 * loglik

    param_names = (
        names
        + tuple(f"ar{i+1}" for i in range(p))
        + tuple(f"ma{i+1}" for i in range(q))
        + ("sigma2",)
    )
    stderr = np.full(k, np.nan)
    if compute_stderr:
        stderr = _hessian_stderr(values, x, order, beta, phi, theta, sigma2)

    predictions = _one_step(values, x, d, beta, phi, theta)
    residuals = values - predictions
    valid = ~np.isnan(residuals)
    one_step_rmse = float(np.sqrt(np.mean(residuals[valid] ** 2)))

    return ArimaxFit(
        order=order,
        beta=beta,
        beta_names=names,
        phi=phi,
        theta=theta,
        sigma2=sigma2,
        loglik=loglik,
        aic=aic,
        residuals=residuals,
        one_step_rmse=one_step_rmse,
        stderr=stderr,
        param_names=param_names,
        converged=res.converged,
        nfev=res.nfev,
        nobs=len(values),
    )


def _hessian_stderr(
    values: np.ndarray,
    x: np.ndarray,
    order: ArimaOrder,
    beta: np.ndarray,
    phi: np.ndarray,
    theta: np.ndarray,
    sigma2: float,
) -> np.ndarray:
    """Standard errors from the central-difference Hessian of the exact
    log-likelihood at the optimum (relative step 1e-4)."""
    psi = np.concatenate([beta, phi, theta, [sigma2]])
    k = len(psi)
    nb, p = len(beta), len(phi)

    def ll(v: np.ndarray) -> float:
        try:
            return exact_loglik(
                values, x, order, v[:nb], v[nb : nb + p], v[nb + p : k - 1], v[k - 1]
            )
        except ValueError:
            return np.nan

    h = 1e-4 * np.maximum(np.abs(psi), 1.0)
    hess = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            pp = psi.copy(); pp[i] += h[i]; pp[j] += h[j]
            pm = psi.copy(); pm[i] += h[i]; pm[j] -= h[j]
            mp = psi.copy(); mp[i] -= h[i]; mp[j] += h[j]
            mm = psi.copy(); mm[i] -= h[i]; mm[j] -= h[j]
            hess[i, j] = hess[j, i] = (ll(pp) - ll(pm) - ll(mp) + ll(mm)) / (4.0 * h[i] * h[j])
    try:
        cov = np.linalg.inv(-hess)
        diag = np.diag(cov).copy()
        diag[diag < 0] = np.nan
        return np.sqrt(diag)
    except np.linalg.LinAlgError:
        return np.full(k, np.nan)


def _one_step(
    values: np.ndarray,
    x: np.ndarray,
    d: int,
    beta: np.ndarray,
    phi: np.ndarray,
    theta: np.ndarray,
) -> np.ndarray:
    """Filtered one-step-ahead predictions on the undifferenced scale.

    With d=1 the first point has no predecessor, so predictions[0] is NaN.
    """
    yd = difference(values, d)
    xd = difference_design(x, d)
    z = yd - xd @ beta if xd.shape[1] else yd
    v, _ = arma_innovations(z[:, None], phi, theta)
    pred_d = yd - v[:, 0]
    if d == 0:
        return pred_d
    out = np.empty(len(values))
    out[0] = np.nan
    out[1:] = values[:-1] + pred_d
    return out


def forecast_one_step(
    fit: ArimaxFit,
    y: Union[TrustSeries, np.ndarray],
    exog_columns: Optional[Selector] = None,
    exog: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Apply a fit's parameters to a series and return its one-step-ahead
    predictions (training series or any compatible other series)."""
    selector: Selector = exog_columns if exog_columns is not None else (
        fit.beta_names if fit.beta_names else "none"
    )
    values, x, names = _resolve_inputs(y, selector, exog, fit.beta_names or None)
    if x.shape[1] != len(fit.beta):
        raise ValueError(
            f"fit expects {len(fit.beta)} exogenous columns {list(fit.beta_names)}, got {x.shape[1]}"
        )
    return _one_step(values, x, fit.order.d, fit.beta, fit.phi, fit.theta)


def prediction_rmse(values: np.ndarray, predictions: np.ndarray) -> float:
    err = np.asarray(values, dtype=np.float64) - predictions
    valid = ~np.isnan(err)
    return float(np.sqrt(np.mean(err[valid] ** 2)))


def cross_validate(
    fit: ArimaxFit,
    y_other: Union[TrustSeries, np.ndarray],
    exog_columns: Optional[Selector] = None,
    exog: Optional[np.ndarray] = None,
) -> float:
    """One-step prediction RMSE of a fitted model applied unchanged to
    another series."""
    values = y_other.values if isinstance(y_other, TrustSeries) else np.asarray(y_other)
    preds = forecast_one_step(fit, y_other, exog_columns, exog)
    return prediction_rmse(values, preds)


@dataclass
class AicCell:
    order: ArimaOrder
    aic: float
    loglik: float
    converged: bool
    error: Optional[str] = None


@dataclass
class AicGrid:
    p_values: tuple[int, ...]
    q_values: tuple[int, ...]
    d: int
    table: np.ndarray
    cells: dict = field(default_factory=dict)
    selected: Optional[ArimaOrder] = None

    def to_dict(self) -> dict:
        return {
            "p_values": list(self.p_values),
            "q_values": list(self.q_values),
            "d": self.d,
            "table": [[None if np.isnan(v) else v for v in row] for row in self.table],
            "selected": list(self.selected.as_tuple()) if self.selected else None,
        }


def aic_grid(
    y: Union[TrustSeries, np.ndarray],
    p_range: Sequence[int] = range(5),
    q_range: Sequence[int] = range(5),
    d: int = 1,
    exog_columns: Selector = "capability",
    exog: Optional[np.ndarray] = None,
    seed: int = 0,
    restarts: int = 5,
    max_evals: int = 10_000,
) -> AicGrid:
    """Fit every (p, d, q) combination and pick the AIC minimizer.

    Individual fit failures become missing cells; ties break toward smaller
    p+q, then smaller p.
    """
    p_values, q_values = tuple(p_range), tuple(q_range)
    if not p_values or not q_values:
        raise ValueError("order ranges must be nonempty")
    table = np.full((len(p_values), len(q_values)), np.nan)
    grid = AicGrid(p_values=p_values, q_values=q_values, d=d, table=table)
    candidates = []
    for i, p in enumerate(p_values):
        for j, q in enumerate(q_values):
            order = ArimaOrder(p, d, q)
            try:
                fit = arimax_fit(
                    y,
                    order,
                    exog_columns=exog_columns,
                    exog=exog,
                    seed=seed,
                    restarts=restarts,
                    max_evals=max_evals,
                    compute_stderr=False,
                )
                table[i, j] = fit.aic
                grid.cells[(p, q)] = AicCell(order, fit.aic, fit.loglik, fit.converged)
                candidates.append((fit.aic, p + q, p, order))
            except (FitError, ValueError) as exc:
                grid.cells[(p, q)] = AicCell(order, float("nan"), float("nan"), False, str(exc))
    if candidates:
        candidates.sort(key=lambda c: (c[0], c[1], c[2]))
        grid.selected = candidates[0][3]
    return grid


def ols_baseline(
    y: Union[TrustSeries, np.ndarray],
    exog_columns: Selector = "capability",
    exog: Optional[np.ndarray] = None,
    exog_names: Optional[Sequence[str]] = None,
    intercept: bool = False,
) -> OlsFit:
    """OLS on the same design the ARIMAX models use (its (0,0,0) nest)."""
    values, x, names = _resolve_inputs(y, exog_columns, exog, exog_names)
    return ols_fit(values, x, intercept=intercept, names=names)
