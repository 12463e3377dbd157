"""Ordinary least squares with categorical (one-hot) regressors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats

_RANK_TOL = 1e-10


class RankDeficiencyError(ValueError):
    """Design matrix is rank deficient; ``columns`` names the involved columns."""

    def __init__(self, columns: Sequence[str]):
        self.columns = tuple(columns)
        super().__init__(f"design matrix is rank deficient; collinear columns: {', '.join(columns)}")


@dataclass
class OlsFit:
    coef: np.ndarray
    names: tuple[str, ...]
    stderr: np.ndarray
    tvalues: np.ndarray
    pvalues: np.ndarray
    fitted: np.ndarray
    residuals: np.ndarray
    rmse: float
    nobs: int
    df_resid: int

    def to_dict(self) -> dict:
        return {
            "names": list(self.names),
            "coef": self.coef.tolist(),
            "stderr": self.stderr.tolist(),
            "tvalues": self.tvalues.tolist(),
            "pvalues": self.pvalues.tolist(),
            "rmse": self.rmse,
            "nobs": self.nobs,
            "df_resid": self.df_resid,
        }


def ols_fit(
    y: np.ndarray,
    x: np.ndarray,
    intercept: bool = False,
    names: Optional[Sequence[str]] = None,
) -> OlsFit:
    """Least-squares fit via SVD (numerically stable pseudo-solve).

    Raises RankDeficiencyError naming the collinear columns when the design
    is not full column rank, e.g. when capability and strategy one-hots are
    used together.
    """
    y = np.asarray(y, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if len(y) != x.shape[0]:
        raise ValueError("y and design matrix row counts differ")
    if names is None:
        names = tuple(f"x{i}" for i in range(x.shape[1]))
    names = tuple(names)
    if intercept:
        x = np.column_stack([np.ones(len(y)), x])
        names = ("intercept",) + names

    n, k = x.shape
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    if s[0] == 0.0 or s[-1] < _RANK_TOL * s[0]:
        null = vt[s < _RANK_TOL * max(s[0], 1.0)]
        involved = np.any(np.abs(null) > 1e-8, axis=0)
        raise RankDeficiencyError([names[i] for i in range(k) if involved[i]])

    coef = vt.T @ ((u.T @ y) / s)
    fitted = x @ coef
    residuals = y - fitted
    rss = float(residuals @ residuals)
    rmse = float(np.sqrt(rss / n))
    df_resid = n - k

    if df_resid > 0:
        sigma2 = rss / df_resid
        xtx_inv = vt.T @ np.diag(1.0 / s**2) @ vt
        stderr = np.sqrt(np.maximum(sigma2 * np.diag(xtx_inv), 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            tvalues = np.where(stderr > 0, coef / stderr, np.nan)
        pvalues = 2.0 * stats.t.sf(np.abs(tvalues), df_resid)
    else:
        stderr = np.full(k, np.nan)
        tvalues = np.full(k, np.nan)
        pvalues = np.full(k, np.nan)

    return OlsFit(
        coef=coef,
        names=names,
        stderr=stderr,
        tvalues=tvalues,
        pvalues=pvalues,
        fitted=fitted,
        residuals=residuals,
        rmse=rmse,
        nobs=n,
        df_resid=df_resid,
    )
