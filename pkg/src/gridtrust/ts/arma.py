"""ARMA building blocks: differencing, ACF/PACF, exact Gaussian likelihood.

The likelihood uses the state-space innovations filter from the kernel
backend (exact stationary initialization), so it equals the explicit
multivariate-normal density with the theoretical ARMA covariance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import _kernels


def difference(y: np.ndarray, d: int) -> np.ndarray:
    """d-fold first differences; length shrinks by d."""
    y = np.asarray(y, dtype=np.float64)
    if d < 0:
        raise ValueError("d must be >= 0")
    if len(y) <= d:
        raise ValueError(f"series of length {len(y)} too short for d={d}")
    return np.diff(y, n=d) if d > 0 else y.copy()


@dataclass
class CorrelogramResult:
    """Correlations by lag (index = lag) and the white-noise critical band."""

    values: np.ndarray
    band: float


def acf(y: np.ndarray, max_lag: int) -> CorrelogramResult:
    """Sample autocorrelations with biased (1/n) normalization, lags 0..max_lag."""
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    if n <= max_lag:
        raise ValueError("series must be longer than max_lag")
    centered = y - y.mean()
    c0 = float(centered @ centered) / n
    if c0 <= 0.0:
        raise ValueError("zero-variance series has no autocorrelation")
    values = np.empty(max_lag + 1)
    values[0] = 1.0
    for k in range(1, max_lag + 1):
        values[k] = float(centered[k:] @ centered[:-k]) / n / c0
    return CorrelogramResult(values=values, band=1.96 / np.sqrt(n))


def pacf(y: np.ndarray, max_lag: int) -> CorrelogramResult:
    """Partial autocorrelations via the Durbin-Levinson recursion on the
    sample ACF; index 0 is 1 by convention."""
    rho = acf(y, max_lag).values
    n = len(y)
    values = np.empty(max_lag + 1)
    values[0] = 1.0
    prev = np.empty(0)
    for k in range(1, max_lag + 1):
        if k == 1:
            phi_kk = rho[1]
            cur = np.array([phi_kk])
        else:
            num = rho[k] - prev @ rho[k - 1 : 0 : -1]
            den = 1.0 - prev @ rho[1:k]
            if abs(den) < 1e-14:
                raise ValueError(f"degenerate Durbin-Levinson denominator at lag {k}")
            phi_kk = num / den
            cur = np.empty(k)
            cur[: k - 1] = prev - phi_kk * prev[::-1]
            cur[k - 1] = phi_kk
        values[k] = phi_kk
        prev = cur
    return CorrelogramResult(values=values, band=1.96 / np.sqrt(n))


def is_stationary(phi: np.ndarray) -> bool:
    """AR polynomial 1 - phi_1 z - ... - phi_p z^p has all roots outside the
    unit circle."""
    phi = np.asarray(phi, dtype=np.float64)
    if len(phi) == 0:
        return True
    roots = np.roots(np.concatenate([[-phi[i] for i in range(len(phi) - 1, -1, -1)], [1.0]]))
    return bool(np.all(np.abs(roots) > 1.0 + 1e-12))


def is_invertible(theta: np.ndarray) -> bool:
    """MA polynomial 1 + theta_1 z + ... + theta_q z^q has all roots outside
    the unit circle."""
    theta = np.asarray(theta, dtype=np.float64)
    if len(theta) == 0:
        return True
    return is_stationary(-theta)


def pacf_to_ar(r: np.ndarray) -> np.ndarray:
    """Map partial autocorrelations in (-1,1) to a stationary AR vector
    (Durbin-Levinson step-up). The inverse-image of (-1,1)^p is exactly the
    stationary region, which is what makes unconstrained optimization safe."""
    r = np.asarray(r, dtype=np.float64)
    a = np.empty(0)
    for k, rk in enumerate(r, start=1):
        new = np.empty(k)
        new[: k - 1] = a - rk * a[::-1]
        new[k - 1] = rk
        a = new
    return a


def pacf_to_ma(r: np.ndarray) -> np.ndarray:
    """Map (-1,1)^q onto the invertible MA region (sign-flipped AR map)."""
    return -pacf_to_ar(r)


def arma_innovations(y: np.ndarray, phi: np.ndarray, theta: np.ndarray):
    """One-step prediction errors and scaled variances for unit innovation
    variance. y may be 1-D or (n, c) for shared-gain multi-column filtering."""
    return _kernels.arma_innovations(np.asarray(y, dtype=np.float64), phi, theta)


def arma_loglik(y: np.ndarray, phi: np.ndarray, theta: np.ndarray, sigma2: float) -> float:
    """Exact Gaussian log-likelihood of a zero-mean ARMA(p,q) series via the
    prediction-error decomposition."""
    phi = np.asarray(phi, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    if not is_stationary(phi):
        raise ValueError(f"nonstationary AR coefficients {phi.tolist()}")
    if not is_invertible(theta):
        raise ValueError(f"noninvertible MA coefficients {theta.tolist()}")
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    v, f = arma_innovations(y[:, None], phi, theta)
    v = v[:, 0]
    return float(
        -0.5 * (n * np.log(2.0 * np.pi) + np.sum(np.log(sigma2 * f)) + np.sum(v * v / (sigma2 * f)))
    )


def simulate_arma(
    eps: np.ndarray,
    phi: np.ndarray,
    theta: np.ndarray,
    init: float = 0.0,
) -> np.ndarray:
    """Run the ARMA recursion over given innovations.

    Pre-sample innovations are zero; pre-sample values of the series are
    ``init`` (a nonzero init gives the transient-decay behaviour used by the
    synthetic trust generators).
    """
    eps = np.asarray(eps, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    p, q = len(phi), len(theta)
    n = len(eps)
    out = np.empty(n)
    for t in range(n):
        val = eps[t]
        for i in range(p):
            prev = out[t - 1 - i] if t - 1 - i >= 0 else init
            val += phi[i] * prev
        for j in range(q):
            if t - 1 - j >= 0:
                val += theta[j] * eps[t - 1 - j]
        out[t] = val
    return out
