"""Pure-Python kernels: reference implementation of the hot loops.

This module is the semantic ground truth. `_ckernels.pyx` mirrors it
statement for statement; the two must produce bit-identical output
(enforced by tests/test_kernels.py and the benchmark). Keep every
floating-point expression in the same shape in both files.
"""

from __future__ import annotations

import math

import numpy as np

from .common import arma_state_setup

BACKEND = "python"

# P-recursion is frozen once successive covariances agree to this tolerance;
# afterwards only the O(m) state recursion runs per step.
_STEADY_TOL = 1e-13


def arma_innovations(y: np.ndarray, phi: np.ndarray, theta: np.ndarray):
    """Kalman innovations filter for ARMA(p,q) noise with unit variance.

    y : (n, c) array; each column is filtered with the shared gain sequence.
    Returns (v, f): innovations (n, c) and prediction variances (n,).
    Exact stationary initialization; caller guarantees stationarity of phi
    and invertibility of theta.
    """
    y = np.ascontiguousarray(y, dtype=np.float64)
    if y.ndim == 1:
        y = y[:, None]
    n, c = y.shape
    phi_full, rr, p0 = arma_state_setup(phi, theta)
    m = len(phi_full)

    v = np.empty((n, c))
    f = np.empty(n)
    a = np.zeros((m, c))
    p = p0.copy()
    k = np.zeros(m)
    tp0 = np.zeros(m)
    pnew = np.zeros((m, m))
    steady = False
    f_t = 0.0

    for t in range(n):
        if not steady:
            f_t = p[0, 0]
            for i in range(m):
                tp0[i] = phi_full[i] * p[0, 0] + (p[i + 1, 0] if i + 1 < m else 0.0)
            for i in range(m):
                k[i] = tp0[i] / f_t
            diff = 0.0
            for i in range(m):
                for j in range(m):
                    p00 = p[0, 0]
                    p0j = p[0, j + 1] if j + 1 < m else 0.0
                    pi0 = p[i + 1, 0] if i + 1 < m else 0.0
                    pij = p[i + 1, j + 1] if i + 1 < m and j + 1 < m else 0.0
                    tpt = ((phi_full[i] * phi_full[j]) * p00 + phi_full[i] * p0j) + (
                        phi_full[j] * pi0 + pij
                    )
                    val = (tpt - (tp0[i] * tp0[j]) / f_t) + rr[i, j]
                    pnew[i, j] = val
                    d = abs(val - p[i, j])
                    if d > diff:
                        diff = d
            p, pnew = pnew, p
            if diff < _STEADY_TOL:
                steady = True
        f[t] = f_t
        for col in range(c):
            a0 = a[0, col]
            vt = y[t, col] - a0
            v[t, col] = vt
            for i in range(m):
                anext = a[i + 1, col] if i + 1 < m else 0.0
                a[i, col] = (phi_full[i] * a0 + anext) + k[i] * vt
    return v, f


def integrate_axes(
    x: float,
    y: float,
    vx: float,
    vy: float,
    fx: np.ndarray,
    fy: np.ndarray,
    inx: np.ndarray,
    iny: np.ndarray,
    damping: float,
    max_speed: float,
    dt: float,
    field: float,
):
    """Fixed-timestep force integration with damping, speed clamp and walls.

    fx, fy : per-tick forces (units/s^2); inx, iny : uint8 flags marking the
    axis as actively driven (damping applies only to undriven axes).
    Returns (pos, vel) arrays of shape (n+1, 2) including the initial state.
    """
    fx = np.ascontiguousarray(fx, dtype=np.float64)
    fy = np.ascontiguousarray(fy, dtype=np.float64)
    inx = np.ascontiguousarray(inx, dtype=np.uint8)
    iny = np.ascontiguousarray(iny, dtype=np.uint8)
    n = len(fx)
    pos = np.empty((n + 1, 2))
    vel = np.empty((n + 1, 2))
    pos[0, 0] = x
    pos[0, 1] = y
    vel[0, 0] = vx
    vel[0, 1] = vy
    ms2 = max_speed * max_speed

    for t in range(n):
        if inx[t]:
            vx = vx + fx[t] * dt
        else:
            vx = vx * damping
        if iny[t]:
            vy = vy + fy[t] * dt
        else:
            vy = vy * damping
        speed2 = vx * vx + vy * vy
        if speed2 > ms2:
            scale = max_speed / math.sqrt(speed2)
            vx = vx * scale
            vy = vy * scale
        x = x + vx * dt
        y = y + vy * dt
        if x < 0.0:
            x = 0.0
            vx = 0.0
        elif x > field:
            x = field
            vx = 0.0
        if y < 0.0:
            y = 0.0
            vy = 0.0
        elif y > field:
            y = field
            vy = 0.0
        pos[t + 1, 0] = x
        pos[t + 1, 1] = y
        vel[t + 1, 0] = vx
        vel[t + 1, 1] = vy
    return pos, vel
