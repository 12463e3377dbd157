# cython: language_level=3
"""Compiled kernels. Mirrors _pykernels.py statement for statement;
keep every floating-point expression in the same shape so the two
backends stay bit-identical (compiled with -ffp-contract=off)."""

from libc.math cimport sqrt

import numpy as np
cimport numpy as cnp

from .common import arma_state_setup

cnp.import_array()

BACKEND = "cython"

cdef double _STEADY_TOL = 1e-13


def arma_innovations(y, phi, theta):
    """Kalman innovations filter for ARMA(p,q) noise with unit variance.

    Same contract as the pure-Python version: y (n, c) -> (v (n, c), f (n,)).
    """
    y = np.ascontiguousarray(y, dtype=np.float64)
    if y.ndim == 1:
        y = y[:, None]
    cdef Py_ssize_t n = y.shape[0]
    cdef Py_ssize_t c = y.shape[1]
    phi_full_a, rr_a, p0_a = arma_state_setup(phi, theta)
    cdef Py_ssize_t m = phi_full_a.shape[0]

    v_a = np.empty((n, c))
    f_a = np.empty(n)
    a_a = np.zeros((m, c))
    p_a = np.ascontiguousarray(p0_a)
    k_a = np.zeros(m)
    tp0_a = np.zeros(m)
    pnew_a = np.zeros((m, m))

    cdef double[:, ::1] yv = y
    cdef double[:, ::1] v = v_a
    cdef double[::1] f = f_a
    cdef double[:, ::1] a = a_a
    cdef double[:, ::1] p = p_a
    cdef double[:, ::1] pnew = pnew_a
    cdef double[::1] k = k_a
    cdef double[::1] tp0 = tp0_a
    cdef double[::1] phi_full = np.ascontiguousarray(phi_full_a)
    cdef double[:, ::1] rr = np.ascontiguousarray(rr_a)

    cdef bint steady = False
    cdef double f_t = 0.0
    cdef Py_ssize_t t, i, j, col
    cdef double diff, p00, p0j, pi0, pij, tpt, val, d, a0, vt, anext
    cdef double[:, ::1] tmp

    with nogil:
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
                tmp = p
                p = pnew
                pnew = tmp
                if diff < _STEADY_TOL:
                    steady = True
            f[t] = f_t
            for col in range(c):
                a0 = a[0, col]
                vt = yv[t, col] - a0
                v[t, col] = vt
                for i in range(m):
                    anext = a[i + 1, col] if i + 1 < m else 0.0
                    a[i, col] = (phi_full[i] * a0 + anext) + k[i] * vt
    return v_a, f_a


def integrate_axes(
    double x,
    double y,
    double vx,
    double vy,
    fx,
    fy,
    inx,
    iny,
    double damping,
    double max_speed,
    double dt,
    double field,
):
    """Fixed-timestep force integration; same contract as the Python version."""
    fx = np.ascontiguousarray(fx, dtype=np.float64)
    fy = np.ascontiguousarray(fy, dtype=np.float64)
    inx = np.ascontiguousarray(inx, dtype=np.uint8)
    iny = np.ascontiguousarray(iny, dtype=np.uint8)
    cdef Py_ssize_t n = fx.shape[0]
    pos_a = np.empty((n + 1, 2))
    vel_a = np.empty((n + 1, 2))

    cdef double[::1] fxv = fx
    cdef double[::1] fyv = fy
    cdef unsigned char[::1] inxv = inx
    cdef unsigned char[::1] inyv = iny
    cdef double[:, ::1] pos = pos_a
    cdef double[:, ::1] vel = vel_a

    pos[0, 0] = x
    pos[0, 1] = y
    vel[0, 0] = vx
    vel[0, 1] = vy
    cdef double ms2 = max_speed * max_speed
    cdef double speed2, scale
    cdef Py_ssize_t t

    with nogil:
        for t in range(n):
            if inxv[t]:
                vx = vx + fxv[t] * dt
            else:
                vx = vx * damping
            if inyv[t]:
                vy = vy + fyv[t] * dt
            else:
                vy = vy * damping
            speed2 = vx * vx + vy * vy
            if speed2 > ms2:
                scale = max_speed / sqrt(speed2)
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
    return pos_a, vel_a
