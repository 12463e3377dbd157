"""Shared setup for the kernel implementations.

Both the compiled and the pure-Python kernels consume the matrices built
here, so the two backends start from bit-identical inputs.
"""

from __future__ import annotations

import numpy as np


def arma_state_setup(phi: np.ndarray, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Build the state-space pieces for an ARMA(p,q) innovations filter.

    Uses the companion ("Harvey") form with state dimension m = max(p, q+1):
    transition has ``phi`` down the first column and an identity superdiagonal,
    the disturbance loading is ``(1, theta_1..theta_q, 0..)``, and the
    observation picks the first state element.

    Returns ``(phi_full, rr, p0)`` where ``phi_full`` is phi zero-padded to
    length m, ``rr`` is the disturbance covariance R R' (unit innovation
    variance), and ``p0`` is the exact stationary state covariance solved from
    the discrete Lyapunov equation ``P = T P T' + R R'``.
    """
    phi = np.asarray(phi, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    p, q = len(phi), len(theta)
    m = max(p, q + 1)

    phi_full = np.zeros(m)
    phi_full[:p] = phi
    r = np.zeros(m)
    r[0] = 1.0
    r[1 : q + 1] = theta
    rr = np.outer(r, r)

    t_mat = np.zeros((m, m))
    t_mat[:, 0] = phi_full
    t_mat[: m - 1, 1:] += np.eye(m - 1)

    eye = np.eye(m * m)
    p0 = np.linalg.solve(eye - np.kron(t_mat, t_mat), rr.ravel()).reshape(m, m)
    # Symmetrize: the linear solve can leave ~1e-17 asymmetry that would let
    # the two backends drift apart once amplified through the recursion.
    p0 = (p0 + p0.T) / 2.0
    return phi_full, rr, p0
