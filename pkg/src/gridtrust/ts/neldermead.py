"""Derivative-free simplex minimizer with seeded multistart.

Small, deterministic Nelder-Mead: reflection/expansion/contraction/shrink
with the classic coefficients. Terminates when the simplex diameter falls
below ``diameter_tol`` or the evaluation budget is spent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass
class MinimizeResult:
    x: np.ndarray
    fx: float
    nfev: int
    converged: bool


def nelder_mead(
    f: Callable[[np.ndarray], float],
    x0: np.ndarray,
    step: float = 0.25,
    diameter_tol: float = 1e-8,
    max_evals: int = 10_000,
) -> MinimizeResult:
    x0 = np.asarray(x0, dtype=np.float64)
    dim = len(x0)
    if dim == 0:
        return MinimizeResult(x=x0, fx=f(x0), nfev=1, converged=True)

    simplex = [x0.copy()]
    for i in range(dim):
        v = x0.copy()
        v[i] += step
        simplex.append(v)
    values = [f(v) for v in simplex]
    nfev = dim + 1

    while nfev < max_evals:
        order = np.argsort(values, kind="stable")
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]
        diameter = max(np.max(np.abs(v - simplex[0])) for v in simplex[1:])
        if diameter < diameter_tol:
            return MinimizeResult(simplex[0], values[0], nfev, True)

        centroid = np.mean(simplex[:-1], axis=0)
        worst = simplex[-1]
        reflected = centroid + (centroid - worst)
        fr = f(reflected)
        nfev += 1
        if fr < values[0]:
            expanded = centroid + 2.0 * (centroid - worst)
            fe = f(expanded)
            nfev += 1
            if fe < fr:
                simplex[-1], values[-1] = expanded, fe
            else:
                simplex[-1], values[-1] = reflected, fr
        elif fr < values[-2]:
            simplex[-1], values[-1] = reflected, fr
        else:
            if fr < values[-1]:
                contracted = centroid + 0.5 * (reflected - centroid)
                fc = f(contracted)
                nfev += 1
                better = fc <= fr
            else:
                contracted = centroid + 0.5 * (worst - centroid)
                fc = f(contracted)
                nfev += 1
                better = fc < values[-1]
            if better:
                simplex[-1], values[-1] = contracted, fc
            else:
                best = simplex[0]
                for i in range(1, dim + 1):
                    simplex[i] = best + 0.5 * (simplex[i] - best)
                    values[i] = f(simplex[i])
                nfev += dim

    order = np.argsort(values, kind="stable")
    return MinimizeResult(simplex[order[0]], values[order[0]], nfev, False)


def multistart(
    f: Callable[[np.ndarray], float],
    dim: int,
    rng: np.random.Generator,
    restarts: int = 5,
    spread: float = 0.8,
    **kwargs,
) -> MinimizeResult:
    """Run nelder_mead from the origin plus seeded random starts; keep the best.

    The origin start maps to white noise under the partial-autocorrelation
    parameterization, which is a safe basin for short series.
    """
    if dim == 0:
        return nelder_mead(f, np.empty(0), **kwargs)
    best: MinimizeResult | None = None
    total_evals = 0
    for r in range(max(restarts, 1)):
        x0 = np.zeros(dim) if r == 0 else rng.uniform(-spread, spread, size=dim)
        res = nelder_mead(f, x0, **kwargs)
        total_evals += res.nfev
        if best is None or res.fx < best.fx or (res.fx == best.fx and res.converged and not best.converged):
            best = res
    assert best is not None
    best.nfev = total_evals
    return best
