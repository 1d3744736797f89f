"""Nelder-Mead simplex search on the non-negative orthant."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np


class OptimizerError(RuntimeError):
    pass


@dataclass(frozen=True)
class NmOptions:
    step_floor: float = 10.0  # initial simplex step is max(step_floor, step_frac * |x0_i|)
    step_frac: float = 0.25
    reflection: float = 1.0
    expansion: float = 2.0
    contraction: float = 0.5
    shrink: float = 0.5
    max_evals: Optional[int] = None  # default: 200 * dimension
    fatol: float = 1e-2
    xatol: float = 1e-2

    def __post_init__(self):
        if not self.reflection > 0:
            raise ValueError("reflection coefficient must be > 0")
        if not self.expansion > max(1.0, self.reflection):
            raise ValueError("expansion coefficient must exceed 1 and the reflection")
        if not 0 < self.contraction < 1 or not 0 < self.shrink < 1:
            raise ValueError("contraction and shrink coefficients must lie in (0, 1)")


@dataclass(frozen=True)
class NmResult:
    x: np.ndarray
    fun: float
    evaluations: int
    iterations: int
    converged: bool
    best_history: tuple


def nelder_mead(
    f: Callable[[np.ndarray], float],
    x0: Sequence[float],
    opts: NmOptions = NmOptions(),
) -> NmResult:
    """Minimise ``f`` over x >= 0.

    Candidate points are clamped at zero before evaluation. Stops once both
    the objective spread and the largest vertex distance from the best
    vertex fall below ``fatol`` and ``xatol``, or when the evaluation budget
    runs out.
    """
    x0 = np.maximum(np.asarray(x0, dtype=float).ravel(), 0.0)
    n = x0.size
    if n < 1:
        raise OptimizerError("need at least one dimension")
    max_evals = opts.max_evals if opts.max_evals is not None else 200 * n
    if max_evals < n + 1:
        raise OptimizerError(f"max_evals must be >= {n + 1}")

    evals = 0

    def call(x):
        nonlocal evals
        x = np.maximum(x, 0.0)
        val = float(f(x))
        evals += 1
        if math.isnan(val):
            raise OptimizerError(f"objective returned NaN at x={x.tolist()}")
        return x, val

    simplex = [call(x0)]
    for i in range(n):
        x = x0.copy()
        x[i] += max(opts.step_floor, opts.step_frac * abs(x0[i]))
        simplex.append(call(x))

    history = []
    iterations = 0
    converged = False
    while True:
        simplex.sort(key=lambda v: v[1])
        history.append(simplex[0][1])
        best_x, best_f = simplex[0]
        f_spread = simplex[-1][1] - best_f
        x_spread = max(np.max(np.abs(v[0] - best_x)) for v in simplex[1:])
        if f_spread <= opts.fatol and x_spread <= opts.xatol:
            converged = True
            break
        if evals >= max_evals:
            break
        iterations += 1

        centroid = np.mean([v[0] for v in simplex[:-1]], axis=0)
        worst_x, worst_f = simplex[-1]
        xr, fr = call(centroid + opts.reflection * (centroid - worst_x))
        if fr < best_f:
            xe, fe = call(centroid + opts.expansion * (xr - centroid))
            simplex[-1] = (xe, fe) if fe < fr else (xr, fr)
            continue
        if fr < simplex[-2][1]:
            simplex[-1] = (xr, fr)
            continue
        if fr < worst_f:
            xc, fc = call(centroid + opts.contraction * (xr - centroid))
            if fc <= fr:
                simplex[-1] = (xc, fc)
                continue
        else:
            xc, fc = call(centroid + opts.contraction * (worst_x - centroid))
            if fc < worst_f:
                simplex[-1] = (xc, fc)
                continue
        simplex = [simplex[0]] + [
            call(best_x + opts.shrink * (v[0] - best_x)) for v in simplex[1:]
        ]

    best_x, best_f = min(simplex, key=lambda v: v[1])
    return NmResult(
        x=best_x,
        fun=best_f,
        evaluations=evals,
        iterations=iterations,
        converged=converged,
        best_history=tuple(history),
    )
