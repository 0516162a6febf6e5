"""Box-constrained Nelder–Mead simplex minimisation with configurable coefficients."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class SimplexResult:
    x: np.ndarray
    fun: float
    iterations: int
    evaluations: int
    converged: bool


def nelder_mead(
    f: Callable[[np.ndarray], float],
    x0,
    step,
    bounds=None,
    reflection: float = 1.0,
    expansion: float = 2.0,
    contraction: float = 0.5,
    shrink: float = 0.5,
    tol: float = 1e-8,
    max_iter: int = 2000,
) -> SimplexResult:
    """Minimise ``f`` starting from the simplex ``x0, x0 + step_i e_i``.

    Every trial point is clipped into ``bounds`` (a ``(lo, hi)`` pair of
    arrays) before evaluation, so ``f`` is only ever called inside the box.
    The run is converged once both the spread of function values and the
    largest vertex distance from the best vertex (max norm) are ``<= tol``.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    n = x0.size
    step = np.broadcast_to(np.asarray(step, dtype=float), (n,))
    if bounds is None:
        lo, hi = np.full(n, -np.inf), np.full(n, np.inf)
    else:
        lo, hi = (np.broadcast_to(np.asarray(b, dtype=float), (n,)) for b in bounds)
    if not (0 < reflection and expansion > 1 and 0 < contraction < 1 and 0 < shrink < 1):
        raise ValueError("need reflection > 0, expansion > 1, 0 < contraction < 1, 0 < shrink < 1")

    evaluations = 0

    def evaluate(x):
        nonlocal evaluations
        evaluations += 1
        return float(f(x))

    x0 = np.clip(x0, lo, hi)
    sim = np.empty((n + 1, n))
    sim[0] = x0
    for i in range(n):
        v = x0.copy()
        v[i] += step[i]
        if v[i] > hi[i]:  # step back into the box instead of collapsing onto a face
            v[i] = x0[i] - step[i]
        sim[i + 1] = np.clip(v, lo, hi)
    fs = np.array([evaluate(v) for v in sim])

    iterations = 0
    converged = False
    while True:
        order = np.argsort(fs, kind="stable")
        sim, fs = sim[order], fs[order]
        if np.max(np.abs(fs - fs[0])) <= tol and np.max(np.abs(sim - sim[0])) <= tol:
            converged = True
            break
        if iterations >= max_iter:
            break
        iterations += 1

        centroid = sim[:-1].mean(axis=0)
        xr = np.clip(centroid + reflection * (centroid - sim[-1]), lo, hi)
        fr = evaluate(xr)
        if fr < fs[0]:
            xe = np.clip(centroid + expansion * (xr - centroid), lo, hi)
            fe = evaluate(xe)
            sim[-1], fs[-1] = (xe, fe) if fe < fr else (xr, fr)
            continue
        if fr < fs[-2]:
            sim[-1], fs[-1] = xr, fr
            continue
        if fr < fs[-1]:
            xc = np.clip(centroid + contraction * (xr - centroid), lo, hi)
            fc = evaluate(xc)
            if fc <= fr:
                sim[-1], fs[-1] = xc, fc
                continue
        else:
            xc = np.clip(centroid + contraction * (sim[-1] - centroid), lo, hi)
            fc = evaluate(xc)
            if fc < fs[-1]:
                sim[-1], fs[-1] = xc, fc
                continue
        sim[1:] = sim[0] + shrink * (sim[1:] - sim[0])
        fs[1:] = [evaluate(v) for v in sim[1:]]

    return SimplexResult(sim[0].copy(), float(fs[0]), iterations, evaluations, converged)
