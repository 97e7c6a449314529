"""Steepest-descent single-flip tabu search with aspiration."""

from __future__ import annotations

import time

import numpy as np

from ..qubo import QuboProblem, energy
from .exact import binary_value
from .report import SolveReport


def default_tenure(n: int) -> int:
    return max(1, min(20, n // 4))


def tabu_walk(q: QuboProblem, x0, tenure: int, max_iters: int, deadline: float | None = None):
    """One tabu trajectory from ``x0``; returns (best_x, best_energy, iterations)."""
    J = q.coupling
    x = np.asarray(x0, dtype=float).copy()
    if q.n_vars == 0:
        return x.astype(np.int8), q.offset, 0
    h = q.linear + J @ x
    cur = energy(q, x)
    best_x, best_e = x.copy(), cur
    tabu_until = np.zeros(q.n_vars, dtype=np.int64)
    it = 0
    for it in range(1, max_iters + 1):
        delta = (1.0 - 2.0 * x) * h
        allowed = (tabu_until < it) | (cur + delta < best_e)
        if not allowed.any():
            # everything tabu and nothing aspirates: let the oldest move go
            allowed = tabu_until == tabu_until.min()
        masked = np.where(allowed, delta, np.inf)
        i = int(np.argmin(masked))
        step = 1.0 - 2.0 * x[i]
        x[i] += step
        h += step * J[i]
        cur += masked[i]
        tabu_until[i] = it + tenure
        if cur < best_e - 1e-12:
            best_e = cur
            best_x = x.copy()
        if deadline is not None and (it & 63) == 0 and time.perf_counter() > deadline:
            break
    return best_x.astype(np.int8), energy(q, best_x), it


def tabu_search(q: QuboProblem, tenure: int | None = None, max_iters: int | None = None,
                seed: int = 0, restarts: int = 1, initial=None,
                time_budget: float | None = None) -> SolveReport:
    """Best of ``restarts`` tabu walks from random (or given) starting states."""
    n = q.n_vars
    tenure = default_tenure(n) if tenure is None else tenure
    if tenure < 1:
        raise ValueError("tenure must be at least 1")
    max_iters = 50 * max(n, 1) if max_iters is None else max_iters
    t0 = time.perf_counter()
    deadline = None if time_budget is None else t0 + time_budget
    rng = np.random.default_rng(seed)
    best_x, best_e, total = None, np.inf, 0
    trace = []
    for r in range(restarts):
        if initial is not None and r == 0:
            x0 = np.asarray(initial)
        else:
            x0 = rng.integers(0, 2, size=n)
        x, e, it = tabu_walk(q, x0, tenure, max_iters, deadline)
        total += it
        if e < best_e or (e == best_e and binary_value(x) < binary_value(best_x)):
            best_x, best_e = x, e
            trace.append((time.perf_counter() - t0, float(e)))
        if deadline is not None and time.perf_counter() > deadline:
            break
    return SolveReport.finalize(q, best_x, time.perf_counter() - t0, total, "tabu", seed, trace)
