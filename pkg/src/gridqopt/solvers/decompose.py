"""QBsolv-style decomposition: tabu on the full problem, SA on clamped blocks."""

from __future__ import annotations

import time

import numpy as np

from ..qubo import QuboProblem, energy
from .anneal import SaSchedule, anneal_states, pick_best
from .report import SolveReport
from .tabu import default_tenure, tabu_walk

SUB_SCHEDULE = SaSchedule(n_sweeps=100, n_reads=200)


def impact_ranking(q: QuboProblem, x) -> np.ndarray:
    """Variables ordered by |local field| at ``x``, largest first (stable in index)."""
    h = q.linear + q.coupling @ np.asarray(x, dtype=float)
    return np.argsort(-np.abs(h), kind="stable")


def qsa(q: QuboProblem, subproblem_size: int | None = None, seed: int = 0,
        sub_schedule: SaSchedule = SUB_SCHEDULE, tenure: int | None = None,
        tabu_iters: int | None = None, max_passes: int = 50,
        time_budget: float | None = None) -> SolveReport:
    """Decomposition loop until one full pass brings no improvement.

    Each pass ranks variables by impact, cuts the ranking into consecutive
    windows of ``subproblem_size``, anneals each window with the rest clamped
    and keeps the result when it lowers the energy; accepted moves are
    polished with a tabu walk on the full problem.
    """
    n = q.n_vars
    if subproblem_size is None:
        subproblem_size = min(n, 16)
    if not 1 <= subproblem_size <= max(n, 1):
        raise ValueError("subproblem_size must be in 1..n_vars")
    t0 = time.perf_counter()
    deadline = None if time_budget is None else t0 + time_budget
    rng = np.random.default_rng(seed)
    tenure = default_tenure(n) if tenure is None else tenure
    tabu_iters = 50 * max(n, 1) if tabu_iters is None else tabu_iters

    x, e, iters = tabu_walk(q, rng.integers(0, 2, size=n), tenure, tabu_iters, deadline)
    trace = [(time.perf_counter() - t0, float(e))]
    for _ in range(max_passes):
        improved = False
        order = impact_ranking(q, x)
        for start in range(0, n, subproblem_size):
            window = np.sort(order[start:start + subproblem_size])
            sub = q.subproblem(window, x)
            X, E, sweeps = anneal_states(sub, sub_schedule, rng, deadline=deadline)
            iters += sweeps * sub_schedule.n_reads
            cand = x.copy()
            cand[window] = X[pick_best(X, E)]
            ce = energy(q, cand)
            if ce < e - 1e-12:
                x, e = cand, ce
                px, pe, it = tabu_walk(q, x, tenure, tabu_iters, deadline)
                iters += it
                if pe < e:
                    x, e = px, pe
                improved = True
                trace.append((time.perf_counter() - t0, float(e)))
            if deadline is not None and time.perf_counter() > deadline:
                break
        if not improved or (deadline is not None and time.perf_counter() > deadline):
            break
    return SolveReport.finalize(q, x, time.perf_counter() - t0, iters, "qsa", seed, trace)
