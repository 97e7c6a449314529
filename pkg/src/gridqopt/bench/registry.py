"""Name -> QUBO solver handles with keyword parameters."""

from __future__ import annotations

from typing import Any, Callable

from ..qaoa import qaoa_solver
from ..qubo import QuboProblem
from ..solvers import SaSchedule, SolveReport, brute_force, qsa, simulated_annealing, tabu_search

_SA_KEYS = ("n_sweeps", "n_reads", "beta_start", "beta_end")


def _sa(q, seed, time_budget=None, **params):
    sched = SaSchedule(**{k: params.pop(k) for k in _SA_KEYS if k in params})
    _no_extra("sa", params)
    return simulated_annealing(q, sched, seed=seed, time_budget=time_budget)


def _tabu(q, seed, time_budget=None, **params):
    return tabu_search(q, seed=seed, time_budget=time_budget, **params)


def _qsa(q, seed, time_budget=None, **params):
    sub = {k: params.pop(k) for k in _SA_KEYS if k in params}
    if sub:
        params["sub_schedule"] = SaSchedule(**{"n_sweeps": 100, "n_reads": 200, **sub})
    return qsa(q, seed=seed, time_budget=time_budget, **params)


def _brute(q, seed, time_budget=None, **params):
    _no_extra("brute_force", params)
    report = brute_force(q)
    report.seed = seed
    return report


def _qaoa(q, seed, time_budget=None, **params):
    return qaoa_solver(q, seed=seed, **params)


def _no_extra(name, params):
    if params:
        raise TypeError(f"{name} got unknown parameters {sorted(params)}")


QUBO_SOLVERS: dict[str, Callable[..., SolveReport]] = {
    "brute_force": _brute,
    "sa": _sa,
    "tabu": _tabu,
    "qsa": _qsa,
    "qaoa": _qaoa,
}


def qubo_solver(name: str, seed: int = 0, time_budget: float | None = None,
                **params: Any) -> Callable[[QuboProblem], SolveReport]:
    """Bind a registered solver to a seed and parameters, as a one-argument handle."""
    if name not in QUBO_SOLVERS:
        raise KeyError(f"unknown QUBO solver {name!r}; known: {sorted(QUBO_SOLVERS)}")
    fn = QUBO_SOLVERS[name]
    return lambda q: fn(q, seed, time_budget, **dict(params))
