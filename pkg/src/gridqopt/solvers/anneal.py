"""Single-flip Metropolis simulated annealing, vectorized across reads."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..qubo import QuboProblem
from .exact import binary_value
from .report import SolveReport


@dataclass(frozen=True)
class SaSchedule:
    """Geometric inverse-temperature schedule.

    ``beta_start`` and ``beta_end`` are given in units of the problem's largest
    absolute coefficient, so the same schedule works at any problem scale.
    """

    n_sweeps: int = 100
    n_reads: int = 1000
    beta_start: float = 0.1
    beta_end: float = 10.0

    def __post_init__(self):
        if not self.beta_end > self.beta_start > 0:
            raise ValueError("need beta_end > beta_start > 0")
        if self.n_reads < 1 or self.n_sweeps < 1:
            raise ValueError("n_reads and n_sweeps must be positive")

    def betas(self, scale: float = 1.0) -> np.ndarray:
        if self.n_sweeps == 1:
            return np.array([self.beta_end / scale])
        return np.geomspace(self.beta_start, self.beta_end, self.n_sweeps) / scale


def neighbor_lists(q: QuboProblem):
    J = q.coupling
    nbrs = [np.flatnonzero(J[i]) for i in range(q.n_vars)]
    return nbrs, [J[i, nb] for i, nb in enumerate(nbrs)]


def anneal_states(q: QuboProblem, sched: SaSchedule, rng: np.random.Generator,
                  initial=None, deadline: float | None = None):
    """Run ``sched.n_reads`` chains; return (best states, best energies, sweeps done).

    ``initial`` optionally fixes the starting state of every read.
    """
    n, R = q.n_vars, sched.n_reads
    nbrs, wts = neighbor_lists(q)
    if initial is None:
        X = rng.integers(0, 2, size=(R, n)).astype(float)
    else:
        X = np.tile(np.asarray(initial, dtype=float), (R, 1))
    cur = q.energies(X)
    best_X, best_E = X.copy(), cur.copy()
    scale = q.max_abs_coefficient or 1.0
    lin = q.linear
    done = 0
    for beta in sched.betas(scale):
        order = rng.permutation(n)
        for i in order:
            nb = nbrs[i]
            h = lin[i] + (X[:, nb] @ wts[i] if nb.size else 0.0)
            xi = X[:, i]
            dE = (1.0 - 2.0 * xi) * h
            u = rng.random(R)
            accept = (dE <= 0) | (u < np.exp(-beta * np.clip(dE, 0, None)))
            X[accept, i] = 1.0 - xi[accept]
            cur += np.where(accept, dE, 0.0)
        done += 1
        better = cur < best_E
        if better.any():
            best_E[better] = cur[better]
            best_X[better] = X[better]
        if deadline is not None and time.perf_counter() > deadline:
            break
    # re-evaluate exactly; incremental sums drift by rounding
    best_E = q.energies(best_X)
    return best_X.astype(np.int8), best_E, done


def pick_best(X: np.ndarray, E: np.ndarray) -> int:
    """Index of the lowest energy, ties to the row with the lowest binary value."""
    m = E.min()
    cand = np.flatnonzero(E == m)
    if cand.size == 1:
        return int(cand[0])
    return int(min(cand, key=lambda c: binary_value(X[c])))


def simulated_annealing(q: QuboProblem, sched: SaSchedule | None = None, seed: int = 0,
                        time_budget: float | None = None, initial=None) -> SolveReport:
    sched = sched or SaSchedule()
    if q.n_vars < 1:
        raise ValueError("simulated annealing needs at least one variable")
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    deadline = None if time_budget is None else t0 + time_budget
    X, E, sweeps = anneal_states(q, sched, rng, initial=initial, deadline=deadline)
    k = pick_best(X, E)
    wall = time.perf_counter() - t0
    return SolveReport.finalize(q, X[k], wall, sweeps * sched.n_reads, "sa", seed,
                                [(wall, float(E[k]))])
