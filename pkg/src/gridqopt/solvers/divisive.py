"""Greedy recursive bipartitioning on top of any QUBO solver."""

from __future__ import annotations

from typing import Callable, Hashable, Sequence

from ..qubo import QuboProblem
from .report import SolveReport

BipartitionObjectiveBuilder = Callable[[Sequence[Hashable]], QuboProblem]
Subsolver = Callable[[QuboProblem], SolveReport]


def divisive_driver(objective: BipartitionObjectiveBuilder, nodes: Sequence[Hashable],
                    subsolver: Subsolver, tol: float = 1e-12,
                    history: list | None = None) -> list[list]:
    """Split ``nodes`` recursively while a bipartition strictly improves the objective.

    ``objective(S)`` must return a QUBO over ``len(S)`` bits whose energy is
    the negated gain of putting the ``x == 1`` members of ``S`` in a new
    block, so ``x = 0`` scores exactly zero.  A split is accepted when its
    energy is below ``-tol`` and both sides are nonempty.  Accepted splits are
    appended to ``history`` as ``(S, side0, side1, energy)`` when given.
    """
    nodes = list(nodes)
    if not nodes:
        return []
    final: list[list] = []
    stack = [nodes]
    while stack:
        S = stack.pop()
        if len(S) < 2:
            final.append(S)
            continue
        report = subsolver(objective(S))
        x = report.best_x
        side0 = [v for v, b in zip(S, x) if not b]
        side1 = [v for v, b in zip(S, x) if b]
        if side0 and side1 and report.best_energy < -tol:
            if history is not None:
                history.append((S, side0, side1, report.best_energy))
            # side0 processed first
            stack.append(side1)
            stack.append(side0)
        else:
            final.append(S)
    return final
