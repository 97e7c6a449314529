"""QUBO solvers and generic drivers shared by every use case."""

from .anneal import SaSchedule, simulated_annealing
from .decompose import qsa
from .divisive import divisive_driver
from .exact import MAX_BRUTE_FORCE_VARS, all_bitstrings, all_energies, brute_force
from .report import SolveReport
from .tabu import tabu_search

__all__ = [
    "SaSchedule",
    "SolveReport",
    "MAX_BRUTE_FORCE_VARS",
    "all_bitstrings",
    "all_energies",
    "brute_force",
    "simulated_annealing",
    "tabu_search",
    "qsa",
    "divisive_driver",
]
