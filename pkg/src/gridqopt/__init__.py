"""QUBO formulations and classical solvers for smart-grid optimization.

Submodules
----------
qubo     sparse QUBO container, penalties and integer encodings
solvers  brute force, simulated annealing, tabu, QSA and the divisive driver
qaoa     depth-1 QAOA statevector simulation
grid     grid networks, DC power flow and simple-path enumeration
dsp      CO2-aware discount scheduling
srcd     self-reliant community detection
csg      coalition structure generation
p2p      power-flow-aware peer-to-peer trade matching
bench    seeded benchmark harness behind the ``gridqopt`` command
"""

from __future__ import annotations

from . import csg, dsp, grid, p2p, qaoa, qubo, solvers, srcd
from .qubo import QuboProblem, energy
from .solvers import SolveReport, brute_force, qsa, simulated_annealing, tabu_search

__version__ = "0.1.0"

__all__ = [
    "QuboProblem",
    "SolveReport",
    "brute_force",
    "csg",
    "dsp",
    "energy",
    "grid",
    "p2p",
    "qaoa",
    "qsa",
    "qubo",
    "simulated_annealing",
    "solvers",
    "srcd",
    "tabu_search",
]
