from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..qubo import QuboProblem, energy


@dataclass
class SolveReport:
    best_x: np.ndarray
    best_energy: float
    wall_time: float
    iterations: int
    solver_name: str
    seed: int | None = None
    trace: list[tuple[float, float]] = field(default_factory=list)

    @classmethod
    def finalize(cls, q: QuboProblem, x, wall_time, iterations, solver_name, seed=None, trace=None):
        """Build a report whose energy is re-evaluated from ``x``."""
        x = np.asarray(x, dtype=np.int8).copy()
        return cls(x, energy(q, x), float(wall_time), int(iterations), solver_name, seed, trace or [])

    def to_dict(self) -> dict:
        return {
            "solver": self.solver_name,
            "seed": self.seed,
            "energy": self.best_energy,
            "x": [int(b) for b in self.best_x],
            "wall_time_s": self.wall_time,
            "iterations": self.iterations,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def same_result(self, other: "SolveReport") -> bool:
        """Equality ignoring wall time and trace timestamps."""
        return (
            np.array_equal(self.best_x, other.best_x)
            and self.best_energy == other.best_energy
            and self.iterations == other.iterations
            and self.solver_name == other.solver_name
            and self.seed == other.seed
            and [e for _, e in self.trace] == [e for _, e in other.trace]
        )
