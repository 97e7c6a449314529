from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gridqopt.qubo import QuboProblem

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_qubo(n: int, rng: np.random.Generator, density: float = 1.0, scale: float = 1.0,
                offset: float = 0.0) -> QuboProblem:
    """Gaussian coefficients; each pair kept with probability ``density``."""
    lin = rng.normal(0, scale, n)
    M = np.triu(rng.normal(0, scale, (n, n)), 1)
    M *= rng.random((n, n)) < density
    return QuboProblem.from_dense(M, lin, offset)


def naive_energy(q: QuboProblem, x) -> float:
    e = q.offset
    for i in range(q.n_vars):
        e += q.linear[i] * x[i]
    quad = q.quadratic
    for i in range(q.n_vars):
        for j in range(i + 1, q.n_vars):
            e += quad.get((i, j), 0.0) * x[i] * x[j]
    return e


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: dict[int, str] = {}


def record(criterion: int, ok: bool, detail: str) -> bool:
    """Log one acceptance verdict; the terminal summary prints them in order."""
    line = f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[criterion] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
