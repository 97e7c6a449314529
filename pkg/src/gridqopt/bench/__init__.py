"""Instance generation and benchmark orchestration across the four use cases."""

from .registry import QUBO_SOLVERS, qubo_solver
from .runner import (
    CSV_COLUMNS,
    SCALING_COLUMNS,
    BenchmarkPlan,
    ResultRow,
    SolverSpec,
    derive_seed,
    read_rows,
    determinism_hash,
    relative_quality,
    rows_to_csv,
    run_benchmark,
    scaling_csv,
    scaling_report,
    write_results,
)
from .usecases import USE_CASES, Outcome, dumps_instance, generate, load_instance, solve, solvers_for

__all__ = [
    "QUBO_SOLVERS", "qubo_solver", "CSV_COLUMNS", "SCALING_COLUMNS", "BenchmarkPlan", "ResultRow",
    "SolverSpec", "derive_seed", "read_rows", "determinism_hash", "relative_quality", "rows_to_csv",
    "run_benchmark", "scaling_csv", "scaling_report", "write_results", "USE_CASES", "Outcome",
    "dumps_instance", "generate", "load_instance", "solve", "solvers_for",
]
