"""Benchmark plans, result rows, aggregation and export."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

from ..grid import TOPOLOGIES
from .usecases import USE_CASES, generate, solve, solvers_for

CSV_COLUMNS = (
    "use_case", "case", "size", "instance", "instance_seed", "solver", "rep", "seed",
    "objective", "relative_quality", "wall_time_s", "verified",
    "co2_reduction", "modularity", "self_reliance", "value_isg", "value_true", "mismatch",
)
METRIC_COLUMNS = CSV_COLUMNS[CSV_COLUMNS.index("co2_reduction"):]
SCALING_COLUMNS = ("use_case", "solver", "size", "runs", "median_wall_time_s", "median_relative_quality")
THREADS_ENV = "GRIDQOPT_THREADS"


def derive_seed(*parts: Any) -> int:
    """Counter-style seed: a stable 32-bit hash of the JSON encoding of ``parts``."""
    digest = hashlib.sha256(json.dumps(parts, sort_keys=True).encode()).digest()
    return int.from_bytes(digest[:4], "little")


@dataclass(frozen=True)
class SolverSpec:
    name: str
    params: dict = field(default_factory=dict)

    @property
    def label(self) -> str:
        if not self.params:
            return self.name
        inner = ",".join(f"{k}={self.params[k]}" for k in sorted(self.params))
        return f"{self.name}[{inner}]"


@dataclass(frozen=True)
class BenchmarkPlan:
    use_case: str
    sizes: tuple[int, ...]
    solvers: tuple[SolverSpec, ...]
    instances: int = 1
    repetitions: int = 1
    time_budget_s: float | None = None
    master_seed: int = 0
    topology: str = "mesh"
    output_dir: str | None = None

    def __post_init__(self):
        if self.use_case not in USE_CASES:
            raise ValueError(f"unknown use case {self.use_case!r}")
        if self.repetitions < 1 or self.instances < 0:
            raise ValueError("repetitions must be >= 1 and instances >= 0")
        if self.topology not in TOPOLOGIES:
            raise ValueError(f"unknown topology {self.topology!r}")
        known = solvers_for(self.use_case)
        for s in self.solvers:
            if s.name not in known:
                raise ValueError(f"solver {s.name!r} is not registered for {self.use_case}")

    @classmethod
    def from_dict(cls, data: dict) -> "BenchmarkPlan":
        solvers = tuple(
            SolverSpec(s) if isinstance(s, str) else SolverSpec(s["name"], dict(s.get("params", {})))
            for s in data.get("solvers", [])
        )
        return cls(
            data["use_case"], tuple(int(n) for n in data.get("sizes", [])), solvers,
            int(data.get("instances", 1)), int(data.get("repetitions", 1)),
            data.get("time_budget_s"), int(data.get("master_seed", 0)),
            data.get("topology", "mesh"), data.get("output_dir"),
        )

    @classmethod
    def from_json(cls, text: str) -> "BenchmarkPlan":
        return cls.from_dict(json.loads(text))


@dataclass
class ResultRow:
    use_case: str
    case: str
    size: int
    instance: int
    instance_seed: int
    solver: str
    rep: int
    seed: int
    objective: float
    relative_quality: float
    wall_time_s: float
    verified: bool
    metrics: dict[str, float] = field(default_factory=dict)

    def flat(self) -> dict:
        d = asdict(self)
        metrics = d.pop("metrics")
        for k in METRIC_COLUMNS:
            d[k] = metrics.get(k)
        return d

    @property
    def sort_key(self):
        return (self.use_case, self.size, self.instance, self.solver, self.rep)


def relative_quality(objective: float, best: float) -> float:
    """Energy normalized by the best-found energy of the same instance, clamped to [0, 1].

    ``best / objective`` for positive energies and ``objective / best`` for
    negative ones; a sign change against the best gives 0.
    """
    if objective == best:
        return 1.0
    if best > 0:
        ratio = best / objective
    elif best < 0:
        ratio = objective / best
    else:
        ratio = 0.0
    return min(1.0, max(0.0, ratio))


def _fill_quality(rows: list[ResultRow]) -> None:
    best: dict = {}
    for r in rows:
        key = (r.use_case, r.case, r.instance)
        best[key] = min(best.get(key, r.objective), r.objective)
    for r in rows:
        r.relative_quality = relative_quality(r.objective, best[(r.use_case, r.case, r.instance)])


def worker_count() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return max(1, min(4, os.cpu_count() or 1))


def run_benchmark(plan: BenchmarkPlan, out_dir: str | os.PathLike | None = None,
                  workers: int | None = None) -> list[ResultRow]:
    """Run every (size, instance, solver, rep) of ``plan``; write CSV and JSON if ``out_dir``."""
    jobs = []
    for size in plan.sizes:
        case = f"{plan.use_case}-{plan.topology}-{size}"
        for idx in range(plan.instances):
            iseed = derive_seed(plan.master_seed, plan.use_case, size, idx)
            inst = generate(plan.use_case, size, iseed, plan.topology)
            for spec in plan.solvers:
                for rep in range(plan.repetitions):
                    rseed = derive_seed(plan.master_seed, plan.use_case, size, idx, spec.label, rep)
                    jobs.append((case, size, idx, iseed, inst, spec, rep, rseed))

    def run(job) -> ResultRow:
        case, size, idx, iseed, inst, spec, rep, rseed = job
        t0 = time.perf_counter()
        out = solve(plan.use_case, inst, spec.name, spec.params, rseed, plan.time_budget_s)
        wall = time.perf_counter() - t0
        return ResultRow(plan.use_case, case, size, idx, iseed, spec.label, rep, rseed,
                         float(out.objective), 1.0, wall, bool(out.verified), out.metrics)

    n_workers = workers or worker_count()
    if n_workers == 1 or len(jobs) <= 1:
        rows = [run(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            rows = list(pool.map(run, jobs))
    _fill_quality(rows)
    rows.sort(key=lambda r: r.sort_key)
    target = out_dir if out_dir is not None else plan.output_dir
    if target is not None:
        write_results(rows, target)
    return rows


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows: Iterable[ResultRow], exclude: Sequence[str] = ()) -> str:
    cols = [c for c in CSV_COLUMNS if c not in exclude]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        d = r.flat()
        w.writerow([_fmt(d[c]) for c in cols])
    return buf.getvalue()


def write_results(rows: Sequence[ResultRow], out_dir) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path, json_path = out / "results.csv", out / "results.json"
    csv_path.write_text(rows_to_csv(rows), encoding="utf-8", newline="\n")
    json_path.write_text(json.dumps([r.flat() for r in rows], indent=1) + "\n", encoding="utf-8",
                         newline="\n")
    return csv_path, json_path


def determinism_hash(rows: Iterable[ResultRow]) -> str:
    """SHA-256 of the results CSV without the wall-time column."""
    return hashlib.sha256(rows_to_csv(rows, exclude=("wall_time_s",)).encode()).hexdigest()


def read_rows(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def scaling_report(rows: Iterable) -> list[dict]:
    """Median wall time and relative quality per (use case, solver, size)."""
    groups: dict = {}
    for r in rows:
        d = r.flat() if isinstance(r, ResultRow) else r
        key = (d["use_case"], d["solver"], int(d["size"]))
        groups.setdefault(key, []).append((float(d["wall_time_s"]), float(d["relative_quality"])))
    out = []
    for key in sorted(groups):
        vals = groups[key]
        out.append({
            "use_case": key[0], "solver": key[1], "size": key[2], "runs": len(vals),
            "median_wall_time_s": statistics.median(v[0] for v in vals),
            "median_relative_quality": statistics.median(v[1] for v in vals),
        })
    return out


def scaling_csv(table: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCALING_COLUMNS)
    for row in table:
        w.writerow([_fmt(row[c]) for c in SCALING_COLUMNS])
    return buf.getvalue()
