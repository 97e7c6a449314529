"""
A small scaling benchmark
=========================

The harness behind ``gridqopt bench``: seeded instances, several solvers,
repeated runs, and a median table per size.  Brute force time grows with the
state count while annealing grows slowly.  Quality is relative to the best
objective any solver found; Louvain is free to use more than two communities,
so it can beat the two-community brute-force optimum.
"""

from gridqopt.bench import BenchmarkPlan, SolverSpec, determinism_hash, run_benchmark, scaling_report

plan = BenchmarkPlan(
    use_case="srcd",
    sizes=(4, 6, 8, 10),
    solvers=(SolverSpec("brute_force"), SolverSpec("sa", {"n_reads": 200}), SolverSpec("louvain")),
    instances=3,
    repetitions=2,
    master_seed=42,
)
rows = run_benchmark(plan)
print(f"{len(rows)} runs, determinism hash {determinism_hash(rows)[:16]}\n")

print(f"{'solver':18s} {'size':>4s} {'median time':>12s} {'median quality':>15s}")
for r in scaling_report(rows):
    print(f"{r['solver']:18s} {r['size']:4d} {r['median_wall_time_s']:12.5f} "
          f"{r['median_relative_quality']:15.3f}")
