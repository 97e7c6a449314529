"""Per-use-case instance generation, loading, solving and verification.

Every use case reports a scalar ``objective`` to minimize:

* dsp: QUBO energy of the discount schedule,
* srcd: one-hot QUBO energy, or ``self_reliance - modularity`` for graph heuristics,
* csg: negative true coalition value of the structure,
* p2p: QUBO energy (mismatch plus matching penalty); the baseline reports its mismatch.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .. import csg, dsp, p2p, srcd
from ..grid import TOPOLOGIES, GridNetwork, random_network
from ..qubo import energy
from .registry import QUBO_SOLVERS, qubo_solver

USE_CASES = ("dsp", "srcd", "csg", "p2p")
DSP_TIMESTEPS = 4
DSP_CATEGORIES = 3


@dataclass
class Outcome:
    objective: float
    verified: bool
    metrics: dict[str, float] = field(default_factory=dict)
    solution: Any = None


def _close(a: float, b: float, tol: float = 1e-8) -> bool:
    return bool(abs(a - b) <= tol * (1.0 + abs(a) + abs(b)))


# ---------------------------------------------------------------------------
# generation and IO


def generate(use_case: str, size: int, seed: int, topology: str = "mesh"):
    """Deterministic instance for ``(use_case, size, seed)``."""
    if topology not in TOPOLOGIES:
        raise ValueError(f"unknown topology {topology!r}")
    rng = np.random.default_rng(seed)
    if use_case == "dsp":
        return dsp.random_instance(size, DSP_TIMESTEPS, rng, n_categories=DSP_CATEGORIES)
    if use_case == "srcd":
        net = random_network(size, rng, topology).with_flows()
        return srcd.SrcdInstance.from_network(net, K=2)
    if use_case == "csg":
        return csg.random_game(size, rng)
    if use_case == "p2p":
        return p2p.random_auction(size, rng, topology)
    raise ValueError(f"unknown use case {use_case!r}")


def instance_to_dict(use_case: str, inst) -> dict:
    if use_case == "srcd":
        return {"network": inst.network.to_dict(), "K": inst.K, "lam": inst.lam}
    return inst.to_dict()


def dumps_instance(use_case: str, inst) -> str:
    return json.dumps(instance_to_dict(use_case, inst), indent=1) + "\n"


def load_instance(use_case: str, data: dict):
    if use_case == "dsp":
        return dsp.DspInstance.from_dict(data)
    if use_case == "srcd":
        net = GridNetwork.from_dict(data["network"])
        if net.flows is None:
            net = net.with_flows()
        return srcd.SrcdInstance.from_network(net, int(data.get("K", 2)),
                                              float(data.get("lam", srcd.DEFAULT_LAMBDA)))
    if use_case == "csg":
        return csg.CoalitionGame.from_dict(data)
    if use_case == "p2p":
        return p2p.AuctionInstance.from_dict(data)
    raise ValueError(f"unknown use case {use_case!r}")


# ---------------------------------------------------------------------------
# solving


def _split_sub(params: dict, default: str) -> tuple[str, dict]:
    params = dict(params)
    name = params.pop("subsolver", default)
    return name, params


def _solve_dsp(inst: dsp.DspInstance, solver: str, params: dict, seed: int, budget) -> Outcome:
    if solver == "decomp":
        params = dict(params)
        split = int(params.pop("split_size", 1))
        sub, rest = _split_sub(params, "brute_force")
        sched, report = dsp.decompose_solve(inst, split, qubo_solver(sub, seed, budget, **rest))
    else:
        report = qubo_solver(solver, seed, budget, **params)(dsp.build_dsp_qubo(inst))
        sched = dsp.DiscountSchedule.from_bits(inst, report.best_x)
    terms = dsp.energy_terms(inst, sched.z)
    return Outcome(report.best_energy, _close(terms["energy"], report.best_energy),
                   {"co2_reduction": dsp.co2_reduction(inst, sched.z)},
                   {"schedule": sched.z.tolist()})


def _solve_srcd(inst: srcd.SrcdInstance, solver: str, params: dict, seed: int, budget) -> Outcome:
    q = srcd.build_onehot_qubo(inst)
    if solver in ("louvain", "divisive"):
        if solver == "louvain":
            res = srcd.louvain(inst, seed=seed, **params)
        else:
            sub, rest = _split_sub(params, "brute_force")
            res = srcd.divisive(inst, qubo_solver(sub, seed, budget, **rest))
        obj = -res.objective
        if res.n_communities <= inst.K:
            ok = _close(energy(q, srcd.encode_onehot(inst, res.labels)), obj)
        else:
            ok = _close(srcd.self_reliance(inst, res.labels) - srcd.modularity(inst, res.labels), obj)
    else:
        report = qubo_solver(solver, seed, budget, **params)(q)
        obj = report.best_energy
        labels = srcd.decode_onehot(inst, report.best_x)
        if labels is None:
            return Outcome(obj, _close(energy(q, report.best_x), obj), {},
                           {"x": report.best_x.tolist()})
        res = srcd.assignment(inst, labels)
        ok = _close(-res.objective, obj)
    return Outcome(obj, ok, {"modularity": res.modularity, "self_reliance": res.self_reliance},
                   res.to_dict())


def _solve_csg(game: csg.CoalitionGame, solver: str, params: dict, seed: int, budget) -> Outcome:
    if solver == "dp":
        st = csg.exact_partition_optimum(game)
        st = csg.CoalitionStructure(st.blocks, st.total_value, None, st.total_value)
    elif solver == "gcsq":
        params = dict(params)
        sample = params.pop("sample_size", None)
        sub, rest = _split_sub(params, "qaoa")
        isg = csg.fit_isg(game, sample, seed)
        st = csg.gcsq_solve(isg, qubo_solver(sub, seed, budget, **rest), game)
    else:
        raise KeyError(f"unknown csg solver {solver!r}")
    recomputed = sum(game.value(b) for b in st.blocks)
    ok = st.is_partition(game.n) and _close(recomputed, st.value_true)
    metrics = {"value_true": st.value_true}
    if st.value_isg is not None:
        metrics["value_isg"] = st.value_isg
    return Outcome(-st.value_true, ok, metrics, st.to_dict())


def _p2p_penalty(inst: p2p.AuctionInstance, weight: float, x) -> float:
    X = np.asarray(x).reshape(len(inst.producers), len(inst.consumers))
    rows, cols = X.sum(axis=1), X.sum(axis=0)
    pairs = float((rows * (rows - 1) // 2).sum() + (cols * (cols - 1) // 2).sum())
    excluded = float(X.ravel()[~inst.viable].sum())
    return weight * pairs + max(weight, 1.0) * excluded


def _solve_p2p(inst: p2p.AuctionInstance, solver: str, params: dict, seed: int, budget) -> Outcome:
    if solver == "non_pf":
        m = p2p.non_pf_baseline(inst)
        obj = m.mismatch
        ok = m.is_matching
    else:
        params = dict(params)
        weight = params.pop("matching_penalty", None)
        if weight is None:
            weight = p2p.default_matching_penalty(inst)
        q = p2p.build_p2p_qubo(inst, weight)
        report = qubo_solver(solver, seed, budget, **params)(q)
        m = p2p.evaluate_matching(inst, report.best_x)
        obj = report.best_energy
        ok = _close(m.mismatch + _p2p_penalty(inst, float(weight), report.best_x), obj)
    return Outcome(obj, ok, {"mismatch": m.mismatch},
                   [{"producer": s, "consumer": b, "quantity_kw": inst.quantity(s, b)} for s, b in m.pairs()])


_SOLVE: dict[str, Callable[..., Outcome]] = {
    "dsp": _solve_dsp, "srcd": _solve_srcd, "csg": _solve_csg, "p2p": _solve_p2p,
}

EXTRA_SOLVERS = {
    "dsp": ("decomp",),
    "srcd": ("louvain", "divisive"),
    "csg": ("dp", "gcsq"),
    "p2p": ("non_pf",),
}


def solvers_for(use_case: str) -> tuple[str, ...]:
    base = () if use_case == "csg" else tuple(QUBO_SOLVERS)
    return base + EXTRA_SOLVERS[use_case]


def solve(use_case: str, inst, solver: str, params: dict | None = None, seed: int = 0,
          time_budget: float | None = None) -> Outcome:
    if use_case not in _SOLVE:
        raise ValueError(f"unknown use case {use_case!r}")
    if solver not in solvers_for(use_case):
        raise KeyError(f"solver {solver!r} not available for {use_case}")
    return _SOLVE[use_case](inst, solver, dict(params or {}), seed, time_budget)
