"""Discount scheduling: per-customer, per-timestep price incentives that shift load.

Discounts are integer-encoded in binary variables ``x[c, t, k]``.  The QUBO is

* the CO2 objective ``sum_{c,t} dI_t (1 - chi_c z_ct) d_ct`` scaled by
  ``1 / (max|dI| * max d)``,
* a per-customer conservation penalty ``w1 * (sum_t chi_c z_ct d_ct / max d)**2``,
* a per-timestep aggregate-change penalty
  ``w2 * (sum_c chi_c z_ct d_ct / (eps * sum_c d_ct))**2``.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .qubo import IntegerEncoding, QuboProblem, build_encoding, squared_penalty_arrays
from .solvers.report import SolveReport

MAX_VARIABLES = 2**20


@dataclass(frozen=True, eq=False)
class DspInstance:
    demand: np.ndarray
    intensity: np.ndarray
    elasticity: np.ndarray | None = None
    n_categories: int = 5
    z_max: float = 0.5
    w_conservation: float = 1.0
    w_aggregate: float = 1.0
    epsilon: float = 0.5

    def __post_init__(self):
        d = np.asarray(self.demand, dtype=float)
        I = np.asarray(self.intensity, dtype=float)
        if d.ndim != 2 or I.shape != (d.shape[1],):
            raise ValueError("demand must be (N_c, N_t) and intensity length N_t")
        if (d < 0).any():
            raise ValueError("demand must be nonnegative")
        if self.n_categories < 2 or self.z_max <= 0 or self.epsilon <= 0:
            raise ValueError("need n_categories >= 2, z_max > 0, epsilon > 0")
        chi = np.ones(d.shape[0]) if self.elasticity is None else np.asarray(self.elasticity, dtype=float)
        if chi.shape != (d.shape[0],):
            raise ValueError("one elasticity per customer")
        object.__setattr__(self, "demand", d)
        object.__setattr__(self, "intensity", I)
        object.__setattr__(self, "elasticity", chi)

    @property
    def n_customers(self) -> int:
        return self.demand.shape[0]

    @property
    def n_timesteps(self) -> int:
        return self.demand.shape[1]

    @property
    def delta_intensity(self) -> np.ndarray:
        return self.intensity - self.intensity.mean()

    @property
    def encoding(self) -> IntegerEncoding:
        return build_encoding(self.n_categories, -self.z_max, self.z_max)

    @property
    def n_vars(self) -> int:
        return self.n_customers * self.n_timesteps * self.encoding.n_bits

    @property
    def objective_scale(self) -> float:
        s = np.abs(self.delta_intensity).max(initial=0.0) * self.demand.max(initial=0.0)
        return 1.0 / s if s > 0 else 1.0

    def to_dict(self) -> dict:
        return {
            "demand": self.demand.tolist(),
            "intensity": self.intensity.tolist(),
            "elasticity": self.elasticity.tolist(),
            "n_categories": self.n_categories,
            "z_max": self.z_max,
            "weights": {"conservation": self.w_conservation, "aggregate": self.w_aggregate},
            "epsilon": self.epsilon,
        }

    @classmethod
    def from_dict(cls, data) -> "DspInstance":
        w = data.get("weights", {})
        return cls(
            np.array(data["demand"], dtype=float),
            np.array(data["intensity"], dtype=float),
            None if data.get("elasticity") is None else np.array(data["elasticity"], dtype=float),
            int(data.get("n_categories", 5)),
            float(data.get("z_max", 0.5)),
            float(w.get("conservation", 1.0)),
            float(w.get("aggregate", 1.0)),
            float(data.get("epsilon", 0.5)),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "DspInstance":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class DiscountSchedule:
    z: np.ndarray
    bits: np.ndarray | None = field(default=None)

    @classmethod
    def from_bits(cls, inst: DspInstance, x, customers: Sequence[int] | None = None) -> "DiscountSchedule":
        enc = inst.encoding
        n_c = inst.n_customers if customers is None else len(customers)
        bits = np.asarray(x, dtype=np.int8).reshape(n_c, inst.n_timesteps, enc.n_bits)
        z = enc.lo + enc.step * (bits @ np.asarray(enc.weights, dtype=float))
        return cls(z, bits)

    @classmethod
    def zeros(cls, inst: DspInstance) -> "DiscountSchedule":
        return cls(np.zeros((inst.n_customers, inst.n_timesteps)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["customer", "timestep", "discount"])
        for c in range(self.z.shape[0]):
            for t in range(self.z.shape[1]):
                w.writerow([c, t, repr(float(self.z[c, t]))])
        return buf.getvalue()


def _z_of(z) -> np.ndarray:
    return z.z if isinstance(z, DiscountSchedule) else np.asarray(z, dtype=float)


def _build(inst: DspInstance, customers: Sequence[int], fixed_shift: np.ndarray) -> QuboProblem:
    """QUBO over the listed customers; ``fixed_shift[t]`` adds already-fixed aggregate shift."""
    enc = inst.encoding
    Q, T = enc.n_bits, inst.n_timesteps
    customers = list(customers)
    n = len(customers) * T * Q
    if n > MAX_VARIABLES:
        raise ValueError(f"{n} variables exceeds the {MAX_VARIABLES} guard")
    w = np.asarray(enc.weights, dtype=float)
    dI = inst.delta_intensity
    scale = inst.objective_scale
    d = inst.demand[customers]
    a = inst.elasticity[customers, None] * d  # elastic load chi_c d_ct
    var = np.arange(n).reshape(len(customers), T, Q)
    # shift s_ct = a_ct * (lo + step * sum_k w_k x_ctk)
    coef = a[:, :, None] * enc.step * w[None, None, :]

    lin = (-scale * dI[None, :, None] * coef).ravel()
    offset = scale * float(np.sum(dI[None, :] * (d - a * enc.lo)))
    rows, cols, vals = [], [], []

    def add(terms_idx, terms_coef, constant, weight):
        nonlocal offset
        if weight == 0:
            return
        li, lv, r, c, v, off = squared_penalty_arrays(list(zip(terms_idx, terms_coef)), constant, weight)
        np.add.at(lin, li, lv)
        rows.append(r)
        cols.append(c)
        vals.append(v)
        offset += off

    d_max = inst.demand.max(initial=0.0) or 1.0
    for ci in range(len(customers)):
        add(var[ci].ravel(), (coef[ci] / d_max).ravel(), float(a[ci].sum() * enc.lo / d_max),
            inst.w_conservation)
    total_t = inst.demand.sum(axis=0)
    for t in range(T):
        if total_t[t] <= 0:
            continue
        norm = inst.epsilon * total_t[t]
        add(var[:, t, :].ravel(), (coef[:, t, :] / norm).ravel(),
            float((fixed_shift[t] + a[:, t].sum() * enc.lo) / norm), inst.w_aggregate)

    labels = [f"c{c}_t{t}_k{k}" for c in customers for t in range(T) for k in range(Q)]
    cat = (lambda parts: np.concatenate(parts) if parts else np.zeros(0))
    return QuboProblem.from_arrays(n, lin, cat(rows), cat(cols), cat(vals), offset, labels)


def build_dsp_qubo(inst: DspInstance) -> QuboProblem:
    return _build(inst, range(inst.n_customers), np.zeros(inst.n_timesteps))


def shift_matrix(inst: DspInstance, z) -> np.ndarray:
    """``chi_c z_ct d_ct``: the consumption removed by each discount."""
    return inst.elasticity[:, None] * _z_of(z) * inst.demand


def effective_consumption(inst: DspInstance, z) -> np.ndarray:
    return (1.0 - inst.elasticity[:, None] * _z_of(z)) * inst.demand


def co2_objective(inst: DspInstance, z) -> float:
    """Unscaled ``R(z)``."""
    return float(np.sum(inst.delta_intensity[None, :] * effective_consumption(inst, z)))


def co2_reduction(inst: DspInstance, z) -> float:
    """``R(0) - R(z)``; positive means lower emissions."""
    return float(np.sum(inst.delta_intensity[None, :] * shift_matrix(inst, z)))


def energy_terms(inst: DspInstance, z) -> dict[str, float]:
    """Objective and penalty parts of the QUBO energy, straight from ``z``."""
    s = shift_matrix(inst, z)
    d_max = inst.demand.max(initial=0.0) or 1.0
    total_t = inst.demand.sum(axis=0)
    pos = total_t > 0
    cons = float(np.sum((s.sum(axis=1) / d_max) ** 2))
    agg = float(np.sum((s.sum(axis=0)[pos] / (inst.epsilon * total_t[pos])) ** 2))
    obj = inst.objective_scale * co2_objective(inst, z)
    return {
        "objective": obj,
        "conservation": cons,
        "aggregate": agg,
        "energy": obj + inst.w_conservation * cons + inst.w_aggregate * agg,
    }


def relative_savings(inst: DspInstance, z) -> np.ndarray:
    """Fraction of spend each customer saves at unit price."""
    zz = _z_of(z)
    tot = inst.demand.sum(axis=1)
    spend = -(zz * inst.demand).sum(axis=1)
    return np.divide(spend, tot, out=np.zeros_like(spend), where=tot > 0)


def savings_cdf(savings) -> tuple[np.ndarray, np.ndarray]:
    """Sorted savings and cumulative customer fraction, ready to plot."""
    s = np.sort(np.asarray(savings, dtype=float))
    return s, np.arange(1, s.size + 1) / max(s.size, 1)


def decompose_solve(inst: DspInstance, split_size: int,
                    subsolver: Callable[[QuboProblem], SolveReport]) -> tuple[DiscountSchedule, SolveReport]:
    """Solve customer chunks one after another, largest consumers first.

    Each chunk's aggregate penalty includes the shift already committed by the
    previous chunks, so coupling between chunks is handled greedily.
    """
    if not 1 <= split_size <= inst.n_customers:
        raise ValueError("split size must be in 1..N_c")
    t0 = time.perf_counter()
    totals = inst.demand.sum(axis=1)
    order = sorted(range(inst.n_customers), key=lambda c: (-totals[c], c))
    enc = inst.encoding
    bits = np.zeros((inst.n_customers, inst.n_timesteps, enc.n_bits), dtype=np.int8)
    fixed = np.zeros(inst.n_timesteps)
    iterations = 0
    name = None
    for start in range(0, inst.n_customers, split_size):
        chunk = sorted(order[start:start + split_size])
        report = subsolver(_build(inst, chunk, fixed))
        iterations += report.iterations
        name = report.solver_name
        sched = DiscountSchedule.from_bits(inst, report.best_x, chunk)
        bits[chunk] = sched.bits
        fixed = fixed + shift_matrix_subset(inst, sched.z, chunk).sum(axis=0)
    full = build_dsp_qubo(inst)
    x = bits.ravel()
    schedule = DiscountSchedule.from_bits(inst, x)
    report = SolveReport.finalize(full, x, time.perf_counter() - t0, iterations,
                                  f"decomp-{name}-{split_size}")
    return schedule, report


def shift_matrix_subset(inst: DspInstance, z_rows: np.ndarray, customers: Sequence[int]) -> np.ndarray:
    return inst.elasticity[customers, None] * z_rows * inst.demand[customers]


def random_instance(n_customers: int, n_timesteps: int, rng: np.random.Generator, **kw) -> DspInstance:
    """Smooth-ish demand profiles and a daily-shaped CO2 intensity curve."""
    phase = rng.uniform(0, 2 * np.pi)
    t = np.arange(n_timesteps)
    intensity = 300 + 100 * np.sin(2 * np.pi * t / max(n_timesteps, 1) + phase) + rng.normal(0, 20, n_timesteps)
    base = rng.uniform(0.5, 2.0, size=(n_customers, 1))
    demand = np.clip(base * (1 + 0.3 * rng.normal(size=(n_customers, n_timesteps))), 0.05, None)
    return DspInstance(demand, intensity, **kw)
