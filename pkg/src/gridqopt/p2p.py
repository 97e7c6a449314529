"""Power-flow-aware peer-to-peer trade matching.

A trade between producer ``s`` and consumer ``b`` moves ``min(Q_s, Q_b)``
along every simple path between them, split by current-divider shares.  The
matching QUBO minimizes the squared gap between the physical line flows and
the flows implied by the selected trades.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Mapping

import numpy as np

from .grid import GridError, GridNetwork, PathSet, dc_power_flow, enumerate_simple_paths, path_direction
from .qubo import QuboProblem

DEFAULT_MAX_PATHS = 200


@dataclass(frozen=True, eq=False)
class AuctionInstance:
    network: GridNetwork
    producers: Mapping[Hashable, float]
    consumers: Mapping[Hashable, float]
    max_paths: int = DEFAULT_MAX_PATHS
    max_len: int | None = None
    flows: object = field(init=False, repr=False)

    def __post_init__(self):
        known = set(self.network.ids)
        prod = {k: float(v) for k, v in dict(self.producers).items()}
        cons = {k: float(v) for k, v in dict(self.consumers).items()}
        if set(prod) & set(cons):
            raise ValueError("a participant cannot be both producer and consumer")
        for k, q in {**prod, **cons}.items():
            if k not in known:
                raise ValueError(f"participant {k!r} is not a network node")
            if not q > 0:
                raise ValueError(f"quantity of {k!r} must be positive")
        object.__setattr__(self, "producers", prod)
        object.__setattr__(self, "consumers", cons)
        object.__setattr__(self, "flows", self.network.flows or dc_power_flow(self.network))

    @property
    def seller_ids(self) -> list:
        return list(self.producers)

    @property
    def buyer_ids(self) -> list:
        return list(self.consumers)

    @property
    def n_pairs(self) -> int:
        return len(self.producers) * len(self.consumers)

    @property
    def n_lines(self) -> int:
        return len(self.network.lines)

    def pair_index(self, s, b) -> int:
        return self.seller_ids.index(s) * len(self.consumers) + self.buyer_ids.index(b)

    def pairs(self) -> list[tuple[Hashable, Hashable]]:
        return [(s, b) for s in self.producers for b in self.consumers]

    def quantity(self, s, b) -> float:
        return min(self.producers[s], self.consumers[b])

    @property
    def physical(self) -> np.ndarray:
        """Physical flow magnitude ``e`` per line."""
        return self.flows.magnitudes

    @cached_property
    def path_sets(self) -> dict:
        """Path set per pair, or ``None`` when no path exists within the caps."""
        out = {}
        for s, b in self.pairs():
            try:
                out[s, b] = enumerate_simple_paths(self.network, s, b, self.max_paths, self.max_len)
            except GridError:
                out[s, b] = None
        return out

    @cached_property
    def contributions(self) -> np.ndarray:
        """``C[line, pair]``: signed flow a single trade adds to each line."""
        C = np.zeros((self.n_lines, self.n_pairs))
        for k, (s, b) in enumerate(self.pairs()):
            C[:, k] = [trade_line_contribution(self, s, b, li) for li in range(self.n_lines)]
        return C

    @property
    def viable(self) -> np.ndarray:
        return np.array([self.path_sets[p] is not None for p in self.pairs()], dtype=bool)

    def to_dict(self) -> dict:
        net = self.network if self.network.flows is not None else self.network.with_flows(self.flows)
        return {
            "network": net.to_dict(),
            "producers": [{"id": k, "q": q} for k, q in self.producers.items()],
            "consumers": [{"id": k, "q": q} for k, q in self.consumers.items()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data, max_paths: int = DEFAULT_MAX_PATHS) -> "AuctionInstance":
        net = GridNetwork.from_dict(data["network"])
        prod = {d["id"]: float(d["q"]) for d in data["producers"]}
        cons = {d["id"]: float(d["q"]) for d in data["consumers"]}
        return cls(net, prod, cons, max_paths)

    @classmethod
    def from_json(cls, text: str, max_paths: int = DEFAULT_MAX_PATHS) -> "AuctionInstance":
        return cls.from_dict(json.loads(text), max_paths)


def trade_line_contribution(inst: AuctionInstance, s, b, line: int) -> float:
    """``min(Q_s, Q_b) * sum_t w(t) d_line(t)``; zero when the pair has no path."""
    ps: PathSet | None = inst.path_sets[s, b]
    if ps is None:
        return 0.0
    d = np.array([path_direction(path, line, inst.flows) for path in ps.paths], dtype=float)
    return inst.quantity(s, b) * float(ps.shares @ d)


def matching_penalty_bound(inst: AuctionInstance) -> float:
    """Weight above which dropping one partner always lowers the energy.

    Removing trade ``p`` changes the mismatch by at most
    ``sum_l 2 (e_l + C_l) |c_lp| + c_lp**2`` with ``C_l = sum_p |c_lp|``.
    """
    C = inst.contributions
    if C.size == 0:
        return 0.0
    reach = inst.physical + np.abs(C).sum(axis=1)
    per_pair = (2.0 * reach[:, None] * np.abs(C) + C**2).sum(axis=0)
    return float(per_pair.max())


def default_matching_penalty(inst: AuctionInstance) -> float:
    return matching_penalty_bound(inst) * (1 + 1e-6) + 1e-9


def build_p2p_qubo(inst: AuctionInstance, matching_penalty: float | None = None) -> QuboProblem:
    """Mismatch QUBO over ``x[s_idx * |B| + b_idx]``.

    ``matching_penalty=None`` picks a weight just above ``matching_penalty_bound``
    so every optimum is a matching; ``0`` gives the bare mismatch objective.
    Pairs without a path get a positive linear term pinning them to zero.
    """
    C = inst.contributions
    e = inst.physical
    n_s, n_b = len(inst.producers), len(inst.consumers)
    n = n_s * n_b
    if matching_penalty is None:
        matching_penalty = default_matching_penalty(inst)
    if matching_penalty < 0:
        raise ValueError("matching penalty must be nonnegative")
    M = C.T @ C
    lin = -2.0 * (e @ C)
    lin = lin + np.where(inst.viable, 0.0, max(matching_penalty, 1.0))
    if matching_penalty > 0:
        grid = np.arange(n).reshape(n_s, n_b)
        P = np.zeros((n, n))
        for group in list(grid) + list(grid.T):
            r, c = np.triu_indices(group.size, 1)
            P[group[r], group[c]] += matching_penalty
        M = M + P
    labels = [f"x_{s}_{b}" for s, b in inst.pairs()]
    return QuboProblem.from_dense(M, lin, float(e @ e), labels)


@dataclass(frozen=True, eq=False)
class TradeMatching:
    producers: tuple
    consumers: tuple
    x: np.ndarray
    mismatch: float
    logical: np.ndarray
    quantities: np.ndarray

    def pairs(self) -> list[tuple[Hashable, Hashable]]:
        si, bi = np.nonzero(self.x)
        return [(self.producers[i], self.consumers[j]) for i, j in zip(si, bi)]

    @property
    def is_matching(self) -> bool:
        return bool((self.x.sum(axis=0) <= 1).all() and (self.x.sum(axis=1) <= 1).all())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["producer", "consumer", "quantity_kw"])
        for i, j in zip(*np.nonzero(self.x)):
            w.writerow([self.producers[i], self.consumers[j], repr(float(self.quantities[i, j]))])
        return buf.getvalue()


def evaluate_matching(inst: AuctionInstance, x) -> TradeMatching:
    """Recompute logical flows path by path and the squared mismatch."""
    n_s, n_b = len(inst.producers), len(inst.consumers)
    X = np.asarray(x, dtype=np.int8).reshape(n_s, n_b)
    logical = np.zeros(inst.n_lines)
    Q = np.zeros((n_s, n_b))
    for i, s in enumerate(inst.producers):
        for j, b in enumerate(inst.consumers):
            Q[i, j] = inst.quantity(s, b)
            ps = inst.path_sets[s, b]
            if not X[i, j] or ps is None:
                continue
            for path, w in zip(ps.paths, ps.shares):
                for li, a, c in path:
                    src, _, _ = inst.flows.physical(li)
                    logical[li] += (1.0 if a == src else -1.0) * w * Q[i, j]
    gap = inst.physical - logical
    return TradeMatching(tuple(inst.producers), tuple(inst.consumers), X,
                         float(gap @ gap), logical, Q)


def non_pf_baseline(inst: AuctionInstance) -> TradeMatching:
    """Topology-blind greedy matching: largest ``min(Q_s, Q_b)`` first, ties by index."""
    order = sorted(
        ((-inst.quantity(s, b), k) for k, (s, b) in enumerate(inst.pairs()) if inst.viable[k]),
    )
    n_b = len(inst.consumers)
    x = np.zeros(inst.n_pairs, dtype=np.int8)
    used_s, used_b = set(), set()
    for _, k in order:
        i, j = divmod(k, n_b)
        if i in used_s or j in used_b:
            continue
        x[k] = 1
        used_s.add(i)
        used_b.add(j)
    return evaluate_matching(inst, x)


def penalty_part(inst: AuctionInstance, q: QuboProblem, x) -> float:
    """QUBO energy of ``x`` minus its mismatch."""
    from .qubo import energy

    return energy(q, x) - evaluate_matching(inst, x).mismatch


def random_auction(n: int, rng: np.random.Generator, kind: str = "mesh",
                   max_paths: int = DEFAULT_MAX_PATHS) -> AuctionInstance:
    """Half producers, half consumers; quantities are the absolute node powers."""
    from .grid import random_network

    net = random_network(n, rng, kind)
    net = net.with_flows()
    prod = {nd.id: abs(nd.p) for nd in net.nodes if nd.role == "producer"}
    cons = {nd.id: abs(nd.p) for nd in net.nodes if nd.role == "consumer"}
    return AuctionInstance(net, prod, cons, max_paths)
