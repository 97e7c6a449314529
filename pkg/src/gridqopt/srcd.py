"""Self-reliant community detection on flow-weighted grid graphs.

Communities maximize ``modularity - self_reliance`` where the self-reliance
term ``(lam / P) * sum_l (sum_{i in l} p_i)**2`` punishes net power imbalance
inside a community and ``P = (sum_i |p_i|)**2``.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .grid import GridNetwork, flow_adjacency
from .qubo import QuboProblem
from .solvers.divisive import divisive_driver
from .solvers.report import SolveReport

DEFAULT_LAMBDA = 0.1


@dataclass(frozen=True, eq=False)
class SrcdInstance:
    A: np.ndarray
    p: np.ndarray
    K: int = 2
    lam: float = DEFAULT_LAMBDA
    network: GridNetwork | None = None

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        p = np.asarray(self.p, dtype=float)
        if A.shape != (p.size, p.size):
            raise ValueError("adjacency must be N x N for N node powers")
        if not np.allclose(A, A.T) or (A < 0).any() or np.any(np.diag(A) != 0):
            raise ValueError("adjacency must be symmetric, nonnegative, zero diagonal")
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "p", p)

    @classmethod
    def from_network(cls, net: GridNetwork, K: int = 2, lam: float = DEFAULT_LAMBDA) -> "SrcdInstance":
        return cls(flow_adjacency(net), net.p, K, lam, net)

    @property
    def n(self) -> int:
        return self.p.size

    @property
    def k(self) -> np.ndarray:
        return self.A.sum(axis=1)

    @property
    def m(self) -> float:
        return 0.5 * float(self.A.sum())

    @property
    def norm(self) -> float:
        s = float(np.abs(self.p).sum())
        return s * s if s > 0 else 1.0

    @property
    def B(self) -> np.ndarray:
        """Modularity matrix ``A - k k^T / 2m`` (zero when the graph has no weight)."""
        m = self.m
        if m == 0:
            return np.zeros_like(self.A)
        k = self.k
        return self.A - np.outer(k, k) / (2 * m)

    def with_k(self, K: int) -> "SrcdInstance":
        return SrcdInstance(self.A, self.p, K, self.lam, self.network)


@dataclass(frozen=True, eq=False)
class CommunityAssignment:
    labels: np.ndarray
    modularity: float
    self_reliance: float

    @property
    def n_communities(self) -> int:
        return int(np.unique(self.labels).size)

    @property
    def objective(self) -> float:
        """Combined score to maximize."""
        return self.modularity - self.self_reliance

    def blocks(self) -> list[list[int]]:
        return [list(np.flatnonzero(self.labels == c)) for c in np.unique(self.labels)]

    def to_dict(self) -> dict:
        return {
            "assignment": [int(c) for c in self.labels],
            "modularity": self.modularity,
            "self_reliance": self.self_reliance,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def canonical_labels(labels) -> np.ndarray:
    """Relabel communities 0, 1, ... in order of first appearance."""
    seen: dict = {}
    return np.array([seen.setdefault(c, len(seen)) for c in np.asarray(labels).tolist()], dtype=np.int64)


def modularity(inst: SrcdInstance, labels) -> float:
    m = inst.m
    if m == 0:
        return 0.0
    lab = np.asarray(labels)
    same = lab[:, None] == lab[None, :]
    return float((inst.B * same).sum() / (2 * m))


def self_reliance(inst: SrcdInstance, labels) -> float:
    lab = canonical_labels(labels)
    sums = np.bincount(lab, weights=inst.p)
    return float(inst.lam / inst.norm * np.sum(sums**2))


def assignment(inst: SrcdInstance, labels) -> CommunityAssignment:
    lab = canonical_labels(labels)
    return CommunityAssignment(lab, modularity(inst, lab), self_reliance(inst, lab))


def assignment_from_blocks(inst: SrcdInstance, blocks: Sequence[Sequence[int]]) -> CommunityAssignment:
    lab = np.empty(inst.n, dtype=np.int64)
    for c, blk in enumerate(blocks):
        lab[list(blk)] = c
    return assignment(inst, lab)


# ---------------------------------------------------------------------------
# QUBO forms


def objective_qubo(inst: SrcdInstance) -> QuboProblem:
    """``-modularity + self_reliance`` over one-hot variables ``x[i*K + l]`` (no constraint)."""
    N, K = inst.n, inst.K
    m = inst.m
    B = inst.B
    M = np.zeros((N * K, N * K))
    pen = inst.lam / inst.norm
    C = pen * np.outer(inst.p, inst.p)
    if m > 0:
        C = C - B / (2 * m)
    idx = np.arange(N) * K
    for ell in range(K):
        M[np.ix_(idx + ell, idx + ell)] = C
    return QuboProblem.from_dense(M)


def onehot_bound(q: QuboProblem) -> float:
    """Upper bound on ``|energy|`` over all states of ``q`` (offset excluded)."""
    return float(np.abs(q.linear).sum() + np.abs(q.vals).sum())


def build_onehot_qubo(inst: SrcdInstance, onehot_weight: float | None = None) -> QuboProblem:
    """Full single-problem QUBO with ``N*K`` variables.

    The default one-hot weight is twice the objective's coefficient bound,
    which makes every infeasible state worse than every feasible one.
    """
    if inst.K < 2:
        raise ValueError("K must be at least 2")
    obj = objective_qubo(inst)
    if onehot_weight is None:
        onehot_weight = 2.0 * onehot_bound(obj) or 1.0
    N, K = inst.n, inst.K
    lin = obj.linear - onehot_weight
    r, c = np.triu_indices(K, 1)
    base = (np.arange(N) * K)[:, None]
    rows = np.concatenate([obj.rows, (base + r).ravel()])
    cols = np.concatenate([obj.cols, (base + c).ravel()])
    vals = np.concatenate([obj.vals, np.full(N * r.size, 2.0 * onehot_weight)])
    labels = [f"n{i}_c{ell}" for i in range(N) for ell in range(K)]
    return QuboProblem.from_arrays(N * K, lin, rows, cols, vals, obj.offset + onehot_weight * N, labels)


def decode_onehot(inst: SrcdInstance, x) -> np.ndarray | None:
    """Community labels, or ``None`` when some node is not in exactly one community."""
    X = np.asarray(x).reshape(inst.n, inst.K)
    if not np.all(X.sum(axis=1) == 1):
        return None
    return X.argmax(axis=1)


def encode_onehot(inst: SrcdInstance, labels) -> np.ndarray:
    X = np.zeros((inst.n, inst.K), dtype=np.int8)
    X[np.arange(inst.n), np.asarray(labels)] = 1
    return X.ravel()


def bipartition_qubo_builder(inst: SrcdInstance) -> Callable[[Sequence[int]], QuboProblem]:
    """Builder for the divisive driver: energy = -(gain of splitting ``S``)."""
    B = inst.B
    m = inst.m
    pen = inst.lam / inst.norm

    def build(S: Sequence[int]) -> QuboProblem:
        S = np.asarray(S, dtype=np.int64)
        p = inst.p[S]
        Bs = B[np.ix_(S, S)] / m if m > 0 else np.zeros((S.size, S.size))
        np.fill_diagonal(Bs, 0.0)
        # cut: sum_{i<j} Bs_ij (x_i + x_j - 2 x_i x_j)
        lin = Bs.sum(axis=1)
        M = -np.triu(Bs, 1) * 2.0
        # self-reliance change -2 pen P0 P1 with P1 = p.x, P0 = P_S - P1
        lin = lin - 2.0 * pen * p.sum() * p + 2.0 * pen * p**2
        M = M + np.triu(4.0 * pen * np.outer(p, p), 1)
        return QuboProblem.from_dense(M, lin)

    return build


def divisive(inst: SrcdInstance, subsolver: Callable[[QuboProblem], SolveReport],
             history: list | None = None) -> CommunityAssignment:
    blocks = divisive_driver(bipartition_qubo_builder(inst), list(range(inst.n)), subsolver,
                             history=history)
    return assignment_from_blocks(inst, blocks)


# ---------------------------------------------------------------------------
# Louvain baseline


def _local_moving(A, p, m, pen, rng, tol, max_passes=100):
    n = A.shape[0]
    k = A.sum(axis=1)
    comm = np.arange(n)
    tot = k.copy()
    psum = p.copy().astype(float)
    moved_any = False
    for _ in range(max_passes):
        moved = False
        for i in rng.permutation(n):
            a = comm[i]
            kin = np.bincount(comm, weights=A[i], minlength=n)
            kin[a] -= A[i, i]
            tot[a] -= k[i]
            psum[a] -= p[i]
            cand = np.unique(np.concatenate([comm[np.flatnonzero(A[i])], [a]]))
            gain = (kin[cand] - k[i] * tot[cand] / (2 * m)) / m - 2.0 * pen * p[i] * psum[cand]
            j = int(np.argmax(gain))
            a_gain = gain[np.searchsorted(cand, a)]
            best = cand[j] if gain[j] > a_gain + tol else a
            tot[best] += k[i]
            psum[best] += p[i]
            if best != a:
                comm[i] = best
                moved = True
                moved_any = True
        if not moved:
            break
    return canonical_labels(comm), moved_any


def louvain(inst: SrcdInstance, seed: int = 0, use_self_reliance: bool = False,
            tol: float = 1e-12) -> CommunityAssignment:
    """Two-phase Louvain (local moves, then aggregation) on the flow adjacency.

    With ``use_self_reliance`` the local-move gain also includes the change of
    the self-reliance penalty; by default only modularity is optimized.
    """
    n = inst.n
    m = inst.m
    if n == 0:
        return CommunityAssignment(np.zeros(0, dtype=np.int64), 0.0, 0.0)
    if m == 0:
        return assignment(inst, np.arange(n))
    pen = inst.lam / inst.norm if use_self_reliance else 0.0
    rng = np.random.default_rng(seed)
    A, p = inst.A.copy(), inst.p.copy()
    labels = np.arange(n)
    while True:
        comm, moved = _local_moving(A, p, m, pen, rng, tol)
        if not moved:
            break
        labels = comm[labels]
        nc = comm.max() + 1
        S = np.zeros((A.shape[0], nc))
        S[np.arange(A.shape[0]), comm] = 1.0
        A = S.T @ A @ S
        p = S.T @ p
        if nc == 1:
            break
    return assignment(inst, labels)


def estimate_k(inst: SrcdInstance, trials: int = 5, seed: int = 0) -> int:
    """Median (lower) community count over Louvain runs with distinct seeds."""
    counts = [louvain(inst, seed + t).n_communities for t in range(trials)]
    return int(statistics.median_low(counts))


def random_instance(n: int, rng: np.random.Generator, kind: str = "mesh", K: int | None = None,
                    lam: float = DEFAULT_LAMBDA) -> SrcdInstance:
    from .grid import random_network

    net = random_network(n, rng, kind).with_flows()
    inst = SrcdInstance.from_network(net, 2, lam)
    return inst if K is None else inst.with_k(K)
