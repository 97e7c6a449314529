"""Coalition structure generation for prosumer communities.

Coalitions are bitmasks (bit ``i`` set means prosumer ``i`` is a member).
Exact solutions come from the subset dynamic program; the approximate route
fits an induced subgraph game (pairwise weights) to the characteristic
function and splits coalitions with bipartition QUBOs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .qubo import QuboProblem
from .solvers.divisive import divisive_driver
from .solvers.report import SolveReport

MAX_DP_PLAYERS = 15
FULL_FIT_LIMIT = 16


def mask_of(members: Iterable[int]) -> int:
    m = 0
    for i in members:
        m |= 1 << int(i)
    return m


def members_of(mask: int) -> list[int]:
    out, i = [], 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def _mask_bits(n: int, masks: np.ndarray) -> np.ndarray:
    return ((masks[:, None] >> np.arange(n)) & 1).astype(float)


def balancing_value(profiles: np.ndarray, members: Sequence[int]) -> float:
    """Internal balancing benefit ``sum_t (sum |p_it| - |sum p_it|)`` over members."""
    P = np.asarray(profiles, dtype=float)[list(members)]
    if P.size == 0:
        return 0.0
    return float(np.sum(np.abs(P).sum(axis=0) - np.abs(P.sum(axis=0))))


VALUE_FUNCTIONS: dict[str, Callable[[np.ndarray, Sequence[int]], float]] = {
    "balancing": balancing_value,
}


@dataclass(frozen=True, eq=False)
class CoalitionGame:
    profiles: np.ndarray
    value_fn: str = "balancing"

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.profiles, dtype=float))
        object.__setattr__(self, "profiles", P)
        if self.value_fn not in VALUE_FUNCTIONS:
            raise ValueError(f"unknown value function {self.value_fn!r}")

    @property
    def n(self) -> int:
        return self.profiles.shape[0]

    def value(self, members: Iterable[int]) -> float:
        return VALUE_FUNCTIONS[self.value_fn](self.profiles, list(members))

    def values_for(self, masks: np.ndarray) -> np.ndarray:
        """Vectorized characteristic function over an array of bitmasks."""
        masks = np.asarray(masks, dtype=np.int64)
        if self.value_fn == "balancing":
            bits = _mask_bits(self.n, masks)
            return (bits @ np.abs(self.profiles)).sum(axis=1) - np.abs(bits @ self.profiles).sum(axis=1)
        return np.array([self.value(members_of(int(m))) for m in masks])

    def values(self) -> np.ndarray:
        """``v[mask]`` for every mask in ``0 .. 2**n - 1``."""
        return self.values_for(np.arange(1 << self.n, dtype=np.int64))

    def to_dict(self) -> dict:
        return {"profiles": self.profiles.tolist(), "value_fn": self.value_fn}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data) -> "CoalitionGame":
        return cls(np.array(data["profiles"], dtype=float), data.get("value_fn", "balancing"))


@dataclass(frozen=True, eq=False)
class IsgGame:
    """Pairwise-weight game: ``v(C) = sum_{i<j in C} W_ij``."""

    W: np.ndarray
    residual: float = 0.0
    regularized: bool = False

    def __post_init__(self):
        W = np.asarray(self.W, dtype=float)
        if W.shape[0] != W.shape[1] or not np.allclose(W, W.T) or np.any(np.diag(W) != 0):
            raise ValueError("ISG weights must be symmetric with zero diagonal")
        object.__setattr__(self, "W", W)

    @property
    def n(self) -> int:
        return self.W.shape[0]

    def value(self, members: Iterable[int]) -> float:
        idx = np.asarray(list(members), dtype=np.int64)
        return float(0.5 * self.W[np.ix_(idx, idx)].sum())

    def values_for(self, masks: np.ndarray) -> np.ndarray:
        bits = _mask_bits(self.n, np.asarray(masks, dtype=np.int64))
        return 0.5 * np.einsum("ij,ij->i", bits @ self.W, bits)

    def values(self) -> np.ndarray:
        return self.values_for(np.arange(1 << self.n, dtype=np.int64))

    def pair_weights(self) -> np.ndarray:
        return self.W[np.triu_indices(self.n, 1)]


@dataclass(frozen=True)
class CoalitionStructure:
    blocks: tuple[tuple[int, ...], ...]
    total_value: float
    value_isg: float | None = None
    value_true: float | None = None

    @classmethod
    def of(cls, blocks: Iterable[Iterable[int]], game, isg: IsgGame | None = None,
           true_game: CoalitionGame | None = None) -> "CoalitionStructure":
        blocks = tuple(sorted(tuple(sorted(int(i) for i in b)) for b in blocks))
        total = float(sum(game.value(b) for b in blocks))
        v_isg = None if isg is None else float(sum(isg.value(b) for b in blocks))
        v_true = None if true_game is None else float(sum(true_game.value(b) for b in blocks))
        return cls(blocks, total, v_isg, v_true)

    def is_partition(self, n: int) -> bool:
        flat = [i for b in self.blocks for i in b]
        return all(self.blocks) and sorted(flat) == list(range(n))

    def to_dict(self) -> dict:
        return {
            "blocks": [list(b) for b in self.blocks],
            "value_isg": self.value_isg,
            "value_true": self.value_true,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


# ---------------------------------------------------------------------------
# exact solvers


def exact_partition_optimum(game) -> CoalitionStructure:
    """Subset dynamic program in O(3^n).

    ``best[S] = max over T subset of S containing min(S) of v[T] + best[S \\ T]``;
    anchoring ``T`` on the lowest member visits every partition exactly once.
    """
    n = game.n
    if n > MAX_DP_PLAYERS:
        raise ValueError(f"dynamic program limited to {MAX_DP_PLAYERS} players")
    v = game.values().tolist()
    full = (1 << n) - 1
    best = [0.0] * (full + 1)
    choice = [0] * (full + 1)
    for S in range(1, full + 1):
        low = S & -S
        rest = S ^ low
        b, c = -np.inf, S
        T = rest
        while True:
            sub = T | low
            val = v[sub] + best[S ^ sub]
            if val > b:
                b, c = val, sub
            if T == 0:
                break
            T = (T - 1) & rest
        best[S] = b
        choice[S] = c
    blocks, S = [], full
    while S:
        blocks.append(members_of(choice[S]))
        S ^= choice[S]
    return CoalitionStructure.of(blocks, game)


def iter_partitions(n: int) -> Iterator[list[list[int]]]:
    """Every set partition of ``range(n)`` via restricted growth strings."""
    if n == 0:
        yield []
        return
    a = [0] * n

    def rec(i, mx):
        if i == n:
            blocks = [[] for _ in range(mx + 1)]
            for j, c in enumerate(a):
                blocks[c].append(j)
            yield blocks
            return
        for c in range(mx + 2):
            a[i] = c
            yield from rec(i + 1, max(mx, c))

    a[0] = 0
    yield from rec(1, 0)


def enumeration_optimum(game) -> CoalitionStructure:
    """Best structure by scanning all Bell(n) partitions (oracle, n <= 10)."""
    v = game.values()
    best, best_blocks = -np.inf, None
    for blocks in iter_partitions(game.n):
        val = sum(v[mask_of(b)] for b in blocks)
        if val > best:
            best, best_blocks = val, blocks
    return CoalitionStructure.of(best_blocks, game)


# ---------------------------------------------------------------------------
# ISG approximation


def pair_features(n: int, masks: np.ndarray) -> np.ndarray:
    """Indicator of ``{i, j} subset of C`` for each pair ``i < j`` (rows = coalitions)."""
    bits = _mask_bits(n, masks)
    iu, ju = np.triu_indices(n, 1)
    return bits[:, iu] * bits[:, ju]


def fit_isg(game: CoalitionGame, sample_size: int | None = None, seed: int = 0) -> IsgGame:
    """Least-squares pairwise weights via the normal equations.

    Uses every nonempty coalition up to ``FULL_FIT_LIMIT`` players and a uniform
    sample (default ``50 n^2``) beyond.  A singular system falls back to a small
    ridge term and marks the result ``regularized``.
    """
    n = game.n
    if n < 2:
        raise ValueError("need at least two players")
    if n <= FULL_FIT_LIMIT:
        masks = np.arange(1, 1 << n, dtype=np.int64)
    else:
        rng = np.random.default_rng(seed)
        size = sample_size or 50 * n * n
        masks = rng.integers(1, 1 << n, size=size, dtype=np.int64)
    X = pair_features(n, masks)
    y = game.values_for(masks)
    G = X.T @ X
    rhs = X.T @ y
    regularized = False
    try:
        if np.linalg.cond(G) > 1e12:
            raise np.linalg.LinAlgError("ill-conditioned normal matrix")
        w = np.linalg.solve(G, rhs)
    except np.linalg.LinAlgError:
        regularized = True
        ridge = 1e-8 * max(np.trace(G) / G.shape[0], 1.0)
        w = np.linalg.solve(G + ridge * np.eye(G.shape[0]), rhs)
    resid = float(np.sqrt(np.mean((X @ w - y) ** 2)))
    W = np.zeros((n, n))
    iu, ju = np.triu_indices(n, 1)
    W[iu, ju] = w
    W[ju, iu] = w
    return IsgGame(W, resid, regularized)


def bipartition_value_qubo(isg: IsgGame, members: Sequence[int]) -> QuboProblem:
    """``sum_{i != j in C} W_ij x_i (1 - x_j)``: the weight cut by the split."""
    idx = np.asarray(list(members), dtype=np.int64)
    Ws = isg.W[np.ix_(idx, idx)]
    return QuboProblem.from_dense(-np.triu(Ws, 1) * 2.0, Ws.sum(axis=1))


def gcsq_solve(isg: IsgGame, subsolver: Callable[[QuboProblem], SolveReport],
               true_game: CoalitionGame | None = None,
               history: list | None = None) -> CoalitionStructure:
    """Split from the grand coalition while some bipartition raises the ISG value."""
    blocks = divisive_driver(lambda S: bipartition_value_qubo(isg, S), list(range(isg.n)),
                             subsolver, history=history)
    return CoalitionStructure.of(blocks, isg, isg, true_game)


def quality_ratio(found: CoalitionStructure, optimal: CoalitionStructure, tol: float = 1e-12) -> float:
    """``found / optimal`` total value; 1 when both vanish, 0 when only the optimum does."""
    if abs(optimal.total_value) <= tol:
        return 1.0 if abs(found.total_value) <= tol else 0.0
    return found.total_value / optimal.total_value


# ---------------------------------------------------------------------------
# instance generators


def random_game(n: int, rng: np.random.Generator, n_timesteps: int = 4,
                producer_fraction: float = 0.5, consumer_mean: float = 1.0,
                producer_mean: float = -1.0, std: float = 0.25) -> CoalitionGame:
    """Each prosumer is a producer or a consumer; its profile draws from that role's normal."""
    producing = rng.random(n) < producer_fraction
    mean = np.where(producing, producer_mean, consumer_mean)[:, None]
    return CoalitionGame(mean + std * rng.standard_normal((n, n_timesteps)))


def gaussian_isg(n: int, rng: np.random.Generator, scale: float = 1.0) -> IsgGame:
    W = np.triu(rng.normal(0.0, scale, (n, n)), 1)
    return IsgGame(W + W.T)


def planted_isg(sizes: Sequence[int], rng: np.random.Generator, intra=(0.5, 1.5),
                inter=(-1.5, -0.5)) -> tuple[IsgGame, list[list[int]]]:
    """Positive weights inside planted blocks, negative across them."""
    n = int(sum(sizes))
    labels = np.repeat(np.arange(len(sizes)), sizes)
    same = labels[:, None] == labels[None, :]
    W = np.where(same, rng.uniform(*intra, (n, n)), rng.uniform(*inter, (n, n)))
    W = np.triu(W, 1)
    W = W + W.T
    blocks = [np.flatnonzero(labels == b).tolist() for b in range(len(sizes))]
    return IsgGame(W), blocks
