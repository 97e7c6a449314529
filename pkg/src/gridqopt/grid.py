"""Grid graph model, DC power flow and simple-path enumeration.

Sign convention for node power: ``p < 0`` is production, ``p > 0`` is
consumption.  Line flows are signed along each line's stored ``(u, v)``
orientation.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, replace
from typing import Hashable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import spsolve

ROLES = ("producer", "consumer", "prosumer")


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Node:
    id: Hashable
    p: float
    role: str = "prosumer"


@dataclass(frozen=True)
class Line:
    u: Hashable
    v: Hashable
    r: float
    x: float


@dataclass(frozen=True)
class LineFlows:
    """Signed flow per line; positive means power moves from ``u`` to ``v``."""

    endpoints: tuple[tuple[Hashable, Hashable], ...]
    values: np.ndarray

    def __post_init__(self):
        self.values.setflags(write=False)

    def physical(self, line: int) -> tuple[Hashable, Hashable, float]:
        """``(from, to, magnitude)`` of the physical flow on ``line``."""
        u, v = self.endpoints[line]
        f = float(self.values[line])
        return (u, v, f) if f >= 0 else (v, u, -f)

    @property
    def magnitudes(self) -> np.ndarray:
        return np.abs(self.values)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["u", "v", "flow_kw"])
        for (u, v), f in zip(self.endpoints, self.values):
            w.writerow([u, v, repr(float(f))])
        return buf.getvalue()


@dataclass(frozen=True)
class GridNetwork:
    nodes: tuple[Node, ...]
    lines: tuple[Line, ...]
    flows: LineFlows | None = field(default=None, compare=False)

    def __post_init__(self):
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise GridError("duplicate node ids")
        known = set(ids)
        for ln in self.lines:
            if ln.u not in known or ln.v not in known:
                raise GridError(f"line {ln.u}-{ln.v} references an unknown node")
            if ln.u == ln.v:
                raise GridError("self-loop lines are not allowed")
            if not (ln.r > 0 and ln.x > 0):
                raise GridError("line resistance and reactance must be positive")
        for n in self.nodes:
            if n.role not in ROLES:
                raise GridError(f"unknown role {n.role!r}")

    # --------------------------------------------------------------- indexing
    @property
    def ids(self) -> list:
        return [n.id for n in self.nodes]

    @property
    def index(self) -> dict:
        return {n.id: i for i, n in enumerate(self.nodes)}

    @property
    def p(self) -> np.ndarray:
        return np.array([n.p for n in self.nodes], dtype=float)

    def line_index_arrays(self):
        idx = self.index
        u = np.array([idx[ln.u] for ln in self.lines], dtype=np.int64)
        v = np.array([idx[ln.v] for ln in self.lines], dtype=np.int64)
        return u, v

    def is_connected(self) -> bool:
        n = len(self.nodes)
        if n <= 1:
            return True
        u, v = self.line_index_arrays()
        adj = sp.coo_matrix((np.ones(u.size), (u, v)), shape=(n, n))
        k, _ = connected_components(adj, directed=False)
        return k == 1

    def with_powers(self, p: Sequence[float]) -> "GridNetwork":
        nodes = tuple(replace(nd, p=float(v)) for nd, v in zip(self.nodes, p))
        return GridNetwork(nodes, self.lines, None)

    def with_flows(self, flows: LineFlows | None = None) -> "GridNetwork":
        return GridNetwork(self.nodes, self.lines, flows or dc_power_flow(self))

    # ---------------------------------------------------------- serialization
    def to_dict(self) -> dict:
        d = {
            "nodes": [{"id": n.id, "p": n.p, "role": n.role} for n in self.nodes],
            "lines": [{"u": ln.u, "v": ln.v, "r": ln.r, "x": ln.x} for ln in self.lines],
        }
        if self.flows is not None:
            d["flows"] = [float(f) for f in self.flows.values]
        return d

    @classmethod
    def from_dict(cls, data) -> "GridNetwork":
        nodes = tuple(Node(n["id"], float(n["p"]), n.get("role", "prosumer")) for n in data["nodes"])
        lines = tuple(
            # reactance defaults to the resistance value
            Line(ln["u"], ln["v"], float(ln["r"]), float(ln.get("x", ln["r"])))
            for ln in data["lines"]
        )
        flows = None
        if data.get("flows") is not None:
            flows = LineFlows(tuple((ln.u, ln.v) for ln in lines), np.array(data["flows"], dtype=float))
        return cls(nodes, lines, flows)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "GridNetwork":
        return cls.from_dict(json.loads(text))


def make_network(nodes: Iterable, lines: Iterable) -> GridNetwork:
    """Convenience constructor from tuples ``(id, p[, role])`` and ``(u, v, r[, x])``."""
    ns = tuple(Node(*n) if not isinstance(n, Node) else n for n in nodes)
    ls = []
    for ln in lines:
        if isinstance(ln, Line):
            ls.append(ln)
        elif len(ln) == 3:
            ls.append(Line(ln[0], ln[1], float(ln[2]), float(ln[2])))
        else:
            ls.append(Line(ln[0], ln[1], float(ln[2]), float(ln[3])))
    return GridNetwork(ns, tuple(ls))


# ---------------------------------------------------------------------------
# DC power flow


def dc_power_flow(net: GridNetwork) -> LineFlows:
    """Linearized flows for the network's node powers.

    Injections are ``-(p - mean(p))`` (uniform slack), the angle of the node
    with the lowest id is pinned to zero, and ``f_uv = (theta_u - theta_v) / x_uv``.
    """
    n = len(net.nodes)
    if not net.is_connected():
        raise GridError("singular Laplacian: the network is disconnected")
    u, v = net.line_index_arrays()
    endpoints = tuple((ln.u, ln.v) for ln in net.lines)
    if n <= 1 or not net.lines:
        return LineFlows(endpoints, np.zeros(len(net.lines)))
    b = 1.0 / np.array([ln.x for ln in net.lines])
    B = sp.coo_matrix(
        (np.concatenate([b, b, -b, -b]), (np.concatenate([u, v, u, v]), np.concatenate([u, v, v, u]))),
        shape=(n, n),
    ).tocsr()
    p = net.p
    injection = -(p - p.mean())
    ref = min(range(n), key=lambda i: net.nodes[i].id)
    keep = np.array([i for i in range(n) if i != ref])
    theta = np.zeros(n)
    theta[keep] = spsolve(B[keep][:, keep].tocsc(), injection[keep])
    return LineFlows(endpoints, (theta[u] - theta[v]) * b)


def nodal_outflow(net: GridNetwork, flows: LineFlows) -> np.ndarray:
    """Net power leaving each node through its lines."""
    u, v = net.line_index_arrays()
    out = np.zeros(len(net.nodes))
    np.add.at(out, u, flows.values)
    np.add.at(out, v, -flows.values)
    return out


def flow_adjacency(net: GridNetwork, flows: LineFlows | None = None) -> np.ndarray:
    """Symmetric weights ``|f|`` per node pair (parallel lines summed)."""
    flows = flows or net.flows or dc_power_flow(net)
    n = len(net.nodes)
    u, v = net.line_index_arrays()
    A = np.zeros((n, n))
    np.add.at(A, (u, v), flows.magnitudes)
    np.add.at(A, (v, u), flows.magnitudes)
    return A


# ---------------------------------------------------------------------------
# simple paths

Step = tuple[int, Hashable, Hashable]  # (line index, from node, to node)


@dataclass(frozen=True)
class PathSet:
    source: Hashable
    target: Hashable
    paths: tuple[tuple[Step, ...], ...]
    resistances: np.ndarray
    total_resistance: float
    shares: np.ndarray
    truncated: bool = False


def _incidence(net: GridNetwork):
    inc = {n.id: [] for n in net.nodes}
    for li, ln in enumerate(net.lines):
        inc[ln.u].append((ln.v, li))
        inc[ln.v].append((ln.u, li))
    for k in inc:
        inc[k].sort(key=lambda t: (t[0], t[1]))
    return inc


def iter_simple_paths(net: GridNetwork, s, b, max_len: int | None = None):
    """Depth-first simple paths from ``s`` to ``b`` on the undirected multigraph.

    Neighbors are visited in increasing node id, then line index, so the
    enumeration order is deterministic.
    """
    max_len = len(net.nodes) if max_len is None else max_len
    inc = _incidence(net)
    on_path = {s}
    steps: list[Step] = []
    stack = [iter(inc[s])]
    while stack:
        try:
            nxt, li = next(stack[-1])
        except StopIteration:
            stack.pop()
            if steps:
                on_path.discard(steps.pop()[2])
            continue
        if nxt in on_path:
            continue
        cur = steps[-1][2] if steps else s
        if nxt == b:
            yield tuple(steps) + ((li, cur, nxt),)
            continue
        if len(steps) + 1 >= max_len:
            continue
        steps.append((li, cur, nxt))
        on_path.add(nxt)
        stack.append(iter(inc[nxt]))


def enumerate_simple_paths(net: GridNetwork, s, b, max_paths: int = 1000,
                           max_len: int | None = None) -> PathSet:
    """Path set with series resistances, parallel total and current-divider shares."""
    if s == b:
        raise GridError("source and target must differ")
    paths = []
    truncated = False
    for path in iter_simple_paths(net, s, b, max_len):
        if len(paths) == max_paths:
            truncated = True
            break
        paths.append(path)
    if not paths:
        raise GridError(f"no path between {s!r} and {b!r}")
    r_line = np.array([ln.r for ln in net.lines])
    r = np.array([r_line[[st[0] for st in path]].sum() for path in paths])
    R = 1.0 / np.sum(1.0 / r)
    return PathSet(s, b, tuple(paths), r, float(R), R / r, truncated)


def path_direction(path: Sequence[Step], line, flows: LineFlows) -> int:
    """+1 if ``path`` crosses ``line`` along the physical flow, -1 against it, 0 if absent.

    ``line`` is a line index or a ``(u, v)`` endpoint pair.
    """
    for li, a, c in path:
        if isinstance(line, tuple):
            if {a, c} != set(line):
                continue
        elif li != line:
            continue
        src, dst, _ = flows.physical(li)
        return 1 if (a, c) == (src, dst) else -1
    return 0


# ---------------------------------------------------------------------------
# synthetic topologies

TOPOLOGIES = ("path", "ring", "tree", "mesh")


def topology_edges(kind: str, n: int, rng: np.random.Generator, extra: float = 0.3):
    """Undirected edge list over nodes ``0..n-1``; always connected."""
    if kind == "path":
        return [(i, i + 1) for i in range(n - 1)]
    if kind == "ring":
        edges = [(i, i + 1) for i in range(n - 1)]
        if n > 2:
            edges.append((0, n - 1))
        return edges
    if kind in ("tree", "mesh"):
        edges = [(int(rng.integers(0, i)), i) for i in range(1, n)]
        if kind == "mesh" and n > 2:
            present = set(edges)
            n_extra = max(1, int(round(extra * n)))
            tries = 0
            while n_extra and tries < 50 * n:
                tries += 1
                a, c = sorted(int(t) for t in rng.choice(n, size=2, replace=False))
                if (a, c) not in present:
                    present.add((a, c))
                    edges.append((a, c))
                    n_extra -= 1
        return edges
    raise ValueError(f"unknown topology {kind!r}; choose from {TOPOLOGIES}")


def random_network(n: int, rng: np.random.Generator, kind: str = "mesh",
                   producer_fraction: float = 0.5, consumer_mean: float = 1.0,
                   producer_mean: float = -1.0, std: float = 0.25) -> GridNetwork:
    """Residential-style grid: powers from two shifted normals, random line impedances."""
    edges = topology_edges(kind, n, rng)
    n_prod = int(round(producer_fraction * n))
    roles = np.array(["consumer"] * n, dtype=object)
    roles[rng.permutation(n)[:n_prod]] = "producer"
    p = np.where(
        roles == "producer",
        rng.normal(producer_mean, std, size=n),
        rng.normal(consumer_mean, std, size=n),
    )
    r = rng.uniform(0.5, 1.5, size=len(edges))
    nodes = tuple(Node(i, float(p[i]), str(roles[i])) for i in range(n))
    lines = tuple(Line(a, c, float(rr), float(rr)) for (a, c), rr in zip(edges, r))
    return GridNetwork(nodes, lines)
