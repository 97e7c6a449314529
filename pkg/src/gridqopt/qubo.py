"""Canonical QUBO container, integer encodings and penalty algebra.

Every formulation in the package compiles to a :class:`QuboProblem`: an
upper-triangular sparse quadratic part, a dense linear part and a constant
offset over binary variables.  The diagonal is always folded into the linear
terms because ``x**2 == x`` for binary ``x``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

__all__ = [
    "QuboProblem",
    "IntegerEncoding",
    "build_encoding",
    "decode_value",
    "encode_value",
    "energy",
    "add_squared_penalty",
    "compose",
    "squared_penalty_arrays",
]


def _canonical(n, rows, cols, vals, linear):
    """Fold diagonal into ``linear``, orient pairs i<j, merge duplicates."""
    rows = np.asarray(rows, dtype=np.int64).ravel()
    cols = np.asarray(cols, dtype=np.int64).ravel()
    vals = np.asarray(vals, dtype=float).ravel()
    if not (rows.shape == cols.shape == vals.shape):
        raise ValueError("rows, cols and vals must have equal length")
    if rows.size and (rows.min() < 0 or cols.min() < 0 or max(rows.max(), cols.max()) >= n):
        raise IndexError("quadratic index out of range")
    diag = rows == cols
    if diag.any():
        np.add.at(linear, rows[diag], vals[diag])
    off = ~diag
    lo = np.minimum(rows[off], cols[off])
    hi = np.maximum(rows[off], cols[off])
    v = vals[off]
    if lo.size == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty.copy(), np.zeros(0)
    key = lo * n + hi
    uniq, inv = np.unique(key, return_inverse=True)
    summed = np.zeros(uniq.size)
    np.add.at(summed, inv, v)
    keep = summed != 0.0
    uniq, summed = uniq[keep], summed[keep]
    return uniq // n, uniq % n, summed


@dataclass(frozen=True, eq=False)
class QuboProblem:
    """Quadratic pseudo-boolean function ``offset + l.x + sum_{i<j} q_ij x_i x_j``.

    Construct through :meth:`from_terms`, :meth:`from_dense` or
    :meth:`from_arrays`; those canonicalize the input.  The raw initializer
    assumes already-canonical arrays.
    """

    n_vars: int
    linear: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    offset: float = 0.0
    variable_labels: tuple[str, ...] | None = field(default=None)

    def __post_init__(self):
        for arr in (self.linear, self.rows, self.cols, self.vals):
            arr.setflags(write=False)
        if self.linear.shape != (self.n_vars,):
            raise ValueError("linear must have length n_vars")
        if self.variable_labels is not None and len(self.variable_labels) != self.n_vars:
            raise ValueError("one label per variable required")

    # ------------------------------------------------------------------ builders
    @classmethod
    def from_arrays(cls, n_vars, linear=None, rows=(), cols=(), vals=(), offset=0.0, labels=None):
        lin = np.zeros(n_vars) if linear is None else np.array(linear, dtype=float).copy()
        if lin.shape != (n_vars,):
            raise ValueError("linear must have length n_vars")
        r, c, v = _canonical(n_vars, rows, cols, vals, lin)
        return cls(
            int(n_vars), lin, r, c, v, float(offset), None if labels is None else tuple(labels)
        )

    @classmethod
    def from_terms(
        cls,
        n_vars: int,
        linear: Sequence[float] | Mapping[int, float] | None = None,
        quadratic: Mapping[tuple[int, int], float] | None = None,
        offset: float = 0.0,
        labels: Sequence[str] | None = None,
    ) -> "QuboProblem":
        lin = np.zeros(n_vars)
        if isinstance(linear, Mapping):
            for i, v in linear.items():
                lin[i] += v
        elif linear is not None:
            lin[:] = np.asarray(linear, dtype=float)
        quadratic = quadratic or {}
        keys = list(quadratic)
        rows = [k[0] for k in keys]
        cols = [k[1] for k in keys]
        vals = [quadratic[k] for k in keys]
        return cls.from_arrays(n_vars, lin, rows, cols, vals, offset, labels)

    @classmethod
    def from_dense(cls, matrix, linear=None, offset=0.0, labels=None) -> "QuboProblem":
        """Read a square matrix ``M`` as ``x^T M x`` (diagonal -> linear)."""
        M = np.asarray(matrix, dtype=float)
        n = M.shape[0]
        if M.shape != (n, n):
            raise ValueError("matrix must be square")
        r, c = np.nonzero(M)
        return cls.from_arrays(n, linear, r, c, M[r, c], offset, labels)

    # ---------------------------------------------------------------- accessors
    @property
    def quadratic(self) -> dict[tuple[int, int], float]:
        return {(int(i), int(j)): float(v) for i, j, v in zip(self.rows, self.cols, self.vals)}

    @cached_property
    def upper(self) -> sp.csr_matrix:
        """Strictly upper-triangular coupling matrix."""
        return sp.csr_matrix((self.vals, (self.rows, self.cols)), shape=(self.n_vars, self.n_vars))

    @cached_property
    def coupling(self) -> np.ndarray:
        """Dense symmetric ``J`` with ``J_ij = J_ji = q_ij`` and zero diagonal."""
        J = np.zeros((self.n_vars, self.n_vars))
        J[self.rows, self.cols] = self.vals
        J[self.cols, self.rows] = self.vals
        J.setflags(write=False)
        return J

    @property
    def max_abs_coefficient(self) -> float:
        m = 0.0
        if self.n_vars:
            m = float(np.abs(self.linear).max())
        if self.vals.size:
            m = max(m, float(np.abs(self.vals).max()))
        return m

    def energies(self, X) -> np.ndarray:
        """Energies of a batch of assignments, one per row."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_vars:
            raise ValueError(f"expected shape (m, {self.n_vars}), got {X.shape}")
        out = self.offset + X @ self.linear
        if self.vals.size:
            XU = np.asarray(self.upper.T @ X.T).T
            out = out + np.einsum("ij,ij->i", XU, X)
        return out

    def relabel(self, labels: Sequence[str] | None) -> "QuboProblem":
        return QuboProblem(
            self.n_vars, self.linear, self.rows, self.cols, self.vals, self.offset,
            None if labels is None else tuple(labels),
        )

    def with_offset(self, offset: float) -> "QuboProblem":
        return QuboProblem(
            self.n_vars, self.linear, self.rows, self.cols, self.vals, float(offset),
            self.variable_labels,
        )

    def subproblem(self, free: Sequence[int], state) -> "QuboProblem":
        """Restrict to ``free`` variables with all others clamped to ``state``."""
        free = np.asarray(free, dtype=np.int64)
        x = np.asarray(state, dtype=float)
        mask = np.zeros(self.n_vars, dtype=bool)
        mask[free] = True
        clamped = x * ~mask
        J = self.coupling
        lin = self.linear[free] + J[free] @ clamped
        fixed = clamped.copy()
        offset = self.offset + self.linear @ fixed + 0.5 * fixed @ J @ fixed
        sub = J[np.ix_(free, free)]
        r, c = np.nonzero(np.triu(sub, 1))
        return QuboProblem.from_arrays(len(free), lin, r, c, sub[r, c], offset)

    # -------------------------------------------------------------- comparison
    def __eq__(self, other):
        if not isinstance(other, QuboProblem):
            return NotImplemented
        return (
            self.n_vars == other.n_vars
            and self.offset == other.offset
            and np.array_equal(self.linear, other.linear)
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.cols, other.cols)
            and np.array_equal(self.vals, other.vals)
            and self.variable_labels == other.variable_labels
        )

    def __hash__(self):
        return hash((self.n_vars, self.offset, self.linear.tobytes(), self.vals.tobytes()))

    # ----------------------------------------------------------- serialization
    def to_dict(self) -> dict:
        return {
            "n_vars": self.n_vars,
            "offset": self.offset,
            "linear": [float(v) for v in self.linear],
            "quadratic": [[int(i), int(j), float(v)] for i, j, v in zip(self.rows, self.cols, self.vals)],
            "labels": None if self.variable_labels is None else list(self.variable_labels),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "QuboProblem":
        quad = data.get("quadratic", [])
        return cls.from_arrays(
            int(data["n_vars"]),
            data.get("linear"),
            [t[0] for t in quad],
            [t[1] for t in quad],
            [t[2] for t in quad],
            data.get("offset", 0.0),
            data.get("labels"),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "QuboProblem":
        return cls.from_dict(json.loads(text))


def energy(q: QuboProblem, x) -> float:
    """Evaluate ``q`` at a single bit-vector."""
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != q.n_vars:
        raise ValueError(f"assignment has length {x.shape[0]}, problem has {q.n_vars} variables")
    e = q.offset + float(q.linear @ x)
    if q.vals.size:
        e += float(q.vals @ (x[q.rows] * x[q.cols]))
    return e


def squared_penalty_arrays(terms, constant: float, weight: float):
    """Expand ``weight * (sum_i a_i x_i + constant)**2`` with ``x_i**2 = x_i``.

    Returns ``(lin_idx, lin_vals, rows, cols, vals, offset)``; repeated
    variables in ``terms`` are merged first.
    """
    idx = np.asarray([t[0] for t in terms], dtype=np.int64)
    coef = np.asarray([t[1] for t in terms], dtype=float)
    if idx.size:
        uniq, inv = np.unique(idx, return_inverse=True)
        a = np.zeros(uniq.size)
        np.add.at(a, inv, coef)
    else:
        uniq, a = idx, coef
    lin = weight * (a * a + 2.0 * constant * a)
    iu, ju = np.triu_indices(uniq.size, 1)
    quad = 2.0 * weight * a[iu] * a[ju]
    return uniq, lin, uniq[iu], uniq[ju], quad, weight * constant * constant


def add_squared_penalty(q: QuboProblem, terms, constant: float, weight: float) -> QuboProblem:
    """Return ``q`` plus ``weight * (sum coeff_i x_i + constant)**2``."""
    if weight < 0:
        raise ValueError("penalty weight must be nonnegative")
    if weight == 0:
        return q
    li, lv, r, c, v, off = squared_penalty_arrays(terms, constant, weight)
    lin = q.linear.copy()
    np.add.at(lin, li, lv)
    return QuboProblem.from_arrays(
        q.n_vars,
        lin,
        np.concatenate([q.rows, r]),
        np.concatenate([q.cols, c]),
        np.concatenate([q.vals, v]),
        q.offset + off,
        q.variable_labels,
    )


def compose(objective: QuboProblem, penalties: Iterable[tuple[QuboProblem, float]]) -> QuboProblem:
    """Coefficient-wise ``objective + sum(weight * p)``."""
    lin = objective.linear.copy()
    rows, cols, vals = [objective.rows], [objective.cols], [objective.vals]
    offset = objective.offset
    for p, w in penalties:
        if p.n_vars != objective.n_vars:
            raise ValueError(f"n_vars mismatch: {p.n_vars} != {objective.n_vars}")
        if w == 0:
            continue
        lin += w * p.linear
        rows.append(p.rows)
        cols.append(p.cols)
        vals.append(w * p.vals)
        offset += w * p.offset
    return QuboProblem.from_arrays(
        objective.n_vars, lin, np.concatenate(rows), np.concatenate(cols),
        np.concatenate(vals), offset, objective.variable_labels,
    )


# --------------------------------------------------------------------------
# integer encoding


@dataclass(frozen=True)
class IntegerEncoding:
    """Bounded-coefficient binary encoding of ``n_categories`` evenly spaced values."""

    n_categories: int
    n_bits: int
    weights: tuple[int, ...]
    lo: float
    hi: float

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / (self.n_categories - 1)

    @property
    def values(self) -> np.ndarray:
        return self.lo + self.step * np.arange(self.n_categories)


def build_encoding(n_categories: int, lo: float, hi: float) -> IntegerEncoding:
    """Power-of-two weights with a truncated last weight.

    The last weight is ``N - 2**(Q-1)`` so the largest representable sum is
    exactly ``N - 1``.
    """
    if n_categories < 2:
        raise ValueError("need at least two categories")
    if not lo < hi:
        raise ValueError("lo must be smaller than hi")
    n_bits = max(1, math.ceil(math.log2(n_categories)))
    weights = [2**k for k in range(n_bits - 1)]
    last = n_categories - 2 ** (n_bits - 1)
    if last > 0:
        weights.append(last)
    else:
        # degenerate last weight: drop the bit
        n_bits -= 1
    return IntegerEncoding(n_categories, n_bits, tuple(weights), float(lo), float(hi))


def decode_value(enc: IntegerEncoding, bits) -> float:
    bits = np.asarray(bits).ravel()
    if bits.shape[0] != enc.n_bits:
        raise ValueError(f"expected {enc.n_bits} bits, got {bits.shape[0]}")
    return enc.lo + enc.step * float(np.dot(enc.weights, bits))


def encode_value(enc: IntegerEncoding, category: int) -> np.ndarray:
    """Bits for category index ``category`` (greedy from the largest weight)."""
    if not 0 <= category < enc.n_categories:
        raise ValueError("category out of range")
    bits = np.zeros(enc.n_bits, dtype=np.int8)
    rest = category
    for k in range(enc.n_bits - 1, -1, -1):
        if enc.weights[k] <= rest:
            bits[k] = 1
            rest -= enc.weights[k]
    assert rest == 0
    return bits
