"""Exhaustive enumeration, the ground-truth oracle for small problems."""

from __future__ import annotations

import time

import numba
import numpy as np

from ..qubo import QuboProblem
from .report import SolveReport

MAX_BRUTE_FORCE_VARS = 30
_BLOCK_ELEMS = 1 << 22
_BIT_SHIFTS = np.arange(MAX_BRUTE_FORCE_VARS + 1, dtype=np.int64)


def binary_value(x) -> int:
    """Integer ``sum x_i 2**i``; the package-wide tie-break key."""
    return int(sum(int(b) << i for i, b in enumerate(x)))


def index_to_bits(k: int, n: int) -> np.ndarray:
    return np.array([(k >> i) & 1 for i in range(n)], dtype=np.int8)


def all_bitstrings(n: int) -> np.ndarray:
    """All ``2**n`` assignments; row ``k`` is the assignment with binary value ``k``."""
    idx = np.arange(1 << n, dtype=np.int64)
    return ((idx[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(np.int8)


def all_energies(q: QuboProblem) -> np.ndarray:
    """Energy of every assignment, indexed by binary value."""
    n = q.n_vars
    if n > 26:
        raise ValueError("refusing to materialize more than 2**26 energies")
    best = np.empty(1 << n)
    for start, block in _energy_blocks(q):
        best[start:start + block.size] = block
    return best


def _energy_blocks(q: QuboProblem):
    """Yield ``(first_index, energies)`` in binary-value order.

    Variables split into a high part (enumerated per block) and a low part
    whose own energies and bit patterns are shared by every block, so each
    block costs one matrix product.
    """
    n = q.n_vars
    J = q.coupling
    # low part ~n/2 keeps precompute negligible against the 2**n sweep
    L = min(n, n // 2 + 2)
    H = n - L
    low_idx = np.arange(L)
    high_idx = np.arange(L, n)
    X_low = all_bitstrings(L).astype(float)
    J_low = J[np.ix_(low_idx, low_idx)]
    e_low = X_low @ q.linear[low_idx] + 0.5 * np.einsum("ij,ij->i", X_low @ J_low, X_low)
    J_cross = J[np.ix_(high_idx, low_idx)]
    J_high = J[np.ix_(high_idx, high_idx)]
    per_block = max(1, _BLOCK_ELEMS >> L)
    n_high = 1 << H
    for h0 in range(0, n_high, per_block):
        hs = np.arange(h0, min(n_high, h0 + per_block), dtype=np.int64)
        Xh = ((hs[:, None] >> np.arange(H)) & 1).astype(float)
        e_high = q.offset + Xh @ q.linear[high_idx] + 0.5 * np.einsum("ij,ij->i", Xh @ J_high, Xh)
        field = Xh @ J_cross  # (blocks, L)
        E = e_high[:, None] + e_low[None, :] + field @ X_low.T
        yield int(h0) << L, E.ravel()


@numba.njit(cache=True)
def _scan_tolerance(lin, J):
    """Improvement threshold ``1e-13 * (1 + sum |coefficients|)``."""
    n = lin.shape[0]
    s = 1.0
    for i in range(n):
        s += abs(lin[i])
        for j in range(i + 1, n):
            s += abs(J[i, j])
    return 1e-13 * s


@numba.njit(cache=True)
def _ordered_scan(lin, J, offset, tol):
    """Binary value of the first minimum, walking the values in increasing order.

    Going from index k-1 to k flips the trailing ones of k-1 back to zero and
    sets the next bit, so each step costs amortized two field updates.  Energy
    and fields are resynchronized every 1024 steps to bound rounding drift.
    A negative ``tol`` selects the default threshold.
    """
    n = lin.shape[0]
    if tol < 0:
        tol = _scan_tolerance(lin, J)
    x = np.zeros(n)
    h = lin.copy()
    e = offset
    best = e
    best_k = 0
    for k in range(1, 1 << n):
        km = k - 1
        b = 0
        while km & 1:
            v = b
            e -= h[v]
            x[v] = 0.0
            for j in range(n):
                h[j] -= J[v, j]
            km >>= 1
            b += 1
        v = b
        e += h[v]
        x[v] = 1.0
        for j in range(n):
            h[j] += J[v, j]
        if b >= 10:
            e = offset
            for i in range(n):
                acc = lin[i]
                for j in range(n):
                    acc += J[i, j] * x[j]
                h[i] = acc
                e += x[i] * (lin[i] + 0.5 * (acc - lin[i]))
        if e < best - tol:
            best = e
            best_k = k
    return best_k


def brute_force(q: QuboProblem) -> SolveReport:
    """Global minimum over all assignments; ties go to the lowest binary value."""
    n = q.n_vars
    if n > MAX_BRUTE_FORCE_VARS:
        raise ValueError(f"brute force limited to {MAX_BRUTE_FORCE_VARS} variables, got {n}")
    t0 = time.perf_counter()
    k = _ordered_scan(q.linear, np.ascontiguousarray(q.coupling), q.offset, -1.0) if n else 0
    x = (k >> _BIT_SHIFTS[:n]) & 1
    return SolveReport.finalize(q, x, time.perf_counter() - t0, 1 << n, "brute_force")
