"""Dense statevector simulation of depth-1 QAOA on QUBO instances.

Basis state ``k`` carries the assignment with binary value ``k`` (bit ``i`` of
``k`` is variable ``i``).  The cost layer is applied as a diagonal phase
``exp(-i * gamma * E(x))`` and the mixer as ``exp(-i * beta * X)`` on every
qubit, starting from the uniform superposition.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .qubo import QuboProblem
from .solvers.exact import all_energies, index_to_bits
from .solvers.report import SolveReport

MAX_QUBITS = 24
DEFAULT_SHOTS = 2**12


@dataclass(frozen=True)
class IsingForm:
    """``offset + sum h_i s_i + sum_{i<j} J_ij s_i s_j`` with ``x = (1 - s) / 2``."""

    h: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    J: np.ndarray
    offset: float

    def energy(self, s) -> float:
        s = np.asarray(s, dtype=float)
        return float(self.offset + self.h @ s + self.J @ (s[self.rows] * s[self.cols]))


def to_ising(q: QuboProblem) -> IsingForm:
    h = -0.5 * q.linear.copy()
    np.add.at(h, q.rows, -0.25 * q.vals)
    np.add.at(h, q.cols, -0.25 * q.vals)
    offset = q.offset + 0.5 * q.linear.sum() + 0.25 * q.vals.sum()
    return IsingForm(h, q.rows.copy(), q.cols.copy(), 0.25 * q.vals, float(offset))


def spins(x) -> np.ndarray:
    return 1 - 2 * np.asarray(x, dtype=int)


def _check_size(q: QuboProblem):
    if q.n_vars > MAX_QUBITS:
        raise ValueError(f"statevector limited to {MAX_QUBITS} qubits, got {q.n_vars}")


def apply_mixer(psi: np.ndarray, n: int, beta: float) -> np.ndarray:
    c, s = np.cos(beta), -1j * np.sin(beta)
    out = psi.copy()
    for i in range(n):
        v = out.reshape(-1, 2, 1 << i)
        a0 = v[:, 0, :].copy()
        a1 = v[:, 1, :]
        v[:, 0, :] = c * a0 + s * a1
        v[:, 1, :] = c * a1 + s * a0
    return out


def apply_x_sum(psi: np.ndarray, n: int) -> np.ndarray:
    """``sum_i X_i |psi>``."""
    out = np.zeros_like(psi)
    for i in range(n):
        v = psi.reshape(-1, 2, 1 << i)
        o = out.reshape(-1, 2, 1 << i)
        o[:, 0, :] += v[:, 1, :]
        o[:, 1, :] += v[:, 0, :]
    return out


def statevector(q: QuboProblem, gamma: float, beta: float, energies=None) -> np.ndarray:
    _check_size(q)
    E = all_energies(q) if energies is None else energies
    psi = np.exp(-1j * gamma * E) / np.sqrt(E.size)
    return apply_mixer(psi, q.n_vars, beta)


def qaoa_expectation(q: QuboProblem, gamma: float, beta: float, energies=None) -> float:
    E = all_energies(q) if energies is None else energies
    psi = statevector(q, gamma, beta, E)
    return float(np.real(np.vdot(psi, E * psi)))


def qaoa_gradient(q: QuboProblem, gamma: float, beta: float, energies=None) -> tuple[float, float]:
    """Analytic ``(d/dgamma, d/dbeta)`` of the depth-1 expectation."""
    _check_size(q)
    n = q.n_vars
    E = all_energies(q) if energies is None else energies
    phased = np.exp(-1j * gamma * E) / np.sqrt(E.size)
    psi = apply_mixer(phased, n, beta)
    d_gamma_state = apply_mixer(-1j * E * phased, n, beta)
    d_beta_state = -1j * apply_x_sum(psi, n)
    Hpsi = E * psi
    return (
        float(2.0 * np.real(np.vdot(Hpsi, d_gamma_state))),
        float(2.0 * np.real(np.vdot(Hpsi, d_beta_state))),
    )


def optimize_angles(q: QuboProblem, grid_resolution: int = 12, tol: float = 1e-4,
                    energies=None) -> tuple[float, float]:
    """Grid search on [0, 2pi) x [0, pi), then pattern-search coordinate descent."""
    if grid_resolution < 2:
        raise ValueError("grid_resolution must be at least 2")
    _check_size(q)
    E = all_energies(q) if energies is None else energies
    n = q.n_vars
    gammas = np.arange(grid_resolution) * (2 * np.pi / grid_resolution)
    betas = np.arange(grid_resolution) * (np.pi / grid_resolution)
    best = (np.inf, 0.0, 0.0)
    for g in gammas:
        phased = np.exp(-1j * g * E) / np.sqrt(E.size)
        for b in betas:
            psi = apply_mixer(phased, n, b)
            val = float(np.real(np.vdot(psi, E * psi)))
            if val < best[0] - 1e-15:
                best = (val, float(g), float(b))

    def f(g, b):
        return qaoa_expectation(q, g, b, E)

    val, g, b = best
    steps = [2 * np.pi / grid_resolution / 2, np.pi / grid_resolution / 2]
    while max(steps) > tol:
        moved = False
        for axis in (0, 1):
            for sign in (1.0, -1.0):
                cand = (g + sign * steps[0], b) if axis == 0 else (g, b + sign * steps[1])
                cv = f(*cand)
                if cv < val - 1e-15:
                    val, (g, b) = cv, cand
                    moved = True
                    break
        if not moved:
            steps = [s / 2 for s in steps]
    return float(g), float(b)


@dataclass
class QaoaResult:
    gamma: float
    beta: float
    expectation: float
    best_sampled_x: np.ndarray
    best_sampled_energy: float
    n_shots: int
    counts: np.ndarray


def qaoa_sample(q: QuboProblem, gamma: float, beta: float, n_shots: int = DEFAULT_SHOTS,
                seed: int = 0, energies=None) -> QaoaResult:
    """Draw ``n_shots`` measurement outcomes and keep the lowest-energy one."""
    E = all_energies(q) if energies is None else energies
    psi = statevector(q, gamma, beta, E)
    probs = np.abs(psi) ** 2
    probs /= probs.sum()
    rng = np.random.default_rng(seed)
    draws = rng.choice(E.size, size=n_shots, p=probs)
    counts = np.bincount(draws, minlength=E.size)
    seen = np.flatnonzero(counts)
    k = int(seen[np.argmin(E[seen])])
    return QaoaResult(
        float(gamma), float(beta), float(probs @ E), index_to_bits(k, q.n_vars),
        float(E[k]), int(n_shots), counts,
    )


def qaoa_solver(q: QuboProblem, seed: int = 0, grid_resolution: int = 12,
                n_shots: int = DEFAULT_SHOTS) -> SolveReport:
    """Subsolver handle: optimize angles on the exact expectation, then sample."""
    t0 = time.perf_counter()
    if q.n_vars == 0:
        return SolveReport.finalize(q, [], 0.0, 0, "qaoa", seed)
    E = all_energies(q)
    g, b = optimize_angles(q, grid_resolution, energies=E)
    res = qaoa_sample(q, g, b, n_shots, seed, energies=E)
    return SolveReport.finalize(q, res.best_sampled_x, time.perf_counter() - t0, n_shots,
                                "qaoa", seed)
