from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import naive_energy, random_qubo
from gridqopt.qubo import QuboProblem, energy
from gridqopt.solvers import (
    MAX_BRUTE_FORCE_VARS,
    SaSchedule,
    SolveReport,
    all_bitstrings,
    all_energies,
    brute_force,
    divisive_driver,
    qsa,
    simulated_annealing,
    tabu_search,
)
from gridqopt.solvers.exact import binary_value, index_to_bits

SMALL_SA = SaSchedule(n_sweeps=50, n_reads=100)


def itertools_optimum(q: QuboProblem):
    """Independent oracle: python enumeration in binary-value order."""
    best = None
    for k in range(2**q.n_vars):
        x = [(k >> i) & 1 for i in range(q.n_vars)]
        e = naive_energy(q, x)
        if best is None or e < best[0] - 1e-12:
            best = (e, x)
    return best


# ------------------------------------------------------------- brute force

def test_brute_force_examples():
    r = brute_force(QuboProblem.from_terms(1, [1.0]))
    assert r.best_x.tolist() == [0] and r.best_energy == 0.0
    r = brute_force(QuboProblem.from_terms(2, [-1, -1], {(0, 1): 3}))
    assert r.best_x.tolist() == [1, 0] and r.best_energy == -1.0
    r = brute_force(QuboProblem.from_terms(0, offset=4.0))
    assert r.best_x.size == 0 and r.best_energy == 4.0


def test_brute_force_guard():
    with pytest.raises(ValueError):
        brute_force(QuboProblem.from_terms(MAX_BRUTE_FORCE_VARS + 1))


def test_brute_force_tie_goes_to_lowest_binary_value():
    q = QuboProblem.from_terms(3, [0.0, 0.0, 0.0])
    assert brute_force(q).best_x.tolist() == [0, 0, 0]
    # two optima: x = (0, 1, 0) (value 2) and (1, 0, 1) (value 5)
    q = QuboProblem.from_terms(3, [-1, -2, -1], {(0, 1): 5, (1, 2): 5})
    r = brute_force(q)
    assert r.best_x.tolist() == [0, 1, 0]


@given(st.integers(1, 11), st.integers(0, 2**31 - 1))
def test_brute_force_matches_python_enumeration(n, seed):
    rng = np.random.default_rng(seed)
    q = random_qubo(n, rng, density=0.7)
    e, x = itertools_optimum(q)
    r = brute_force(q)
    assert r.best_energy == pytest.approx(e, abs=1e-10)
    assert r.best_x.tolist() == x


def test_all_energies_row_order(rng):
    q = random_qubo(5, rng)
    X = all_bitstrings(5)
    assert all(binary_value(x) == k for k, x in enumerate(X))
    E = all_energies(q)
    assert np.allclose(E, [energy(q, x) for x in X])
    assert index_to_bits(6, 4).tolist() == [0, 1, 1, 0]


def test_brute_force_large_uses_block_route_consistently(rng):
    q = random_qubo(18, rng, density=0.3)
    E = all_energies(q)
    r = brute_force(q)
    assert r.best_energy == pytest.approx(E.min(), abs=1e-9)
    assert binary_value(r.best_x) == int(np.flatnonzero(np.isclose(E, E.min(), atol=1e-9))[0])


# ------------------------------------------------------------------- SA

def test_schedule_validation():
    with pytest.raises(ValueError):
        SaSchedule(beta_start=1.0, beta_end=1.0)
    with pytest.raises(ValueError):
        SaSchedule(n_reads=0)
    b = SaSchedule(n_sweeps=5, beta_start=0.1, beta_end=10).betas(2.0)
    assert b[0] == pytest.approx(0.05) and b[-1] == pytest.approx(5.0)


def test_sa_one_variable_matches_oracle():
    for lin in (-1.0, 2.0):
        q = QuboProblem.from_terms(1, [lin])
        assert simulated_annealing(q, SMALL_SA, 0).best_energy == brute_force(q).best_energy


def test_sa_deterministic(rng):
    q = random_qubo(12, rng)
    assert simulated_annealing(q, SMALL_SA, 7).same_result(simulated_annealing(q, SMALL_SA, 7))


def test_sa_reaches_optimum_on_most_seeds():
    rng = np.random.default_rng(2024)
    q = random_qubo(20, rng)
    opt = brute_force(q).best_energy
    hits = sum(abs(simulated_annealing(q, seed=s).best_energy - opt) < 1e-9 for s in range(100))
    assert hits >= 95


def test_sa_rejects_empty():
    with pytest.raises(ValueError):
        simulated_annealing(QuboProblem.from_terms(0))


# ----------------------------------------------------------------- tabu

def test_tabu_separable_problem(rng):
    lin = rng.normal(size=15)
    q = QuboProblem.from_terms(15, lin)
    r = tabu_search(q, seed=3)
    assert r.best_x.tolist() == (lin < 0).astype(int).tolist()


def test_tabu_deterministic(rng):
    q = random_qubo(14, rng)
    assert tabu_search(q, seed=5).same_result(tabu_search(q, seed=5))


def test_tabu_paired_with_sa():
    rng = np.random.default_rng(99)
    wins = 0
    for s in range(20):
        q = random_qubo(int(rng.integers(8, 21)), rng)
        wins += tabu_search(q, seed=s).best_energy <= simulated_annealing(q, seed=s).best_energy + 1e-12
    assert wins >= 10


# ------------------------------------------------------------------- QSA

def test_qsa_full_window_is_one_sa_call(rng):
    q = random_qubo(10, rng)
    r = qsa(q, subproblem_size=10, seed=1)
    assert r.best_energy == pytest.approx(brute_force(q).best_energy)


def test_qsa_deterministic(rng):
    q = random_qubo(16, rng)
    assert qsa(q, 6, seed=2).same_result(qsa(q, 6, seed=2))


def test_qsa_close_to_optimum():
    rng = np.random.default_rng(7)
    ok = 0
    for s in range(100):
        q = random_qubo(int(rng.integers(8, 21)), rng)
        opt = brute_force(q).best_energy
        ok += qsa(q, seed=s).best_energy <= opt + 0.01 * abs(opt)
    assert ok >= 90


# ----------------------------------------------------------- invariants

@pytest.mark.parametrize("solver", [
    lambda q: simulated_annealing(q, SMALL_SA, 0),
    lambda q: tabu_search(q, seed=0),
    lambda q: qsa(q, 4, seed=0),
])
def test_reported_energy_is_reevaluated(solver, rng):
    for _ in range(5):
        q = random_qubo(int(rng.integers(2, 13)), rng, offset=rng.normal())
        r = solver(q)
        assert r.best_energy == energy(q, r.best_x)
        assert r.best_energy >= brute_force(q).best_energy - 1e-12


def test_report_json_keys(rng):
    r = brute_force(random_qubo(3, rng))
    assert set(r.to_dict()) == {"solver", "seed", "energy", "x", "wall_time_s", "iterations"}
    assert isinstance(SolveReport.finalize(random_qubo(2, rng), [0, 1], 0.0, 1, "x"), SolveReport)


# ------------------------------------------------------------ divisive

def triangle_modularity_builder():
    from gridqopt.srcd import SrcdInstance, bipartition_qubo_builder

    A = np.zeros((6, 6))
    for a, b in [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]:
        A[a, b] = A[b, a] = 1.0
    return bipartition_qubo_builder(SrcdInstance(A, np.zeros(6), lam=0.0))


def test_divisive_two_triangles():
    blocks = divisive_driver(triangle_modularity_builder(), range(6), brute_force)
    assert sorted(map(sorted, blocks)) == [[0, 1, 2], [3, 4, 5]]


def test_divisive_single_node_no_call():
    def boom(q):
        raise AssertionError("subsolver must not be called")

    assert divisive_driver(lambda S: QuboProblem.from_terms(len(S)), ["a"], boom) == [["a"]]


def test_divisive_positive_isg_keeps_grand_coalition():
    from gridqopt.csg import IsgGame, bipartition_value_qubo

    W = np.ones((5, 5)) - np.eye(5)
    isg = IsgGame(W)
    blocks = divisive_driver(lambda S: bipartition_value_qubo(isg, S), range(5), brute_force)
    assert blocks == [[0, 1, 2, 3, 4]]


@given(st.integers(2, 9), st.integers(0, 2**31 - 1))
def test_divisive_output_is_partition_and_monotone(n, seed):
    from gridqopt.csg import IsgGame, bipartition_value_qubo

    rng = np.random.default_rng(seed)
    W = np.triu(rng.normal(size=(n, n)), 1)
    isg = IsgGame(W + W.T)
    hist = []
    blocks = divisive_driver(lambda S: bipartition_value_qubo(isg, S), range(n), brute_force,
                             history=hist)
    assert sorted(itertools.chain.from_iterable(blocks)) == list(range(n))
    assert all(blocks)
    assert all(e < 0 for *_, e in hist)
