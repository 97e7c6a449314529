from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gridqopt.qubo import energy
from gridqopt.solvers import brute_force
from gridqopt.solvers.exact import all_energies
from gridqopt.srcd import (
    SrcdInstance,
    assignment,
    bipartition_qubo_builder,
    build_onehot_qubo,
    canonical_labels,
    decode_onehot,
    divisive,
    encode_onehot,
    estimate_k,
    louvain,
    modularity,
    objective_qubo,
    random_instance,
    self_reliance,
)


def graph(n, edges, p=None, **kw):
    A = np.zeros((n, n))
    for a, b, *w in edges:
        A[a, b] = A[b, a] = w[0] if w else 1.0
    return SrcdInstance(A, np.zeros(n) if p is None else p, **kw)


TRIANGLES = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]


def set_partitions(n, max_blocks):
    """Oracle: every labeling, deduplicated by canonical form."""
    seen = set()
    for lab in itertools.product(range(max_blocks), repeat=n):
        key = tuple(canonical_labels(lab))
        if key not in seen:
            seen.add(key)
            yield np.array(key)


# ------------------------------------------------------------- evaluators

def test_instance_validation():
    with pytest.raises(ValueError):
        SrcdInstance(np.array([[0, 1], [2, 0]]), np.zeros(2))
    with pytest.raises(ValueError):
        SrcdInstance(np.eye(2), np.zeros(2))
    with pytest.raises(ValueError):
        SrcdInstance(np.zeros((2, 2)), np.zeros(3))
    with pytest.raises(ValueError):
        SrcdInstance(np.zeros((2, 2)), np.zeros(2), lam=-1)


def test_modularity_examples():
    tri = graph(6, TRIANGLES)
    assert modularity(tri, [0] * 6) == pytest.approx(0.0)
    assert modularity(tri, [0, 0, 0, 1, 1, 1]) == pytest.approx(0.5)
    clique = graph(4, list(itertools.combinations(range(4), 2)))
    assert modularity(clique, range(4)) == pytest.approx(-0.25)
    assert modularity(graph(3, []), [0, 1, 2]) == 0.0


def test_self_reliance_examples():
    inst = SrcdInstance(np.zeros((3, 3)), np.array([1.0, -1.0, 2.0]), lam=0.1)
    assert self_reliance(inst, [0, 0, 1]) == pytest.approx(0.025)
    assert self_reliance(inst, [0, 0, 0]) == pytest.approx(0.025)
    assert self_reliance(inst, [0, 1, 2]) == pytest.approx(0.0375)
    zero = SrcdInstance(np.zeros((2, 2)), np.zeros(2))
    assert self_reliance(zero, [0, 1]) == 0.0


def test_assignment_json():
    a = assignment(graph(6, TRIANGLES), [5, 5, 5, 2, 2, 2])
    d = a.to_dict()
    assert d["assignment"] == [0, 0, 0, 1, 1, 1]
    assert set(d) == {"assignment", "modularity", "self_reliance"}
    assert a.n_communities == 2 and a.blocks() == [[0, 1, 2], [3, 4, 5]]


# --------------------------------------------------------------- one-hot

@given(st.integers(2, 7), st.integers(2, 3), st.integers(0, 2**31 - 1))
def test_objective_qubo_equals_direct_scores(n, K, seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(n, rng, K=K, lam=float(rng.uniform(0, 1)))
    q = objective_qubo(inst)
    for lab in rng.integers(0, K, (6, n)):
        x = encode_onehot(inst, lab)
        direct = -modularity(inst, lab) + self_reliance(inst, lab)
        assert energy(q, x) == pytest.approx(direct, rel=1e-9, abs=1e-9)
        full = build_onehot_qubo(inst)
        assert energy(full, x) == pytest.approx(direct, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("lam", [0.0, 0.1])
@pytest.mark.parametrize("n, seed", [(4, 0), (6, 1), (8, 2)])
def test_onehot_brute_force_matches_partition_enumeration(n, seed, lam):
    inst = random_instance(n, np.random.default_rng(seed), K=2, lam=lam)
    best = max(assignment(inst, lab).objective for lab in set_partitions(n, 2))
    r = brute_force(build_onehot_qubo(inst))
    labels = decode_onehot(inst, r.best_x)
    assert labels is not None
    assert assignment(inst, labels).objective == pytest.approx(best, abs=1e-9)
    assert r.best_energy == pytest.approx(-best, abs=1e-9)


def test_infeasible_states_lie_above_feasible_optimum():
    inst = random_instance(5, np.random.default_rng(4), K=2)
    q = build_onehot_qubo(inst)
    E = all_energies(q)
    X = (np.arange(E.size)[:, None] >> np.arange(q.n_vars)) & 1
    feasible = (X.reshape(-1, inst.n, inst.K).sum(axis=2) == 1).all(axis=1)
    assert E[~feasible].min() > E[feasible].min()
    assert E[~feasible].min() > E[feasible].max()


def test_onehot_labels_and_guard():
    inst = graph(3, [(0, 1)], K=3)
    assert build_onehot_qubo(inst).variable_labels[:4] == ("n0_c0", "n0_c1", "n0_c2", "n1_c0")
    assert decode_onehot(inst, [1, 1, 0, 0, 1, 0, 0, 0, 1]) is None
    with pytest.raises(ValueError):
        build_onehot_qubo(inst.with_k(1))


# ------------------------------------------------------------ bipartition

def test_bipartition_energy_is_negative_gain(rng):
    inst = random_instance(7, rng, lam=0.3)
    build = bipartition_qubo_builder(inst)
    S = [0, 2, 3, 5, 6]
    q = build(S)
    # nodes outside S sit in their own community
    whole = assignment(inst, np.where(np.isin(np.arange(7), S), 0, 2)).objective
    for bits in itertools.product((0, 1), repeat=len(S)):
        lab = np.full(7, 2)
        lab[S] = bits
        gain = assignment(inst, lab).objective - whole
        assert energy(q, bits) == pytest.approx(-gain, abs=1e-10)


def test_bipartition_complement_symmetry(rng):
    inst = random_instance(6, rng)
    q = bipartition_qubo_builder(inst)(range(6))
    for x in rng.integers(0, 2, (10, 6)):
        assert energy(q, x) == pytest.approx(energy(q, 1 - x), abs=1e-12)
    assert energy(q, np.zeros(6)) == 0.0


def test_divisive_triangles_and_zero_weight():
    a = divisive(graph(6, TRIANGLES + [(2, 3, 0.1)], lam=0.0), brute_force)
    assert a.blocks() == [[0, 1, 2], [3, 4, 5]]
    zero = divisive(SrcdInstance(np.zeros((2, 2)), np.array([1.0, -1.0])), brute_force)
    assert zero.n_communities == 1


# ----------------------------------------------------------------- Louvain

def test_louvain_two_triangles():
    a = louvain(graph(6, TRIANGLES + [(2, 3, 0.1)]))
    assert a.blocks() == [[0, 1, 2], [3, 4, 5]]


def test_louvain_edge_cases():
    assert louvain(graph(3, [])).n_communities == 3
    assert louvain(SrcdInstance(np.zeros((0, 0)), np.zeros(0))).labels.size == 0


def test_louvain_deterministic_and_not_worse_than_singletons(rng):
    inst = random_instance(12, rng)
    a, b = louvain(inst, seed=3), louvain(inst, seed=3)
    assert np.array_equal(a.labels, b.labels)
    assert a.modularity >= modularity(inst, np.arange(12)) - 1e-12


def test_estimate_k_examples():
    assert estimate_k(graph(6, TRIANGLES + [(2, 3, 0.1)])) == 2
    four = [(a + o, b + o) for o in (0, 3, 6, 9) for a, b in [(0, 1), (1, 2), (0, 2)]]
    four += [(2, 3, 0.1), (5, 6, 0.1), (8, 9, 0.1)]
    assert estimate_k(graph(12, four)) == 4
