from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import naive_energy, random_qubo
from gridqopt.qubo import (
    QuboProblem,
    add_squared_penalty,
    build_encoding,
    compose,
    decode_value,
    encode_value,
    energy,
)


# ---------------------------------------------------------------- encoding

@pytest.mark.parametrize("n, bits, weights, step", [
    (5, 3, (1, 2, 1), 0.25),
    (2, 1, (1,), 1.0),
    (4, 2, (1, 2), 1.0),
])
def test_build_encoding_examples(n, bits, weights, step):
    lo, hi = {5: (-0.5, 0.5), 2: (-0.5, 0.5), 4: (0.0, 3.0)}[n]
    enc = build_encoding(n, lo, hi)
    assert enc.n_bits == bits
    assert enc.weights == weights
    assert enc.step == pytest.approx(step)


def test_build_encoding_rejects_bad_input():
    with pytest.raises(ValueError):
        build_encoding(1, 0, 1)
    with pytest.raises(ValueError):
        build_encoding(3, 1, 1)


@pytest.mark.parametrize("n", range(2, 65))
def test_encoding_sums_cover_categories_exactly(n):
    enc = build_encoding(n, -1.0, 1.0)
    sums = {sum(w * b for w, b in zip(enc.weights, bits))
            for bits in itertools.product((0, 1), repeat=enc.n_bits)}
    assert sums == set(range(n))
    assert sum(enc.weights) == n - 1
    for i in range(n):
        bits = encode_value(enc, i)
        assert decode_value(enc, bits) == pytest.approx(enc.lo + i * enc.step)


@pytest.mark.parametrize("bits, value", [((0, 0, 0), -0.5), ((1, 1, 0), 0.25), ((1, 1, 1), 0.5)])
def test_decode_value_examples(bits, value):
    enc = build_encoding(5, -0.5, 0.5)
    assert decode_value(enc, bits) == pytest.approx(value)


def test_decode_value_length_mismatch():
    enc = build_encoding(5, -0.5, 0.5)
    with pytest.raises(ValueError):
        decode_value(enc, (1, 0))


def test_encode_out_of_range():
    enc = build_encoding(5, -0.5, 0.5)
    with pytest.raises(ValueError):
        encode_value(enc, 5)


# ------------------------------------------------------------ energy / form

def test_energy_examples():
    assert energy(QuboProblem.from_terms(0, offset=2.5), []) == 2.5
    q = QuboProblem.from_terms(2, [1, -2], {(0, 1): 3}, offset=0.75)
    assert energy(q, (1, 1)) == pytest.approx(0.75 + 2)
    assert energy(q, (0, 0)) == 0.75


def test_energy_length_mismatch():
    q = QuboProblem.from_terms(2, [1, 1])
    with pytest.raises(ValueError):
        energy(q, [1])


def test_canonical_form_folds_and_merges():
    q = QuboProblem.from_terms(3, [0, 0, 0], {(1, 0): 2.0, (0, 1): 1.0, (2, 2): 5.0})
    assert q.quadratic == {(0, 1): 3.0}
    assert q.linear.tolist() == [0.0, 0.0, 5.0]
    with pytest.raises(IndexError):
        QuboProblem.from_terms(2, None, {(0, 2): 1.0})


@given(st.integers(1, 9), st.integers(0, 2**31 - 1))
def test_energy_matches_naive_oracle(n, seed):
    rng = np.random.default_rng(seed)
    q = random_qubo(n, rng, density=0.6, offset=rng.normal())
    X = rng.integers(0, 2, (8, n))
    batch = q.energies(X)
    for x, e in zip(X, batch):
        ref = naive_energy(q, x)
        assert energy(q, x) == pytest.approx(ref, rel=1e-12, abs=1e-12)
        assert e == pytest.approx(ref, rel=1e-12, abs=1e-12)


def test_from_dense_reads_xtmx(rng):
    M = rng.normal(size=(4, 4))
    q = QuboProblem.from_dense(M)
    for x in itertools.product((0, 1), repeat=4):
        x = np.array(x, dtype=float)
        assert energy(q, x) == pytest.approx(x @ M @ x)


def test_json_roundtrip_exact(rng):
    q = random_qubo(6, rng, density=0.5, offset=1 / 3).relabel([f"v{i}" for i in range(6)])
    back = QuboProblem.from_json(q.to_json())
    assert back == q
    assert set(q.to_dict()) == {"n_vars", "offset", "linear", "quadratic", "labels"}


def test_subproblem_clamps_others(rng):
    q = random_qubo(7, rng, offset=0.2)
    state = rng.integers(0, 2, 7)
    free = [1, 4, 5]
    sub = q.subproblem(free, state)
    for bits in itertools.product((0, 1), repeat=3):
        x = state.copy()
        x[free] = bits
        assert energy(sub, bits) == pytest.approx(energy(q, x))


# ---------------------------------------------------------------- penalties

def test_squared_penalty_weight_zero_is_identity(rng):
    q = random_qubo(3, rng)
    assert add_squared_penalty(q, [(0, 1.0)], -1.0, 0.0) is q
    with pytest.raises(ValueError):
        add_squared_penalty(q, [(0, 1.0)], 0.0, -1.0)


def test_squared_penalty_single_term():
    q = add_squared_penalty(QuboProblem.from_terms(1), [(0, 1.0)], -1.0, 1.0)
    assert q.linear.tolist() == [-1.0]
    assert q.offset == 1.0
    assert q.quadratic == {}


def test_squared_penalty_two_terms():
    q = add_squared_penalty(QuboProblem.from_terms(2), [(0, 1.0), (1, 1.0)], 0.0, 1.0)
    assert q.linear.tolist() == [1.0, 1.0]
    assert q.quadratic == {(0, 1): 2.0}


@given(st.integers(1, 8), st.integers(0, 2**31 - 1))
def test_penalty_exactness(n, seed):
    rng = np.random.default_rng(seed)
    q = random_qubo(n, rng, density=0.5)
    k = int(rng.integers(1, n + 1))
    idx = rng.integers(0, n, k)
    coef = rng.normal(size=k)
    const, w = float(rng.normal()), float(rng.uniform(0, 3))
    terms = list(zip(idx.tolist(), coef.tolist()))
    p = add_squared_penalty(q, terms, const, w)
    for x in rng.integers(0, 2, (10, n)):
        lin = sum(c * x[i] for i, c in terms) + const
        assert energy(p, x) == pytest.approx(energy(q, x) + w * lin**2, rel=1e-9, abs=1e-9)


def test_compose_examples(rng):
    q = random_qubo(4, rng, offset=1.5)
    p = random_qubo(4, rng)
    assert compose(q, []) == q
    assert compose(q, [(p, 0.0)]) == q
    doubled = compose(q, [(q, 1.0)])
    assert np.allclose(doubled.linear, 2 * q.linear)
    assert np.allclose(doubled.vals, 2 * q.vals)
    assert doubled.offset == 2 * q.offset
    with pytest.raises(ValueError):
        compose(q, [(random_qubo(3, rng), 1.0)])
