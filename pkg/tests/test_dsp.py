from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gridqopt.dsp import (
    DiscountSchedule,
    DspInstance,
    build_dsp_qubo,
    co2_objective,
    co2_reduction,
    decompose_solve,
    effective_consumption,
    energy_terms,
    random_instance,
    relative_savings,
    savings_cdf,
)
from gridqopt.qubo import energy
from gridqopt.solvers import brute_force


def toy():
    return DspInstance(np.array([[1.0, 2.0], [3.0, 1.0]]), np.array([100.0, 300.0]))


TOY_Z = np.array([[-0.5, 0.5], [0.0, 0.25]])


def test_instance_validation():
    with pytest.raises(ValueError):
        DspInstance(np.array([[-1.0]]), np.array([1.0]))
    with pytest.raises(ValueError):
        DspInstance(np.ones((2, 3)), np.ones(2))
    with pytest.raises(ValueError):
        DspInstance(np.ones((1, 2)), np.ones(2), n_categories=1)


def test_delta_intensity_sums_to_zero(rng):
    inst = random_instance(3, 7, rng)
    assert abs(inst.delta_intensity.sum()) < 1e-9


def test_json_roundtrip(rng):
    inst = random_instance(2, 4, rng, n_categories=3, w_aggregate=0.3)
    data = inst.to_dict()
    assert {"demand", "intensity", "elasticity", "n_categories", "z_max", "weights"} <= set(data)
    back = DspInstance.from_json(inst.to_json())
    q1, q2 = build_dsp_qubo(inst), build_dsp_qubo(back)
    assert q1 == q2


def test_labels_and_size():
    inst = DspInstance(np.ones((2, 3)), np.array([1.0, 2.0, 3.0]))
    q = build_dsp_qubo(inst)
    assert q.n_vars == 2 * 3 * 3
    assert q.variable_labels[:4] == ("c0_t0_k0", "c0_t0_k1", "c0_t0_k2", "c0_t1_k0")


def test_variable_guard():
    inst = DspInstance(np.ones((1, 2)), np.ones(2))
    object.__setattr__(inst, "demand", np.ones((2**18, 2)))
    object.__setattr__(inst, "elasticity", np.ones(2**18))
    with pytest.raises(ValueError):
        build_dsp_qubo(inst)


# ------------------------------------------------------------- evaluators

def test_effective_consumption_examples():
    inst = DspInstance(np.array([[2.0]]), np.array([1.0]))
    assert effective_consumption(inst, np.array([[-0.5]]))[0, 0] == pytest.approx(3.0)
    assert effective_consumption(inst, np.zeros((1, 1)))[0, 0] == 2.0
    zero = DspInstance(np.array([[2.0]]), np.array([1.0]), elasticity=np.array([0.0]))
    assert effective_consumption(zero, np.array([[0.4]]))[0, 0] == 2.0


def test_co2_reduction_examples():
    inst = toy()
    assert co2_reduction(inst, np.zeros((2, 2))) == 0.0
    assert co2_reduction(inst, TOY_Z) == pytest.approx(175.0)
    assert co2_reduction(inst, -TOY_Z) == pytest.approx(-175.0)
    assert co2_objective(inst, np.zeros((2, 2))) - co2_objective(inst, TOY_Z) == pytest.approx(175.0)


def test_constant_demand_zero_discount_gives_zero_objective(rng):
    inst = DspInstance(np.full((3, 5), 1.7), rng.uniform(100, 400, 5))
    assert abs(co2_objective(inst, np.zeros((3, 5)))) < 1e-9


def test_single_timestep_objective_constant():
    inst = DspInstance(np.array([[2.0]]), np.array([250.0]))
    vals = {co2_objective(inst, np.array([[z]])) for z in inst.encoding.values}
    assert vals == {0.0}


def test_relative_savings_examples():
    inst = toy()
    assert relative_savings(inst, np.zeros((2, 2))).tolist() == [0.0, 0.0]
    assert relative_savings(inst, np.full((2, 2), -0.5)) == pytest.approx([0.5, 0.5])
    assert relative_savings(inst, TOY_Z) == pytest.approx([-1 / 6, -1 / 16])
    s, frac = savings_cdf([0.3, -0.1, 0.2])
    assert s.tolist() == [-0.1, 0.2, 0.3] and frac[-1] == 1.0


def test_schedule_csv():
    text = DiscountSchedule(TOY_Z).to_csv()
    lines = text.splitlines()
    assert lines[0] == "customer,timestep,discount"
    assert lines[1] == "0,0,-0.5" and len(lines) == 5


# ------------------------------------------------------------ QUBO exactness

@given(st.integers(1, 4), st.integers(1, 5), st.sampled_from([2, 3, 5, 7]), st.integers(0, 2**31 - 1))
def test_qubo_energy_equals_direct_terms(n_c, n_t, n_k, seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(n_c, n_t, rng, n_categories=n_k,
                           elasticity=rng.uniform(0.2, 1.5, n_c),
                           w_conservation=float(rng.uniform(0, 3)), w_aggregate=float(rng.uniform(0, 3)))
    q = build_dsp_qubo(inst)
    for x in rng.integers(0, 2, (10, q.n_vars)):
        z = DiscountSchedule.from_bits(inst, x).z
        assert set(np.round(z.ravel(), 12)) <= set(np.round(inst.encoding.values, 12))
        direct = energy_terms(inst, z)["energy"]
        assert energy(q, x) == pytest.approx(direct, rel=1e-8, abs=1e-8)


def test_optimum_shifts_load_to_lowest_intensity():
    inst = random_instance(2, 4, np.random.default_rng(0), n_categories=3)
    r = brute_force(build_dsp_qubo(inst))
    z = DiscountSchedule.from_bits(inst, r.best_x).z
    change = (effective_consumption(inst, z) - inst.demand).sum(axis=0)
    t_green = int(np.argmin(inst.delta_intensity))
    assert change[t_green] > 0
    assert int(np.argmax(change)) == t_green
    assert co2_reduction(inst, z) > 0


def test_brute_force_never_worse_than_no_discount():
    rng = np.random.default_rng(3)
    for _ in range(10):
        inst = random_instance(2, 3, rng, n_categories=3)
        q = build_dsp_qubo(inst)
        r = brute_force(q)
        assert r.best_energy <= energy_terms(inst, np.zeros(inst.demand.shape))["energy"] + 1e-12
        assert energy(q, np.zeros(q.n_vars, dtype=int)) >= r.best_energy


def test_anticorrelation_without_aggregate_penalty():
    rng = np.random.default_rng(11)
    for _ in range(10):
        inst = random_instance(2, 4, rng, n_categories=3, w_aggregate=0.0)
        z = DiscountSchedule.from_bits(inst, brute_force(build_dsp_qubo(inst)).best_x).z
        change = (effective_consumption(inst, z) - inst.demand).sum(axis=0)
        assert change @ inst.delta_intensity <= 1e-12


def test_conservation_violation_shrinks_with_weight():
    inst0 = random_instance(2, 3, np.random.default_rng(4), n_categories=3, w_aggregate=0.0)
    viol = []
    for w in (0.1, 1.0, 10.0):
        inst = DspInstance(inst0.demand, inst0.intensity, n_categories=3, w_conservation=w,
                           w_aggregate=0.0)
        z = DiscountSchedule.from_bits(inst, brute_force(build_dsp_qubo(inst)).best_x).z
        viol.append(float(np.abs((inst.elasticity[:, None] * z * inst.demand).sum(axis=1)).sum()))
    assert viol[0] >= viol[1] >= viol[2]


# ------------------------------------------------------------ decomposition

def test_decompose_full_chunk_is_bit_identical(rng):
    inst = random_instance(3, 2, rng, n_categories=3)
    sched, rep = decompose_solve(inst, 3, brute_force)
    full = brute_force(build_dsp_qubo(inst))
    assert np.array_equal(rep.best_x, full.best_x)
    assert rep.solver_name == "decomp-brute_force-3"


def test_decompose_separable_without_coupling(rng):
    inst = random_instance(3, 3, rng, n_categories=3, w_aggregate=0.0)
    _, rep = decompose_solve(inst, 1, brute_force)
    full = brute_force(build_dsp_qubo(inst))
    assert abs(rep.best_energy - full.best_energy) < 1e-8


def test_decompose_gap_is_nonnegative(rng):
    inst = random_instance(4, 2, rng, n_categories=3)
    _, rep = decompose_solve(inst, 2, brute_force)
    full = brute_force(build_dsp_qubo(inst))
    assert rep.best_energy >= full.best_energy - 1e-12
    with pytest.raises(ValueError):
        decompose_solve(inst, 0, brute_force)
