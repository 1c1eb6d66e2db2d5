import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from arcbench.circuit import ArcOptions, build_arc
from arcbench.code_graph import LinkGraph
from arcbench.experiment import DEMO_202_LINKS
from arcbench.layouts import linear_links
from arcbench.simulator import (
    CountsRecord,
    Fault,
    NoiseModel,
    TableauSimulator,
    fault_locations,
    propagate_faults,
    sample_bits,
    simulate,
    simulate_with_fault,
)

from .statevector import StateVector


# -- tableau against a dense statevector ------------------------------------

gate_strategy = st.one_of(
    st.tuples(st.sampled_from(["H", "S", "SDG", "X", "Y", "Z"]), st.integers(0, 3)),
    st.tuples(st.just("CX"), st.permutations(range(4)).map(lambda p: tuple(p[:2]))),
)


@settings(max_examples=60, deadline=None)
@given(st.lists(gate_strategy, max_size=25), st.integers(0, 2**16))
def test_tableau_matches_statevector(gates, seed):
    n = 4
    tab = TableauSimulator(n, np.random.default_rng(seed))
    sv = StateVector(n)
    for name, arg in gates:
        if name == "CX":
            tab.cx(*arg)
            sv.cx(*arg)
        else:
            {"H": tab.h, "S": tab.s, "SDG": tab.sdg}.get(name, lambda a, p=name: tab.pauli(a, p))(arg)
            sv.gate(name, arg)
    rng = np.random.default_rng(seed)
    for q in range(n):
        p1 = sv.prob_one(q)
        if tab.peek_deterministic(q):
            assert p1 == pytest.approx(round(p1), abs=1e-9)
            assert tab.measure(q) == round(p1)
            sv.measure(q, rng)
        else:
            assert p1 == pytest.approx(0.5)
            out = sv.measure(q, rng)
            assert tab.measure(q, forced=out) == out


# -- frame sampler against tableau sampler ----------------------------------


@pytest.mark.parametrize("resets", [True, False])
def test_frame_equals_tableau_bit_exact(resets):
    c = build_arc(linear_links(4), options=ArcOptions(T=3, basis="xz", resets=resets, run_202=False))["xz"]
    noise = NoiseModel(p1=0.02, p2=0.03, p_meas=0.05)
    a = sample_bits(c, noise, 300, seed=11, method="frame", batch_size=128)
    b = sample_bits(c, noise, 300, seed=11, method="tableau", batch_size=128)
    assert np.array_equal(a, b)


def test_frame_and_tableau_agree_statistically_with_202():
    g = LinkGraph(DEMO_202_LINKS)
    c = build_arc(g, options=ArcOptions(T=10, basis="xz", links_202=(1,)))["xz"]
    from arcbench.detection import build_detectors

    det = build_detectors(c)
    noise = NoiseModel.uniform(0.02)
    ea = det.evaluate(sample_bits(c, noise, 3000, seed=2, method="frame")).mean(0)
    eb = det.evaluate(sample_bits(c, noise, 3000, seed=3, method="tableau")).mean(0)
    sigma = np.sqrt(np.maximum(ea, 1e-3) * (1 - ea) / 3000)
    assert np.all(np.abs(ea - eb) < 5 * np.sqrt(2) * sigma + 1e-3)


def test_sampling_deterministic_and_worker_independent():
    c = build_arc(linear_links(3), options=ArcOptions(T=4, basis="xz", run_202=False))["xz"]
    noise = NoiseModel.uniform(0.05)
    a = simulate(c, noise, 3000, seed=5)
    b = simulate(c, noise, 3000, seed=5)
    w = simulate(c, noise, 3000, seed=5, workers=2)
    assert a.counts == b.counts == w.counts
    assert simulate(c, noise, 3000, seed=6).counts != a.counts
    assert sum(a.counts.values()) == 3000
    assert CountsRecord.from_json(a.to_json()) == a


# -- channel statistics (binomial oracles) -----------------------------------


def within(freq, p, n, k=4.0):
    return abs(freq - p) <= k * np.sqrt(p * (1 - p) / n)


def test_measurement_flip_rate():
    # |+> measured in the X basis, only measurement flips
    c = build_arc(LinkGraph(((0, 1, 2),)), options=ArcOptions(T=0, basis="xx", run_202=False))["xx"]
    n = 100_000
    bits = sample_bits(c, NoiseModel(p_meas=0.1), n, seed=3)
    for q in (0, 2):
        f = bits[:, c.final_bits[q]].mean()
        assert abs(f - 0.1) <= 0.003


def test_single_qubit_depolarizing_rate():
    # two H gates per qubit, each followed by depolarizing noise; two of the
    # three Paulis flip the X-basis readout each time
    c = build_arc(LinkGraph(((0, 1, 2),)), options=ArcOptions(T=0, basis="xx", run_202=False))["xx"]
    n = 100_000
    q = 2 * 0.15 / 3
    expected = 2 * q * (1 - q)
    bits = sample_bits(c, NoiseModel(p1=0.15), n, seed=4)
    for qb in (0, 2):
        assert within(bits[:, c.final_bits[qb]].mean(), expected, n)


def test_two_qubit_depolarizing_rate():
    # one round on a z-basis link: each CX is followed by one of 15 Paulis;
    # 8 of them carry X or Y on the auxiliary
    c = build_arc(LinkGraph(((0, 1, 2),)), options=ArcOptions(T=1, basis="zz", run_202=False))["zz"]
    n = 100_000
    r = 8 * 0.15 / 15
    bits = sample_bits(c, NoiseModel(p2=0.15), n, seed=5)
    aux_bit = c.round_bits[0][0]
    assert within(bits[:, aux_bit].mean(), 2 * r * (1 - r), n)
    for qb in (0, 2):
        assert within(bits[:, c.final_bits[qb]].mean(), r, n)


def test_noise_model_conventions():
    assert NoiseModel.uniform(0.01) == NoiseModel(0.01, 0.01, 0.01)
    m = NoiseModel.uniform(0.016, convention="mixing")
    assert (m.p1, m.p2, m.p_meas) == pytest.approx((0.012, 0.015, 0.016))
    with pytest.raises(ValueError):
        NoiseModel(p1=1.5)
    with pytest.raises(ValueError):
        NoiseModel.uniform(0.1, convention="other")


# -- single faults -----------------------------------------------------------


def test_no_fault_empty(small_circuits):
    assert simulate_with_fault(small_circuits["zx"]) == frozenset()


def test_middle_qubit_x_between_rounds():
    c = build_arc(linear_links(3), options=ArcOptions(T=2, basis="zz", run_202=False))["zz"]
    end0 = max(k for k, op in enumerate(c.ops) if op.round == 0 and op.name != "BARRIER")
    delta = simulate_with_fault(c, Fault(op_index=end0, qubit=2, pauli="X"))
    assert delta == {*c.round_bits[1], c.final_bits[2]}
    # the final bit of qubit 2 enters the parities of both links
    assert all(2 in c.graph.endpoints(link) for link in (0, 1))


def test_aux_flip_before_measurement_with_resets():
    c = build_arc(linear_links(3), options=ArcOptions(T=3, basis="xz", run_202=False))["xz"]
    for r in range(3):
        (m,) = [k for k, op in enumerate(c.ops) if op.name == "M" and op.round == r]
        for aux, bit in zip(c.ops[m].qubits, c.ops[m].bits):
            assert simulate_with_fault(c, Fault(op_index=m, qubit=aux, pauli="X")) == {bit}


def test_invalid_fault_location(small_circuits):
    c = small_circuits["zx"]
    with pytest.raises(ValueError):
        simulate_with_fault(c, Fault(op_index=len(c.ops), qubit=0))
    with pytest.raises(ValueError):
        simulate_with_fault(c, Fault(op_index=0, qubit=99))


def test_fault_propagation_linear():
    c = build_arc(LinkGraph(DEMO_202_LINKS), options=ArcOptions(T=10, basis="yx", links_202=(1,)))["yx"]
    locs = fault_locations(c)
    faults = []
    for i, q, _ in locs[::7]:
        faults += [Fault(op_index=i, qubit=q, pauli=p) for p in "XYZ"]
    rows = propagate_faults(c, faults)
    for k in range(0, len(faults), 3):
        assert np.array_equal(rows[k + 1], rows[k] ^ rows[k + 2])


def test_commuting_measurements_repeat_in_202():
    g = LinkGraph(DEMO_202_LINKS)
    c = build_arc(g, options=ArcOptions(T=10, basis="xz", links_202=(1,)))["xz"]
    bits = sample_bits(c, NoiseModel(), 200, seed=9, method="tableau")
    std = [b for b, info in enumerate(c.bits) if info.link == 1 and info.kind == "standard" and info.round <= 8]
    conj = [b for b, info in enumerate(c.bits) if info.link == 1 and info.kind == "conjugate"]
    assert len(std) == 5 and len(conj) == 4
    assert np.all(bits[:, std] == bits[:, std[:1]])
    assert np.all(bits[:, conj] == bits[:, conj[:1]])
    assert 0 < bits[:, conj[0]].mean() < 1  # the first conjugate outcome is random
