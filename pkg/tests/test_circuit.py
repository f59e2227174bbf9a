from __future__ import annotations

import numpy as np
import pytest

from qramkit.circuit import (
    Circuit,
    Gate,
    LayeredCircuit,
    address_inputs,
    build_nohe_parallel,
    build_nohe_sequential,
    count_costs,
    cs_bar,
    cs_layer_pairs,
    expand_gadgets,
    fredkin,
    from_text,
    inverse,
    nohe_table,
    register_size,
    simulate_bits,
    to_text,
    toffoli_closed_form,
    verify_equivalence,
)


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate("CNOT", (0,))
    with pytest.raises(ValueError):
        Gate("SWAP", (1, 1))
    with pytest.raises(ValueError):
        Gate("RX", (0,))
    with pytest.raises(ValueError):
        Circuit((Gate("X", (3,)),), 3)
    with pytest.raises(ValueError):
        LayeredCircuit(((Gate("X", (0,)), Gate("CNOT", (0, 1))),), 2)


def test_cs_bar_examples():
    assert cs_bar(0, 1) == [fredkin(0, 1, 2)]
    assert cs_bar(1, 2) == [fredkin(1, 3, 5), fredkin(2, 4, 6)]
    with pytest.raises(ValueError):
        cs_bar(2, 2)


def test_fredkin_truth_table():
    every = ((np.arange(8)[None, :] >> np.arange(3)[:, None]) & 1).astype(bool)
    out = simulate_bits(Circuit((fredkin(0, 1, 2),), 3), every)
    for i in range(8):
        a, b, c = every[:, i]
        want = (a, c, b) if a else (a, b, c)
        assert tuple(out[:, i]) == want


def test_gadget_matches_fredkin_on_zero_target():
    c = Circuit((fredkin(0, 1, 2),), 3)
    e = expand_gadgets(c)
    assert [g.kind for g in e.gates] == ["TOFFOLI", "CNOT"]
    assert e.gates[1].qubits == (2, 1)
    inputs = np.array([[0, 1, 0, 1], [0, 0, 1, 1], [0, 0, 0, 0]], dtype=bool)
    assert np.array_equal(simulate_bits(c, inputs), simulate_bits(e, inputs))


def test_wrong_gadget_order_fails():
    # CNOT before TOFFOLI breaks the swap on |1,1,0>
    wrong = Circuit((Gate("CNOT", (2, 1)), Gate("TOFFOLI", (0, 1, 2))), 3)
    out = simulate_bits(wrong, np.array([[1], [1], [0]], dtype=bool))
    assert tuple(out[:, 0]) != (True, False, True)


@pytest.mark.parametrize("N", [2, 4, 8, 16, 32, 64, 128, 256, 512, 1024])
def test_nohe_equivalence(N):
    rep = verify_equivalence(N)
    assert rep.ok, rep.detail


@pytest.mark.parametrize("N", [2, 4, 8])
def test_orderings_agree_on_every_input(N):
    rep = verify_equivalence(N, all_inputs=True)
    assert rep.ok and rep.inputs_checked == 1 << (N - 1)


def test_with_bus_circuit_encodes_bus_sector():
    for N in (2, 4, 8, 16):
        c = build_nohe_parallel(N, with_bus=True)
        assert c.qubit_count == register_size(N, True) == 2 * N - 1
        out = simulate_bits(c, address_inputs(N, True))
        assert np.array_equal(out[: N - 1], nohe_table(N))
        # bus bit 0 keeps the bus sector cold
        assert not out[N - 1 :].any()


def test_cs_layer_pairs_rule():
    assert cs_layer_pairs(1) == [[(0, 1)]]
    assert cs_layer_pairs(3) == [[(0, 1)], [(0, 2)], [(0, 3), (1, 2)], [(1, 3)], [(2, 3)]]
    for s in range(1, 8):
        blocks = [p for layer in cs_layer_pairs(s) for p in layer]
        assert sorted(blocks) == [(K, J) for K in range(s) for J in range(K + 1, s + 1)]


@pytest.mark.parametrize("n", range(2, 13))
def test_depth_and_disjointness(n):
    N = 1 << n
    for bus, want in ((False, 2 * n - 3), (True, 2 * n - 1)):
        c = build_nohe_parallel(N, bus)
        assert c.depth - c.swap_layers == want
        for layer in c.layers:
            qs = [q for g in layer for q in g.qubits]
            assert len(qs) == len(set(qs))


def test_swap_stage_layers():
    assert build_nohe_parallel(4).swap_layers == 0
    assert build_nohe_parallel(8).swap_layers == 1
    assert build_nohe_parallel(16).swap_layers == 2


@pytest.mark.parametrize("n", range(1, 13))
def test_cost_formulas(n):
    N = 1 << n
    for bus in (False, True):
        r = count_costs(N, bus)
        assert r.toffoli_count == toffoli_closed_form(N, bus)
        assert r.t_count == 4 * r.toffoli_count
    assert toffoli_closed_form(N) == N - n - 1
    assert toffoli_closed_form(N, True) == 2 * N - n - 2


def test_sequential_gate_count():
    c = build_nohe_sequential(16)
    assert sum(g.kind == "FREDKIN" for g in c.gates) == 16 - 4 - 1
    assert sum(g.kind == "SWAP" for g in c.gates) == 2


def test_inverse_undoes_encoding():
    N = 16
    c = build_nohe_parallel(N)
    inputs = address_inputs(N)
    back = simulate_bits(inverse(c), simulate_bits(c, inputs))
    assert np.array_equal(back, inputs)


def test_text_roundtrip():
    c = expand_gadgets(build_nohe_parallel(8, True))
    back = from_text(to_text(c), c.qubit_count)
    assert back.layers == c.layers
    s = build_nohe_sequential(8)
    assert from_text(to_text(s), s.qubit_count).gates == s.gates


def test_simulate_rejects_h():
    with pytest.raises(ValueError):
        simulate_bits(Circuit((Gate("H", (0,)),), 1), np.zeros((1, 1), dtype=bool))
