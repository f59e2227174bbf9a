from __future__ import annotations

import numpy as np
import pytest

from qramkit.circuit import Gate
from qramkit.cliffordlab import (
    PHI2_N2_LINEAR_CHAIN,
    PHI2_N2_STABILIZERS,
    PauliString,
    StabilizerTableau,
    adversarial_dataset,
    conjugation_identity_check,
    dense_expectation,
    hierarchy_level,
    in_hierarchy_level,
    loading_operator,
    multi_controlled_z,
    parse_onebased,
    qram_dense,
    t_n,
    tableau_apply,
    tableau_to_dense,
    verify_phi2_linear_graph,
)
from qramkit.densesim import DenseState, apply_gate, fidelity, measure_pauli, pauli_matrix


def test_pauli_algebra():
    X = PauliString.from_label("X")
    Z = PauliString.from_label("Z")
    Y = PauliString.from_label("Y")
    assert np.allclose((X * Z).matrix(), pauli_matrix("X") @ pauli_matrix("Z"))
    assert np.allclose(Y.matrix(), pauli_matrix("Y"))
    assert not X.commutes(Z)
    assert PauliString.from_label("XX").commutes(PauliString.from_label("ZZ"))
    assert str(PauliString.from_label("XZ", -1)) == "-XZ"
    assert Y.squared_sign() == 1


def test_parse_onebased():
    p = parse_onebased("X6Z3X5", 8)
    assert p.label() == "IIZIXXII"
    with pytest.raises(ValueError):
        parse_onebased("X1Z1", 2)


CLIFFORD_KINDS = ["H", "CNOT", "CZ", "X", "Z", "SWAP"]


@pytest.mark.parametrize("seed", range(8))
def test_tableau_matches_dense(seed):
    rng = np.random.default_rng(seed)
    n = 5
    t = StabilizerTableau(n)
    s = DenseState.zero(n)
    for _ in range(40):
        kind = CLIFFORD_KINDS[rng.integers(len(CLIFFORD_KINDS))]
        k = 1 if kind in ("H", "X", "Z") else 2
        g = Gate(kind, tuple(int(q) for q in rng.choice(n, k, replace=False)))
        tableau_apply(t, g)
        s = apply_gate(s, g)
    for g in t.generators:
        assert dense_expectation(s, g) == pytest.approx(1.0)
    assert fidelity(tableau_to_dense(t), s) == pytest.approx(1.0)
    # a Z measurement on qubit 0 agrees with the dense projection
    p = PauliString.from_label("ZIIII")
    e = dense_expectation(s, p).real
    v = 1 if e > -0.5 else -1
    t.measure(p, forced=v)
    _, post, prob = measure_pauli(s, 0, "Z", forced=v)
    assert prob == pytest.approx((1 + v * e) / 2)
    assert dense_expectation(tableau_to_dense(t), p) == pytest.approx(v)


def test_tableau_peek_and_measure():
    t = StabilizerTableau(2)
    t.h(0)
    t.cnot(0, 1)
    assert t.peek(PauliString.from_label("XX")) == 1
    assert t.peek(PauliString.from_label("ZZ")) == 1
    assert t.peek(PauliString.from_label("ZI")) == 0
    rng = np.random.default_rng(0)
    v = t.measure(PauliString.from_label("ZI"), rng)
    assert t.peek(PauliString.from_label("IZ")) == v
    with pytest.raises(ValueError):
        t.measure(PauliString.from_label("ZI"), forced=-v)


def test_tableau_rejects_non_clifford():
    with pytest.raises(ValueError):
        tableau_apply(StabilizerTableau(3), Gate("TOFFOLI", (0, 1, 2)))


def test_hierarchy_levels():
    assert [hierarchy_level(multi_controlled_z(k)) for k in range(4)] == [0, 1, 2, 3]
    H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    assert hierarchy_level(H) == 1
    assert in_hierarchy_level(pauli_matrix("X"), 0)
    assert not in_hierarchy_level(H, 0)


def test_t_n_as_written():
    # exp(-i Z pi / 2**n) is diag(1, i) up to phase at n = 2, the S gate
    assert hierarchy_level(t_n(1)) == 0
    assert hierarchy_level(t_n(2)) == 1
    assert hierarchy_level(t_n(3)) == 2


def test_hierarchy_input_checks():
    with pytest.raises(ValueError):
        hierarchy_level(np.ones((2, 2)))
    with pytest.raises(ValueError):
        hierarchy_level(np.eye(3))


def test_qram_dense_and_loading():
    U = qram_dense(4, (1, 0, 0, 1))
    assert np.allclose(U @ U.T, np.eye(8))
    assert U[3 + 4, 3] == 1 and U[1, 1] == 1
    W = loading_operator((1, 0, 1))
    assert np.allclose(np.diag(W)[:4], [1, -1, 1, -1])
    assert adversarial_dataset(4) == (1, 1, 1, 0)


@pytest.mark.parametrize("N", [2, 4, 8])
def test_conjugation_identity(N):
    assert conjugation_identity_check(N)


def test_adversarial_qram_level():
    assert hierarchy_level(qram_dense(2, adversarial_dataset(2))) == 1
    assert hierarchy_level(qram_dense(4, adversarial_dataset(4))) == 2


def test_graph_state_lists():
    rep = verify_phi2_linear_graph()
    signs = [rep.pre_measurement[w] for w in PHI2_N2_STABILIZERS]
    assert signs[:7] == [1] * 7
    assert rep.ok
    assert set(rep.post_chain) == set(PHI2_N2_LINEAR_CHAIN)


@pytest.mark.parametrize("outcome", [1, -1])
def test_graph_state_chain_both_outcomes(outcome):
    assert verify_phi2_linear_graph(forced_outcome=outcome).ok
