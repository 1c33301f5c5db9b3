import numpy as np
import pytest
from hypothesis import given, strategies as st

from corrzne import rng as rngmod
from corrzne.quantum import (MAX_QUBITS, Circuit, Gate, Moment, Observable, X, apply_dephasing,
                             apply_moment, basis_state, expectation, gate, gate_matrix,
                             pauli_basis, sample_outcome, unitary_distance, unitary_of)

PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
BELL = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


def test_unitary_examples():
    np.testing.assert_array_equal(unitary_of(Circuit(2)), np.eye(4))
    np.testing.assert_array_equal(unitary_of(Circuit(1, [[gate("X", 0)]])), X)
    c = Circuit.from_gates(2, [gate("H", 0), gate("CNOT", 0, 1)])
    np.testing.assert_allclose(unitary_of(c) @ basis_state(2, 0), BELL, atol=1e-15)


def test_big_endian_order():
    """Qubit 0 is the most significant bit."""
    c = Circuit(2, [[gate("X", 0)]])
    np.testing.assert_array_equal(unitary_of(c) @ basis_state(2, "00"), basis_state(2, "10"))


def test_composition_order(rng):
    """unitary_of(c1 + c2) = U(c2) U(c1)."""
    c1 = Circuit.from_gates(2, [gate("H", 0), gate("RY", 1, params=0.3), gate("CNOT", 1, 0)])
    c2 = Circuit.from_gates(2, [gate("S", 1), gate("CZ", 0, 1), gate("RX", 0, params=1.1)])
    np.testing.assert_allclose(unitary_of(c1 + c2), unitary_of(c2) @ unitary_of(c1), atol=1e-14)


def test_apply_moment_examples():
    np.testing.assert_array_equal(apply_moment(PLUS, Moment((gate("I", 0),)), 1), PLUS)
    np.testing.assert_array_equal(apply_moment(basis_state(1, 0), Moment((gate("X", 0),)), 1),
                                  basis_state(1, 1))
    psi = np.kron(PLUS, basis_state(1, 0))
    np.testing.assert_allclose(apply_moment(psi, Moment((gate("CNOT", 0, 1),)), 2), BELL,
                               atol=1e-15)
    with pytest.raises(ValueError, match="out of range"):
        apply_moment(basis_state(1, 0), Moment((gate("CNOT", 0, 1),)), 1)


def test_dephasing_examples():
    np.testing.assert_array_equal(apply_dephasing(PLUS, [0.0]), PLUS)
    z = apply_dephasing(basis_state(1, 0), [0.7])
    assert abs(z[0]) == pytest.approx(1.0)
    out = apply_dephasing(PLUS, [np.pi / 8])
    assert expectation(out, Observable.pauli("X")) == pytest.approx(np.cos(np.pi / 4), abs=1e-15)
    with pytest.raises(ValueError, match="expected 2 angles"):
        apply_dephasing(basis_state(2, 0), [0.1])


def test_norm_preserved_under_random_applications(rng):
    """1e4 random moments and kicks keep the state normalised."""
    moments = [Moment((gate("H", 0), gate("RY", 1, params=0.4))), Moment((gate("CNOT", 0, 1),)),
               Moment((gate("S", 0), gate("RX", 1, params=2.0)))]
    psi = basis_state(2, 0)
    for k in range(10_000):
        psi = apply_moment(psi, moments[k % 3], 2)
        psi = apply_dephasing(psi, rng.normal(0, 1, 2))
    assert abs(np.linalg.norm(psi) - 1) < 1e-9


def test_expectation_examples():
    assert expectation(basis_state(1, 0), Observable.projector("0")) == 1.0
    assert expectation(PLUS, Observable.pauli("Z")) == pytest.approx(0.0, abs=1e-16)
    assert expectation(BELL, Observable.projector("00")) == pytest.approx(0.5)
    with pytest.raises(ValueError, match="dimensions"):
        expectation(BELL, Observable.pauli("Z"))


def test_sample_outcome():
    obs = Observable.projector("0")
    stream = rngmod.Stream(rngmod.StreamId(1, (2,)))
    assert all(sample_outcome(basis_state(1, 0), obs, stream) == 1 for _ in range(50))
    assert all(sample_outcome(basis_state(1, 1), obs, stream) == 0 for _ in range(50))
    draws = [sample_outcome(PLUS, obs, stream) for _ in range(3000)]
    assert abs(np.mean(draws) - 0.5) < 3 * np.sqrt(0.25 / 3000)
    with pytest.raises(ValueError, match="projector"):
        sample_outcome(PLUS, Observable.pauli("X"), 0.3)


@pytest.mark.parametrize("n", [1, 2])
def test_pauli_basis_orthonormal(n):
    b = pauli_basis(n)
    assert len(b.labels) == 4**n - 1
    gram = np.einsum("aij,bji->ab", b.matrices, b.matrices) / 2**n
    assert np.max(np.abs(gram - np.eye(len(b.labels)))) < 1e-12
    assert np.allclose(np.einsum("aii->a", b.matrices), 0)


def test_gate_validation():
    with pytest.raises(ValueError, match="unknown gate"):
        gate("FOO", 0)
    with pytest.raises(ValueError, match="distinct targets"):
        gate("CNOT", 1, 1)
    with pytest.raises(ValueError, match="not unitary"):
        Gate("U", (0,), (1.0, 0, 1.0, 0, 0, 0, 1.0, 0))
    with pytest.raises(ValueError, match="disjoint"):
        Moment((gate("X", 0), gate("CNOT", 0, 1)))
    with pytest.raises(ValueError):
        Circuit(MAX_QUBITS + 1)
    with pytest.raises(ValueError, match="out of range"):
        Circuit(1, [[gate("CNOT", 0, 1)]])


@given(st.floats(-10, 10))
def test_rotation_adjoint(theta):
    g = gate("RX", 0, params=theta)
    np.testing.assert_allclose(g.adjoint().matrix @ g.matrix, np.eye(2), atol=1e-14)
    rzz = gate_matrix("RZZ", (theta,))
    zz = np.diag([1, -1, -1, 1])
    np.testing.assert_allclose(rzz, np.diag(np.exp(-0.5j * theta * np.diag(zz))), atol=1e-15)


def test_text_round_trip():
    c = Circuit.from_gates(2, [gate("H", 0), gate("RZZ", 0, 1, params=0.25), gate("S", 1),
                               Gate.from_matrix(gate_matrix("RY", (0.3,)), (0,))])
    back = Circuit.from_text(c.to_text())
    assert back.depth == c.depth
    assert unitary_distance(unitary_of(back), unitary_of(c)) < 1e-15


def test_text_greedy_packing_and_errors():
    c = Circuit.from_text("QUBITS 2\nGATE H 0\nGATE X 1  # same moment\nGATE CNOT 0 1\n")
    assert c.depth == 2
    with pytest.raises(ValueError, match="line 2"):
        Circuit.from_text("QUBITS 1\nGATE RX 0 notanumber\n")
