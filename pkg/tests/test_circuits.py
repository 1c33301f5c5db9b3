import numpy as np
import pytest

from corrzne.circuits import (CircuitSpec, c1_unitaries, clifford_group_size, cpmg_circuit,
                              mirror_circuit, phase_key, qaoa_circuit, random_qaoa_circuit,
                              rb_circuit)
from corrzne.quantum import basis_state, unitary_distance, unitary_of

EYE4 = np.eye(4)


def _prob(circuit, bits):
    psi = unitary_of(circuit) @ basis_state(circuit.n_qubits, 0)
    return abs(psi[int(bits, 2)]) ** 2


def test_group_sizes():
    assert len({phase_key(u) for u in c1_unitaries()}) == 24
    assert clifford_group_size(1) == 24
    assert clifford_group_size(2) == 11520


@pytest.mark.parametrize("n", [1, 2])
def test_rb_is_identity(n):
    assert unitary_distance(unitary_of(rb_circuit(n, 0, 1)), np.eye(2**n)) < 1e-12
    for seed in range(10):
        c = rb_circuit(n, 3, seed)
        assert unitary_distance(unitary_of(c), np.eye(2**n)) < 1e-9
        assert _prob(c, "0" * n) == pytest.approx(1.0, abs=1e-9)


def test_rb_gate_counts():
    """Two-qubit RB at depth 2 averages about 27 single- and 5 two-qubit gates."""
    counts = np.array([rb_circuit(2, 2, s).gate_counts() for s in range(50)])
    one, two = counts.mean(axis=0)
    assert one == pytest.approx(27, rel=0.3)
    assert two == pytest.approx(5, rel=0.3)


def test_rb_seed_determinism():
    a, b = rb_circuit(2, 3, 9), rb_circuit(2, 3, 9)
    assert a.to_text() == b.to_text()
    assert a.to_text() != rb_circuit(2, 3, 10).to_text()


@pytest.mark.parametrize("n", [1, 2])
def test_mirror_targets(n):
    for seed in range(50):
        c, target = mirror_circuit(n, 4, seed)
        assert _prob(c, target) == pytest.approx(1.0, abs=1e-9)


def test_mirror_depth_zero_is_pauli_layer():
    c, target = mirror_circuit(2, 0, 3)
    flips = "".join("1" if g.label in ("X", "Y") else "0" for g in c.gates())
    assert target == flips


def test_mirror_gate_counts():
    counts = np.array([mirror_circuit(2, 4, s)[0].gate_counts() for s in range(50)])
    one, two = counts.mean(axis=0)
    assert one == pytest.approx(26, rel=0.3)
    assert two == pytest.approx(8, rel=0.3)


def test_qaoa_examples():
    zero = qaoa_circuit([0, 0], [0, 0])
    np.testing.assert_allclose(unitary_of(zero), EYE4, atol=1e-15)
    c = qaoa_circuit([0.3, 0.7], [0.5, 0.2])
    assert unitary_distance(unitary_of(c), EYE4) < 1e-9
    assert c.gate_counts() == (8, 4)
    assert _prob(random_qaoa_circuit(5), "00") == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError, match="two betas"):
        qaoa_circuit([0.1], [0.2, 0.3])


def test_qaoa_first_half_is_the_ansatz():
    """The first half equals prod_k exp(-i b_k H_M) exp(-i g_k H_C)."""
    from scipy.linalg import expm

    from corrzne.quantum import X, Z

    betas, gammas = [0.3, 0.7], [0.5, 0.2]
    hm = np.kron(X, np.eye(2)) + np.kron(np.eye(2), X)
    hc = np.kron(Z, Z)
    ref = np.eye(4)
    for b, g in zip(betas, gammas):
        ref = expm(-1j * b * hm) @ expm(-1j * g * hc) @ ref
    c = qaoa_circuit(betas, gammas)
    from corrzne.quantum import Circuit

    half = Circuit(2, c.moments[: c.depth // 2])
    assert unitary_distance(unitary_of(half), ref) < 1e-12


def test_cpmg_examples():
    c = cpmg_circuit(2, 2)
    assert c.depth == 10
    assert unitary_distance(unitary_of(c), np.eye(2)) < 1e-12
    x = np.array([[0, 1], [1, 0]])
    assert unitary_distance(unitary_of(cpmg_circuit(3, 1)), x) < 1e-12
    with pytest.raises(ValueError):
        cpmg_circuit(0, 2)


def test_spec_build():
    c, t = CircuitSpec("mirror", 2, 4, seed=3).build()
    assert (c.to_text(), t) == tuple(x.to_text() if hasattr(x, "to_text") else x
                                     for x in mirror_circuit(2, 4, 3))
    c, t = CircuitSpec("cpmg", 1, params={"delay": 2, "pulses": 2}).build()
    assert c.depth == 10 and t == "0"
    with pytest.raises(ValueError, match="unknown circuit family"):
        CircuitSpec("ghz").build()
    with pytest.raises(ValueError, match="unsupported qubit count"):
        rb_circuit(3, 1, 0)
