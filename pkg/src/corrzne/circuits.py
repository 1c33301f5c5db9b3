"""Seeded generators for randomized benchmarking, mirror, QAOA and CPMG circuits.

Native single-qubit pulses are ``X``, ``Y`` and ``RX/RY(+-pi/2)``; the
two-qubit native gate is ``CNOT(0 -> 1)`` (``RZZ`` for QAOA).

Two-qubit Cliffords are compiled in the usual four classes, each preceded
by a pair of single-qubit Cliffords:

* single-qubit class: ``C1 x C1`` (576 elements)
* CNOT class: ``CNOT`` then ``S1 x S1`` (5184)
* iSWAP class: ``CNOT, H x H, CNOT, H x H`` then ``S1 x S1`` (5184)
* SWAP class: three alternating CNOTs (576)

where ``S1`` is the order-3 subgroup cycling ``X -> Y -> Z``.
"""
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .quantum import Circuit, Gate, Moment, basis_state, gate, unitary_of

HALF = math.pi / 2

# pulse names -> (label, params)
_PULSES = {
    "X": ("X", ()),
    "Y": ("Y", ()),
    "X/2": ("RX", (HALF,)),
    "-X/2": ("RX", (-HALF,)),
    "Y/2": ("RY", (HALF,)),
    "-Y/2": ("RY", (-HALF,)),
}

#: the 24 single-qubit Cliffords as pulse sequences in time order
C1_PULSES = (
    (), ("X",), ("Y",), ("Y", "X"),
    ("X/2", "Y/2"), ("X/2", "-Y/2"), ("-X/2", "Y/2"), ("-X/2", "-Y/2"),
    ("Y/2", "X/2"), ("Y/2", "-X/2"), ("-Y/2", "X/2"), ("-Y/2", "-X/2"),
    ("X/2",), ("-X/2",), ("Y/2",), ("-Y/2",),
    ("-X/2", "Y/2", "X/2"), ("-X/2", "-Y/2", "X/2"),
    ("X", "Y/2"), ("X", "-Y/2"), ("Y", "X/2"), ("Y", "-X/2"),
    ("X/2", "Y/2", "X/2"), ("-X/2", "Y/2", "-X/2"),
)
FAMILIES = ("rb", "mirror", "qaoa", "cpmg")


def _pulse_gates(pulses, q):
    return [gate(_PULSES[p][0], q, params=_PULSES[p][1]) for p in pulses]


def _seq_unitary(gates, n):
    u = np.eye(2**n, dtype=complex)
    for g in gates:
        u = unitary_of(Circuit(n, (Moment((g,)),))) @ u
    return u


def phase_key(u, decimals=6):
    """Hashable key identifying ``u`` up to a global phase."""
    flat = np.asarray(u, dtype=complex).ravel()
    k = int(np.argmax(np.abs(flat) > 1e-6))
    v = flat * (abs(flat[k]) / flat[k])
    v = np.round(v, decimals) + (0.0 + 0.0j)
    return v.tobytes()


@lru_cache(maxsize=None)
def c1_unitaries():
    return np.stack([_seq_unitary(_pulse_gates(p, 0), 1) for p in C1_PULSES])


@lru_cache(maxsize=None)
def _c1_index():
    return {phase_key(u): i for i, u in enumerate(c1_unitaries())}


def c1_inverse(i):
    return _c1_index()[phase_key(c1_unitaries()[i].conj().T)]


@lru_cache(maxsize=None)
def _s1_indices():
    """C1 indices of the cyclic subgroup ``{I, X->Y->Z, X->Z->Y}``."""
    us = c1_unitaries()
    paulis = [np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])]
    found = {}
    for i, u in enumerate(us):
        images = [u @ p @ u.conj().T for p in paulis]
        if np.allclose(images[0], paulis[1]) and np.allclose(images[1], paulis[2]):
            found[1] = i
        if np.allclose(images[0], paulis[2]) and np.allclose(images[2], paulis[1]):
            found[2] = i
    return (0, found[1], found[2])


def _c2_layer(a, b):
    return [(p, 0) for p in C1_PULSES[a]] + [(p, 1) for p in C1_PULSES[b]]


_H_PULSES = ("Y/2", "X")


def _c2_elements():
    cnot = [("CNOT", None)]
    hh = [(p, 0) for p in _H_PULSES] + [(p, 1) for p in _H_PULSES]
    s1 = _s1_indices()
    out = []
    pairs = [(a, b) for a in range(24) for b in range(24)]
    for a, b in pairs:
        out.append(_c2_layer(a, b))
    for core in (cnot, cnot + hh + cnot + hh):
        for a, b in pairs:
            for s in s1:
                for t in s1:
                    out.append(_c2_layer(a, b) + core + _c2_layer(s, t))
    swap = cnot + hh + cnot + hh + cnot
    for a, b in pairs:
        out.append(_c2_layer(a, b) + swap)
    return out


def _c2_gates(seq):
    gates = []
    for p, q in seq:
        if p == "CNOT":
            gates.append(gate("CNOT", 0, 1))
        else:
            gates.extend(_pulse_gates((p,), q))
    return gates


@lru_cache(maxsize=None)
def c2_table():
    """Pulse sequences and unitaries of the 11520 two-qubit Cliffords."""
    seqs = _c2_elements()
    cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    lookup = {p: _seq_unitary(_pulse_gates((p,), 0), 1) for p in _PULSES}
    eye = np.eye(2)
    units = np.empty((len(seqs), 4, 4), dtype=complex)
    for i, seq in enumerate(seqs):
        u = np.eye(4, dtype=complex)
        for p, q in seq:
            if p == "CNOT":
                g = cnot
            else:
                g = np.kron(lookup[p], eye) if q == 0 else np.kron(eye, lookup[p])
            u = g @ u
        units[i] = u
    index = {}
    for i, u in enumerate(units):
        index.setdefault(phase_key(u), i)
    return tuple(seqs), units, index


def clifford_group_size(n):
    if n == 1:
        return len(_c1_index())
    return len(c2_table()[2])


# --------------------------------------------------------------------------
# families
# --------------------------------------------------------------------------

def _check_n(n):
    if n not in (1, 2):
        raise ValueError(f"unsupported qubit count {n}; expected 1 or 2")


def rb_circuit(n, clifford_depth, seed):
    """Random Clifford sequence followed by its inverting Clifford."""
    _check_n(n)
    if clifford_depth < 0:
        raise ValueError("clifford_depth must be >= 0")
    rng = np.random.default_rng(seed)
    gates = []
    if n == 1:
        us = c1_unitaries()
        total = np.eye(2, dtype=complex)
        for i in rng.integers(0, 24, size=clifford_depth):
            gates.extend(_pulse_gates(C1_PULSES[i], 0))
            total = us[i] @ total
        inv = _c1_index()[phase_key(total.conj().T)]
        gates.extend(_pulse_gates(C1_PULSES[inv], 0))
        if not gates:
            gates.append(gate("I", 0))
        return Circuit.from_gates(1, gates)
    seqs, units, index = c2_table()
    total = np.eye(4, dtype=complex)
    for i in rng.integers(0, len(seqs), size=clifford_depth):
        gates.extend(_c2_gates(seqs[i]))
        total = units[i] @ total
    gates.extend(_c2_gates(seqs[index[phase_key(total.conj().T)]]))
    if not gates:
        gates.append(gate("I", 0))
    return Circuit.from_gates(2, gates)


def mirror_circuit(n, depth, seed):
    """Mirror circuit and the bitstring it outputs without noise.

    ``depth`` layers of (random C1 on each qubit, then CNOT(0 -> 1) when
    ``n = 2``), a random Pauli layer, then the inverse layers in reverse
    order.
    """
    _check_n(n)
    if depth < 0:
        raise ValueError("depth must be >= 0")
    rng = np.random.default_rng(seed)
    layers = rng.integers(0, 24, size=(depth, n))
    paulis = rng.integers(0, 4, size=n)
    gates = []
    for layer in layers:
        for q, c in enumerate(layer):
            gates.extend(_pulse_gates(C1_PULSES[c], q))
        if n == 2:
            gates.append(gate("CNOT", 0, 1))
    for q, p in enumerate(paulis):
        gates.append(gate("IXYZ"[p], q))
    for layer in layers[::-1]:
        if n == 2:
            gates.append(gate("CNOT", 0, 1))
        for q, c in enumerate(layer):
            gates.extend(_pulse_gates(C1_PULSES[c1_inverse(c)], q))
    circuit = Circuit.from_gates(n, gates)
    out = unitary_of(circuit) @ basis_state(n, 0)
    target = int(np.argmax(np.abs(out)))
    return circuit, format(target, f"0{n}b")


def qaoa_circuit(betas, gammas):
    """Two-qubit, two-round QAOA unitary ``U`` followed by ``U^dag``.

    Round ``k`` applies ``exp(-i gamma_k Z Z)`` as ``RZZ(2 gamma_k)`` and
    then ``exp(-i beta_k X)`` on both qubits as ``RX(2 beta_k)``.
    """
    betas, gammas = np.atleast_1d(betas), np.atleast_1d(gammas)
    if betas.size != 2 or gammas.size != 2:
        raise ValueError("qaoa_circuit needs exactly two betas and two gammas")
    gates = []
    for beta, gamma in zip(betas, gammas):
        gates.append(gate("RZZ", 0, 1, params=2 * gamma))
        gates.append(gate("RX", 0, params=2 * beta))
        gates.append(gate("RX", 1, params=2 * beta))
    u = Circuit.from_gates(2, gates)
    return u + u.adjoint()


def random_qaoa_circuit(seed):
    """QAOA echo circuit with angles drawn uniformly from [0, 2 pi)."""
    rng = np.random.default_rng(seed)
    angles = rng.uniform(0.0, 2 * math.pi, size=4)
    return qaoa_circuit(angles[:2], angles[2:])


def cpmg_circuit(delay_slots, n_pulses):
    """``delay, X, 2 delay, X, ..., X, delay`` on one qubit."""
    if delay_slots < 1 or n_pulses < 1:
        raise ValueError("delay_slots and n_pulses must be >= 1")
    idle = Moment((gate("I", 0),))
    pulse = Moment((gate("X", 0),))
    moments = [idle] * delay_slots
    for k in range(n_pulses):
        moments.append(pulse)
        moments.extend([idle] * (delay_slots if k == n_pulses - 1 else 2 * delay_slots))
    return Circuit(1, tuple(moments))


def free_induction_circuit(n_slots, n_qubits=1):
    """``n_slots`` idle moments."""
    idle = Moment(tuple(gate("I", q) for q in range(n_qubits)))
    return Circuit(n_qubits, (idle,) * n_slots)


@dataclass(frozen=True)
class CircuitSpec:
    """Recipe for one seeded circuit; :meth:`build` returns ``(circuit, bitstring)``."""

    family: str
    n_qubits: int = 2
    depth: int = 2
    seed: int = 0
    params: dict = field(default_factory=dict)

    def build(self):
        fam = self.family.lower()
        zero = "0" * self.n_qubits
        if fam == "rb":
            return rb_circuit(self.n_qubits, self.depth, self.seed), zero
        if fam == "mirror":
            return mirror_circuit(self.n_qubits, self.depth, self.seed)
        if fam == "qaoa":
            if "betas" in self.params:
                return qaoa_circuit(self.params["betas"], self.params["gammas"]), "00"
            return random_qaoa_circuit(self.seed), "00"
        if fam == "cpmg":
            c = cpmg_circuit(self.params.get("delay", self.depth), self.params.get("pulses", 2))
            return c, "0"
        if fam == "free":
            return free_induction_circuit(self.depth, self.n_qubits), zero
        raise ValueError(f"unknown circuit family {self.family!r}")


__all__ = [
    "C1_PULSES", "CircuitSpec", "Gate", "c1_unitaries", "c2_table", "clifford_group_size",
    "cpmg_circuit", "free_induction_circuit", "mirror_circuit", "phase_key", "qaoa_circuit",
    "random_qaoa_circuit", "rb_circuit",
]
