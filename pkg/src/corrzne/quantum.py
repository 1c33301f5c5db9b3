"""Dense statevector tools: gates, moments, circuits and observables.

Qubit 0 is the most significant bit of a basis index, so a two-qubit
operator on qubits ``(0, 1)`` is written ``kron(op_0, op_1)``.  Every
moment takes one unit of gate time; the dephasing kick
``exp(i y sigma^z)`` acts on all qubits after each moment.
"""
import itertools
import math
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

MAX_QUBITS = 10
UNITARITY_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}


def _rot(axis, theta):
    return math.cos(theta / 2) * I2 - 1j * math.sin(theta / 2) * PAULIS[axis]


_FIXED = {
    "I": I2,
    "X": X,
    "Y": Y,
    "Z": Z,
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
    "S": np.diag([1, 1j]).astype(complex),
    "SDG": np.diag([1, -1j]).astype(complex),
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
}
_ROTATIONS = {"RX": "X", "RY": "Y", "RZ": "Z"}
#: gates given by an explicit matrix carried in ``params``
_EXPLICIT = {"U": 1, "U2": 2}
ARITY = {**{k: int(math.log2(v.shape[0])) for k, v in _FIXED.items()},
         **{k: 1 for k in _ROTATIONS}, "RZZ": 2, **_EXPLICIT}
GATE_SET = tuple(ARITY)


def gate_matrix(label, params=()):
    """Matrix of a named gate.

    ``RX/RY/RZ(theta) = exp(-i theta sigma / 2)``, ``RZZ(theta) =
    exp(-i theta Z Z / 2)``; ``U``/``U2`` take the row-major matrix as
    interleaved real and imaginary parts.
    """
    label = label.upper()
    if label in _FIXED:
        return _FIXED[label]
    if label in _ROTATIONS:
        (theta,) = params
        return _rot(_ROTATIONS[label], float(theta))
    if label == "RZZ":
        (theta,) = params
        ph = np.exp(-0.5j * float(theta) * np.array([1, -1, -1, 1]))
        return np.diag(ph)
    if label in _EXPLICIT:
        dim = 2 ** _EXPLICIT[label]
        flat = np.asarray(params, dtype=float)
        if flat.size != 2 * dim * dim:
            raise ValueError(f"{label} needs {2 * dim * dim} parameters, got {flat.size}")
        return (flat[0::2] + 1j * flat[1::2]).reshape(dim, dim)
    raise ValueError(f"unknown gate {label!r}")


@dataclass(frozen=True, eq=False)
class Gate:
    """A named unitary acting on ``targets``."""

    label: str
    targets: tuple
    params: tuple = ()
    matrix: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        label = self.label.upper()
        targets = tuple(int(t) for t in self.targets)
        object.__setattr__(self, "label", label)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if label not in ARITY:
            raise ValueError(f"unknown gate {label!r}")
        if len(targets) != ARITY[label] or len(set(targets)) != len(targets):
            raise ValueError(f"{label} needs {ARITY[label]} distinct targets, got {targets}")
        if min(targets) < 0:
            raise ValueError("negative qubit index")
        mat = gate_matrix(label, self.params)
        if not np.allclose(mat.conj().T @ mat, np.eye(mat.shape[0]), atol=UNITARITY_TOL, rtol=0):
            raise ValueError(f"{label} matrix is not unitary")
        mat = mat.copy()
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)

    @property
    def n_targets(self):
        return len(self.targets)

    @classmethod
    def from_matrix(cls, matrix, targets):
        matrix = np.asarray(matrix, dtype=complex)
        flat = np.empty(2 * matrix.size)
        flat[0::2], flat[1::2] = matrix.real.ravel(), matrix.imag.ravel()
        return cls("U" if matrix.shape[0] == 2 else "U2", tuple(targets), tuple(flat))

    def adjoint(self):
        """Inverse gate, kept symbolic where a named inverse exists."""
        if self.label in ("I", "X", "Y", "Z", "H", "CNOT", "CZ"):
            return self
        if self.label == "S":
            return Gate("SDG", self.targets)
        if self.label == "SDG":
            return Gate("S", self.targets)
        if self.label in _ROTATIONS or self.label == "RZZ":
            return Gate(self.label, self.targets, (-self.params[0],))
        return Gate.from_matrix(self.matrix.conj().T, self.targets)

    def to_text(self):
        parts = ["GATE", self.label, *map(str, self.targets), *(repr(p) for p in self.params)]
        return " ".join(parts)


def gate(label, *targets, params=()):
    if not isinstance(params, (tuple, list, np.ndarray)):
        params = (params,)
    return Gate(label, targets, tuple(params))


@dataclass(frozen=True, eq=False)
class Moment:
    """Gates on pairwise disjoint qubits, executed in one time step."""

    gates: tuple = ()

    def __post_init__(self):
        gates = tuple(self.gates)
        used = [q for g in gates for q in g.targets]
        if len(used) != len(set(used)):
            raise ValueError("gates in one moment must act on disjoint qubits")
        object.__setattr__(self, "gates", gates)

    @property
    def qubits(self):
        return {q for g in self.gates for q in g.targets}

    def adjoint(self):
        return Moment(tuple(g.adjoint() for g in self.gates))


@dataclass(frozen=True, eq=False)
class Circuit:
    """``n_qubits`` and an ordered tuple of moments, one time unit each."""

    n_qubits: int
    moments: tuple = ()

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ValueError(f"n_qubits must be in 1..{MAX_QUBITS}")
        moments = tuple(m if isinstance(m, Moment) else Moment(tuple(m)) for m in self.moments)
        for m in moments:
            for g in m.gates:
                if max(g.targets) >= self.n_qubits:
                    raise ValueError(f"gate {g.label} targets {g.targets} out of range")
        object.__setattr__(self, "moments", moments)

    @property
    def depth(self):
        return len(self.moments)

    @classmethod
    def from_gates(cls, n_qubits, gates):
        """Pack gates greedily: a gate joins the last moment when it fits."""
        moments = []
        for g in gates:
            if moments and not (set(g.targets) & {q for x in moments[-1] for q in x.targets}):
                moments[-1].append(g)
            else:
                moments.append([g])
        return cls(n_qubits, tuple(Moment(tuple(m)) for m in moments))

    def gates(self):
        return [g for m in self.moments for g in m.gates]

    def __add__(self, other):
        if self.n_qubits != other.n_qubits:
            raise ValueError("qubit counts differ")
        return Circuit(self.n_qubits, self.moments + other.moments)

    def adjoint(self):
        return Circuit(self.n_qubits, tuple(m.adjoint() for m in reversed(self.moments)))

    def gate_counts(self):
        """``(single-qubit, two-qubit)`` counts, identities excluded."""
        gs = [g for g in self.gates() if g.label != "I"]
        return sum(g.n_targets == 1 for g in gs), sum(g.n_targets == 2 for g in gs)

    def to_text(self):
        lines = [f"QUBITS {self.n_qubits}"]
        for m in self.moments:
            lines.extend(g.to_text() for g in m.gates)
            lines.append("MOMENT")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        """Parse the line format written by :meth:`to_text`.

        Lines are ``QUBITS n``, ``GATE <label> <targets...> [params...]`` and
        ``MOMENT``, which closes the current moment.  Without any ``MOMENT``
        line the gates are packed greedily.  ``#`` starts a comment.
        """
        n_qubits = None
        blocks, current, explicit = [], [], False
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tok = line.split()
            head = tok[0].upper()
            try:
                if head == "QUBITS":
                    n_qubits = int(tok[1])
                elif head == "MOMENT":
                    explicit = True
                    blocks.append(current)
                    current = []
                elif head == "GATE":
                    label = tok[1].upper()
                    k = ARITY[label]
                    current.append(Gate(label, tuple(int(t) for t in tok[2:2 + k]),
                                        tuple(float(p) for p in tok[2 + k:])))
                else:
                    raise ValueError(f"unknown directive {tok[0]!r}")
            except (IndexError, KeyError, ValueError) as exc:
                raise ValueError(f"line {lineno}: {exc}") from exc
        if n_qubits is None:
            gs = [g for b in blocks + [current] for g in b]
            n_qubits = 1 + max((q for g in gs for q in g.targets), default=0)
        if not explicit:
            return cls.from_gates(n_qubits, current)
        if current:
            blocks.append(current)
        return cls(n_qubits, tuple(Moment(tuple(b)) for b in blocks))


# --------------------------------------------------------------------------
# linear algebra
# --------------------------------------------------------------------------

def _apply_gate(psi, g, n):
    """Apply ``g`` to a batch ``psi`` of shape (B, 2, ..., 2)."""
    k = g.n_targets
    mat = g.matrix.reshape((2,) * (2 * k))
    axes = [t + 1 for t in g.targets]
    out = np.tensordot(mat, psi, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


def _check_n(n):
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"dense simulation supports 1..{MAX_QUBITS} qubits, got {n}")


def apply_moment(states, moment, n_qubits):
    """Apply a moment to one state (D,) or a batch (B, D)."""
    _check_n(n_qubits)
    states = np.asarray(states, dtype=complex)
    single = states.ndim == 1
    psi = states.reshape((-1,) + (2,) * n_qubits)
    for g in moment.gates:
        if max(g.targets) >= n_qubits:
            raise ValueError(f"target {max(g.targets)} out of range for {n_qubits} qubits")
        psi = _apply_gate(psi, g, n_qubits)
    out = psi.reshape(-1, 2**n_qubits)
    return out[0] if single else out


def moment_unitary(moment, n_qubits):
    dim = 2**n_qubits
    return apply_moment(np.eye(dim, dtype=complex), moment, n_qubits).T


def moment_unitaries(circuit):
    """Stack of moment matrices, shape (depth, D, D)."""
    dim = 2**circuit.n_qubits
    if not circuit.moments:
        return np.zeros((0, dim, dim), dtype=complex)
    return np.stack([moment_unitary(m, circuit.n_qubits) for m in circuit.moments])


def unitary_of(circuit):
    """``G_d ... G_2 G_1``: later moments multiply on the left."""
    _check_n(circuit.n_qubits)
    u = np.eye(2**circuit.n_qubits, dtype=complex)
    for m in circuit.moments:
        u = apply_moment(u.T, m, circuit.n_qubits).T
    return u


def unitary_distance(u, v):
    """Phase-invariant distance ``1 - |Tr(U^dag V)| / N``."""
    u, v = np.asarray(u), np.asarray(v)
    return float(1.0 - abs(np.vdot(u, v)) / u.shape[0])


def z_signs(n_qubits):
    """``signs[b, j]`` is the sigma^z eigenvalue of qubit ``j`` in basis state ``b``."""
    b = np.arange(2**n_qubits)[:, None]
    bits = (b >> (n_qubits - 1 - np.arange(n_qubits))[None, :]) & 1
    return 1.0 - 2.0 * bits


def apply_dephasing(states, angles):
    """Multiply by ``prod_j exp(i y_j sigma^z_j)``; ``angles`` has one entry per qubit."""
    states = np.asarray(states, dtype=complex)
    angles = np.asarray(angles, dtype=float)
    n = int(round(math.log2(states.shape[-1])))
    if angles.shape[-1] != n:
        raise ValueError(f"expected {n} angles, got {angles.shape[-1]}")
    return states * np.exp(1j * (angles @ z_signs(n).T))


def basis_state(n_qubits, bits=0):
    """Computational basis state from an int or a bitstring such as ``'01'``."""
    if isinstance(bits, str):
        bits = int(bits, 2) if bits else 0
    psi = np.zeros(2**n_qubits, dtype=complex)
    psi[bits] = 1.0
    return psi


# --------------------------------------------------------------------------
# observables
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian observable; ``kind`` is ``projector``, ``pauli`` or ``general``."""

    matrix: np.ndarray
    kind: str = "general"
    label: str = ""

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("observable must be a square matrix")
        if np.max(np.abs(m - m.conj().T)) > 1e-12:
            raise ValueError("observable is not Hermitian")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def involutory(self):
        return bool(np.allclose(self.matrix @ self.matrix, np.eye(self.dim), atol=1e-12))

    @property
    def diagonal(self):
        return bool(np.allclose(self.matrix, np.diag(np.diag(self.matrix)), atol=1e-14))

    @classmethod
    def projector(cls, bitstring):
        n = len(bitstring)
        d = np.zeros(2**n)
        d[int(bitstring, 2)] = 1.0
        return cls(np.diag(d).astype(complex), "projector", bitstring)

    @classmethod
    def pauli(cls, label):
        return cls(pauli_string(label), "pauli", label.upper())


def pauli_string(label):
    return reduce(np.kron, [PAULIS[c] for c in label.upper()])


def expectation(states, obs):
    """``<psi|O|psi>`` for one state or a batch of states."""
    states = np.asarray(states, dtype=complex)
    o = obs.matrix if isinstance(obs, Observable) else np.asarray(obs)
    if states.shape[-1] != o.shape[0]:
        raise ValueError("state and observable dimensions differ")
    val = np.einsum("...i,ij,...j->...", states.conj(), o, states)
    return np.real(val) if np.ndim(val) else float(np.real(val))


def sample_outcome(state, obs, rng):
    """Bernoulli outcome of a projector measurement.

    ``rng`` is a uniform in (0, 1) or any object with ``uniforms(n)``.
    """
    if obs.kind != "projector":
        raise ValueError("shot sampling is defined only for projector observables")
    u = rng if isinstance(rng, float) else float(rng.uniforms(1)[0])
    return int(u < expectation(state, obs))


@dataclass(frozen=True, eq=False)
class PauliBasis:
    """Non-identity Pauli strings, orthonormal under ``Tr(A B) / N``."""

    n_qubits: int
    labels: tuple
    matrices: np.ndarray


def pauli_basis(n_qubits):
    labels = tuple("".join(p) for p in itertools.product("IXYZ", repeat=n_qubits))[1:]
    return PauliBasis(n_qubits, labels, np.stack([pauli_string(s) for s in labels]))
