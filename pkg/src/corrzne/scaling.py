"""Noise-scaling methods as circuit or noise-model transforms.

=============  ==========================  ==================================
method         circuit                     noise model
=============  ==========================  ==================================
ideal          unchanged                   spectrum multiplied by lambda
pulse_stretch  unchanged                   spectrum stretched, lambda S(w/l)
global_fold    U (U^dag U)^n               unchanged
local_fold     each moment M (M^dag M)^n   unchanged
gate_trotter   each gate G -> (G^(1/l))^l  unchanged
=============  ==========================  ==================================
"""
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .arma import ArmaModel, NoiseGenerator, scale_power, stretch_model
from .quantum import Circuit, Gate, Moment

METHODS = ("ideal", "pulse_stretch", "global_fold", "local_fold", "gate_trotter")
DIGITAL = ("global_fold", "local_fold", "gate_trotter")
_ALIASES = {
    "ideal": "ideal", "pulsestretch": "pulse_stretch", "stretch": "pulse_stretch",
    "globalfold": "global_fold", "global": "global_fold",
    "localfold": "local_fold", "local": "local_fold",
    "gatetrotter": "gate_trotter", "trotter": "gate_trotter",
}


def method_name(kind):
    key = str(kind).replace("_", "").replace("-", "").replace(" ", "").lower()
    try:
        return _ALIASES[key]
    except KeyError:
        raise ValueError(f"unknown scaling method {kind!r}; expected one of {METHODS}") from None


@dataclass(frozen=True)
class ScalingMethod:
    """A scaling method and its scale factor."""

    kind: str
    lam: float = 1.0

    def __post_init__(self):
        kind = method_name(self.kind)
        object.__setattr__(self, "kind", kind)
        lam = self.lam
        if not lam >= 1:
            raise ValueError(f"invalid scale factor {lam!r}: must be >= 1")
        if kind in DIGITAL:
            if float(lam) != int(lam):
                raise ValueError(f"scale factor must be an integer for {kind}, got {lam!r}")
            lam = int(lam)
            if kind != "gate_trotter" and lam % 2 == 0:
                raise ValueError(f"scale factor must be odd for {kind}, got {lam!r}")
        object.__setattr__(self, "lam", lam)

    @property
    def folds(self):
        return (int(self.lam) - 1) // 2


@dataclass(frozen=True, eq=False)
class ScaledInstance:
    """Transformed circuit and noise model for one method and scale factor."""

    circuit: Circuit
    model: ArmaModel
    method: ScalingMethod

    @property
    def lam(self):
        return self.method.lam

    def noise(self, stream=None):
        return NoiseGenerator(self.model, stream)


def fold_global(circuit, n):
    """``U (U^dag U)^n`` as moments; depth grows by ``1 + 2n``."""
    if n < 0:
        raise ValueError("fold count must be >= 0")
    inverse = circuit.adjoint().moments
    return Circuit(circuit.n_qubits, circuit.moments + (inverse + circuit.moments) * n)


def fold_local(circuit, n):
    """Every moment ``M`` becomes ``M, M^dag, M, ..., M`` (``1 + 2n`` moments)."""
    if n < 0:
        raise ValueError("fold count must be >= 0")
    moments = []
    for m in circuit.moments:
        moments.append(m)
        adj = m.adjoint()
        for _ in range(n):
            moments.extend((adj, m))
    return Circuit(circuit.n_qubits, tuple(moments))


def gate_root(g, lam):
    """``G^(1/lam)`` from the eigendecomposition, eigenphases in (-pi, pi]."""
    lam = int(lam)
    if lam < 1:
        raise ValueError("root order must be >= 1")
    if lam == 1 or g.label == "I":
        return g
    t, z = linalg.schur(g.matrix, output="complex")
    resid = np.max(np.abs(np.triu(t, 1))) if t.shape[0] > 1 else 0.0
    if resid > 1e-8:
        raise ValueError(f"eigendecomposition of {g.label} is defective (residual {resid:.2e})")
    phases = np.angle(np.diag(t))
    phases[np.isclose(phases, -np.pi, rtol=0, atol=1e-12)] = np.pi
    root = (z * np.exp(1j * phases / lam)) @ z.conj().T
    return Gate.from_matrix(root, g.targets)


def trotterize(circuit, lam):
    """Each moment becomes ``lam`` moments of the roots of its gates."""
    lam = int(lam)
    if lam < 1:
        raise ValueError("trotter factor must be >= 1")
    if lam == 1:
        return circuit
    moments = []
    for m in circuit.moments:
        root = Moment(tuple(gate_root(g, lam) for g in m.gates))
        moments.extend([root] * lam)
    return Circuit(circuit.n_qubits, tuple(moments))


def scale(method, circuit, model, n_taps=1024):
    """Apply a scaling method to a circuit and its noise model."""
    if not isinstance(method, ScalingMethod):
        method = ScalingMethod(*method)
    kind, lam = method.kind, method.lam
    if kind == "ideal":
        return ScaledInstance(circuit, scale_power(model, lam), method)
    if kind == "pulse_stretch":
        return ScaledInstance(circuit, stretch_model(model, lam, n_taps), method)
    if kind == "global_fold":
        return ScaledInstance(fold_global(circuit, method.folds), model, method)
    if kind == "local_fold":
        return ScaledInstance(fold_local(circuit, method.folds), model, method)
    return ScaledInstance(trotterize(circuit, lam), model, method)
