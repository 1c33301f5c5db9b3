"""Trajectory simulation of circuits under SchWARMA dephasing.

Every trajectory draws one angle sequence per qubit, evolves the initial
state through the moments with a ``exp(i y sigma^z)`` kick on each qubit
after every moment, and records one Bernoulli shot of a projector (or the
exact expectation in ``exact`` mode).

Random streams are addressed by ``(seed, domain, circuit, trajectory,
qubit)``, never by method or scale factor.  All methods and scale factors
for one circuit therefore see the same Gaussian inputs and the same shot
uniforms, which makes comparisons between methods low-variance and makes
results independent of how work is scheduled.
"""
import threading
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from . import _kernels, rng
from .arma import ArmaModel, burn_in_length, generate, spectrum, stream_span
from .circuits import CircuitSpec
from .quantum import Circuit, Observable, basis_state, moment_unitaries, z_signs
from .scaling import ScalingMethod, scale

DEFAULT_LAMBDAS = (1, 3, 5, 7, 9)


@dataclass(frozen=True)
class RunConfig:
    """Trajectory count, seed, scale factors and measurement options."""

    trajectories: int = 3000
    seed: int = 0
    lambdas: tuple = DEFAULT_LAMBDAS
    observable: Observable = None
    exact: bool = False
    n_taps: int = 1024
    initial: object = None

    def __post_init__(self):
        if self.trajectories < 1:
            raise ValueError("trajectories must be >= 1")
        lams = tuple(self.lambdas)
        if any(b <= a for a, b in zip(lams, lams[1:])):
            raise ValueError("lambdas must be strictly increasing")
        object.__setattr__(self, "lambdas", lams)


@dataclass
class ExpectationCurve:
    """Estimates ``E(lambda)`` with standard errors."""

    lambdas: np.ndarray
    means: np.ndarray
    stderrs: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.lambdas = np.asarray(self.lambdas, dtype=float)
        self.means = np.asarray(self.means, dtype=float)
        self.stderrs = np.asarray(self.stderrs, dtype=float)

    @property
    def points(self):
        return list(zip(self.lambdas.tolist(), self.means.tolist(), self.stderrs.tolist()))


class AngleCache:
    """Generated unit-gain angle arrays for one circuit, shared by all methods.

    Models differing only by an overall MA gain share one entry; a shorter
    request is served by a prefix of a longer stored array, which is valid
    because a stream's samples do not depend on how many are drawn.
    """

    def __init__(self, maxsize=16, backend=None):
        self._store = OrderedDict()
        self._normals = {}
        self._lock = threading.Lock()
        self.maxsize = maxsize
        self.backend = backend

    def normals(self, seed, circuit_index, trajectories, n_qubits, span):
        """Raw stream values at positions ``0 .. span-1``, grown on demand."""
        key = (int(seed), int(circuit_index), trajectories, n_qubits)
        with self._lock:
            block = self._normals.get(key)
            if block is None or block.shape[1] < span:
                keys = noise_keys(seed, circuit_index, trajectories, n_qubits)
                have = 0 if block is None else block.shape[1]
                extra = _kernels.stream_normals(keys, have, span - have, self.backend)
                block = extra if block is None else np.concatenate([block, extra], axis=1)
                self._normals[key] = block
        return block

    def angles(self, model, seed, circuit_index, trajectories, n_qubits, length, horizon=0):
        """Angles of shape (trajectories, n_qubits, length)."""
        if model.gain == 0.0 or length == 0:
            return np.zeros((trajectories, n_qubits, length))
        unit = model.unit_gain()
        key = (unit.ar, unit.ma, int(seed), int(circuit_index), trajectories, n_qubits)
        with self._lock:
            arr = self._store.get(key)
            if arr is not None:
                self._store.move_to_end(key)
        if arr is None or arr.shape[-1] < length:
            n = max(length, horizon)
            burn = burn_in_length(unit)
            z = self.normals(seed, circuit_index, trajectories, n_qubits, stream_span(unit, n, burn))
            keys = noise_keys(seed, circuit_index, trajectories, n_qubits)
            arr = generate(unit, keys, n, burn, self.backend, normals=z)
            arr = arr.reshape(trajectories, n_qubits, n)
            with self._lock:
                self._store[key] = arr
                while len(self._store) > self.maxsize:
                    self._store.popitem(last=False)
        return model.gain * arr[:, :, :length]


def noise_keys(seed, circuit_index, trajectories, n_qubits):
    t = np.arange(trajectories)[:, None]
    q = np.arange(n_qubits)[None, :]
    return rng.derive_keys(seed, rng.NOISE, circuit_index, t, q).ravel()


def shot_uniforms(seed, circuit_index, trajectories, backend=None):
    keys = rng.derive_keys(seed, rng.SHOTS, circuit_index, np.arange(trajectories))
    return _kernels.stream_uniforms(keys, 0, 1, backend)[:, 0]


def _initial_state(initial, n):
    if initial is None:
        return basis_state(n, 0)
    if isinstance(initial, str):
        if initial == "+" * n:
            return np.full(2**n, 2 ** (-n / 2), dtype=complex)
        return basis_state(n, initial)
    psi = np.asarray(initial, dtype=complex)
    return psi / np.linalg.norm(psi)


def final_states(circuit, model, cfg, circuit_index=0, cache=None, horizon=0, backend=None):
    """Noisy final states, shape (trajectories, 2^n)."""
    n, d, s = circuit.n_qubits, circuit.depth, cfg.trajectories
    cache = cache if cache is not None else AngleCache(backend=backend)
    psi0 = _initial_state(cfg.initial, n)
    units = moment_unitaries(circuit)
    signs = z_signs(n)
    angles = cache.angles(model, cfg.seed, circuit_index, s, n, d, horizon)
    states = np.broadcast_to(psi0, (s, psi0.size))
    return _kernels.evolve_dephased(states, units, signs, angles, backend)


def run_noisy(circuit, model, cfg, circuit_index=0, cache=None, horizon=0, backend=None):
    """Mean and standard error of the observable over noisy trajectories.

    ``cfg.observable`` defaults to the projector on ``|0...0>``.  Projector
    observables are sampled with one shot per trajectory unless
    ``cfg.exact``; other observables always use exact per-trajectory
    expectations.
    """
    n = circuit.n_qubits
    obs = cfg.observable or Observable.projector("0" * n)
    psi = final_states(circuit, model, cfg, circuit_index, cache, horizon, backend)
    if obs.diagonal:
        vals = np.abs(psi) ** 2 @ np.real(np.diag(obs.matrix))
    else:
        vals = np.real(np.einsum("si,ij,sj->s", psi.conj(), obs.matrix, psi))
    if obs.kind == "projector" and not cfg.exact:
        u = shot_uniforms(cfg.seed, circuit_index, cfg.trajectories, backend)
        vals = (u < vals).astype(float)
    s = vals.size
    stderr = float(np.std(vals, ddof=1) / np.sqrt(s)) if s > 1 else 0.0
    return float(np.mean(vals)), stderr


def _resolve(spec, cfg):
    if isinstance(spec, CircuitSpec):
        circuit, target = spec.build()
    elif isinstance(spec, Circuit):
        circuit, target = spec, "0" * spec.n_qubits
    else:
        circuit, target = spec
    if cfg.observable is None:
        cfg = RunConfig(cfg.trajectories, cfg.seed, cfg.lambdas, Observable.projector(target),
                        cfg.exact, cfg.n_taps, cfg.initial)
    return circuit, cfg


def expectation_curve(spec, method, model, cfg, circuit_index=0, cache=None, backend=None):
    """``E(lambda)`` for one circuit, method and noise model.

    ``spec`` is a :class:`CircuitSpec`, a :class:`Circuit` or a
    ``(circuit, target_bitstring)`` pair; the default observable is the
    projector on the target bitstring.
    """
    circuit, cfg = _resolve(spec, cfg)
    cache = cache if cache is not None else AngleCache(backend=backend)
    horizon = int(np.ceil(max(cfg.lambdas))) * circuit.depth
    means, errs = [], []
    for lam in cfg.lambdas:
        inst = scale(ScalingMethod(method, lam), circuit, model, cfg.n_taps)
        m, e = run_noisy(inst.circuit, inst.model, cfg, circuit_index, cache, horizon, backend)
        means.append(m)
        errs.append(e)
    kind = ScalingMethod(method, 1).kind
    obs = cfg.observable or Observable.projector("0" * circuit.n_qubits)
    mixed = float(np.real(np.trace(obs.matrix))) / obs.dim
    return ExpectationCurve(cfg.lambdas, means, errs,
                            {"method": kind, "spectrum": model.kind, "circuit": circuit_index,
                             "asymptote": mixed})


def true_scaled_curve(spec, model, cfg, circuit_index=0, cache=None, backend=None):
    """Reference curve ``E*(lambda)`` under the ideally scaled spectrum."""
    return expectation_curve(spec, "ideal", model, cfg, circuit_index, cache, backend)


# --------------------------------------------------------------------------
# oracles
# --------------------------------------------------------------------------

def autocovariance_from_spectrum(model, max_lag, n_grid=1 << 22):
    """``gamma(m)`` by inverse FFT of the analytic spectrum on ``n_grid`` points."""
    w = 2 * np.pi * np.fft.rfftfreq(n_grid)
    s = spectrum(model, w)
    gamma = np.fft.irfft(s, n_grid)
    return gamma[: max_lag + 1]


def sum_variance(model, k, n_grid=1 << 22):
    """``Var(y_1 + ... + y_k)`` for the stationary process."""
    if k == 0:
        return 0.0
    gamma = autocovariance_from_spectrum(model, k - 1, n_grid)
    m = np.arange(1, k)
    return float(k * gamma[0] + 2 * np.sum((k - m) * gamma[1:]))


def gaussian_dephasing_oracle(model, k, n_grid=1 << 22):
    """Exact ``<sigma^x>`` after ``k`` free-induction slots from ``|+>``."""
    if not isinstance(model, ArmaModel):
        raise TypeError("model must be an ArmaModel")
    return float(np.exp(-2.0 * sum_variance(model, k, n_grid)))
