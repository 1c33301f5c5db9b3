"""Filter functions of circuits under dephasing noise.

For a circuit of ``d`` moments, noise slot ``m`` (time ``[m-1, m)``)
follows moment ``m`` and is conjugated by the moments applied after it,
``R_m = U_d ... U_{m+1}``.  The switching function on that slot is

    f_ab(m) = Tr[R_m A_a R_m^dag A_b] / N

for normalised Pauli strings ``A``.  Slot ``d`` therefore always has
``f_ab = delta_ab``.  Fourier transforms are exact for piecewise-constant
``f``; overlap integrals are taken over the Nyquist band.

SchWARMA angles are discrete, so a discrete spectrum ``S_y`` is converted
to the density ``S_y(w) / sinc^2(w/2)`` before overlapping with a
continuous-time filter function.  With that convention the band-limited
overlap equals the exact variance of the accumulated phase, e.g. white
noise of variance ``s2`` over ``K`` idle slots gives ``chi = s2 K``.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .arma import ArmaModel, SpectrumFn, model_spectrum
from .quantum import Circuit, Observable, basis_state, moment_unitary, pauli_basis, unitary_of
from .scaling import ScalingMethod, scale

N_GRID = 2048


# --------------------------------------------------------------------------
# switching functions and transforms
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SwitchingFunctionSet:
    """Piecewise-constant ``f_ab`` on segments ``[edges[k], edges[k+1])``.

    ``values`` has shape (segments, K, K) for the ``K = N^2 - 1`` basis
    operators in ``labels``.
    """

    edges: np.ndarray
    values: np.ndarray
    labels: tuple

    @property
    def T(self):
        return float(self.edges[-1] - self.edges[0])

    def index(self, label):
        return self.labels.index(label) if isinstance(label, str) else int(label)

    def stretched(self, lam):
        """Same switching functions on a time axis slowed by ``lam``."""
        return SwitchingFunctionSet(self.edges * lam, self.values, self.labels)


def _transfer(r, mats, n_dim):
    # f[a, b] = Tr[R A_a R^dag A_b] / N
    conj = np.einsum("ij,ajk,lk->ail", r, mats, r.conj())
    return np.real(np.einsum("aij,bji->ab", conj, mats)) / n_dim


def slot_propagators(circuit, include_initial=False):
    """``R_m`` for ``m = 1..d`` (and ``R_0 = U`` first if requested)."""
    dim = 2**circuit.n_qubits
    r = np.eye(dim, dtype=complex)
    out = [r]
    for m in reversed(circuit.moments[1:]):
        r = r @ moment_unitary(m, circuit.n_qubits)
        out.append(r)
    out = out[::-1] if circuit.depth else []
    if include_initial:
        out = [unitary_of(circuit)] + out
    return out


def switching_functions(circuit, basis=None, include_initial=False):
    """Switching functions of every noise slot of ``circuit``.

    With ``include_initial`` an extra leading segment ``[-1, 0)`` holds the
    values for a noise slot before the first moment.
    """
    basis = basis or pauli_basis(circuit.n_qubits)
    dim = 2**circuit.n_qubits
    props = slot_propagators(circuit, include_initial)
    vals = np.stack([_transfer(r, basis.matrices, dim) for r in props]) if props else \
        np.zeros((0, len(basis.labels), len(basis.labels)))
    start = -1 if include_initial else 0
    edges = np.arange(start, circuit.depth + 1, dtype=float)
    return SwitchingFunctionSet(edges, vals, basis.labels)


def unit_transform(omega):
    """``(e^{iw} - 1) / (iw)``, equal to 1 at ``w = 0``."""
    omega = np.asarray(omega, dtype=float)
    return np.exp(0.5j * omega) * np.sinc(omega / (2 * np.pi))


def segment_transforms(edges, omega):
    """``int_{t0}^{t1} e^{iwt} dt`` for each segment; shape (len(omega), segments)."""
    edges = np.asarray(edges, dtype=float)
    w = np.asarray(omega, dtype=float)[:, None]
    width = np.diff(edges)[None, :]
    mid = 0.5 * (edges[1:] + edges[:-1])[None, :]
    return width * np.exp(1j * w * mid) * np.sinc(w * width / (2 * np.pi))


@dataclass(frozen=True, eq=False)
class FilterFunctionSet:
    """``F_ab(w)`` on a frequency grid, shape (len(omega), K, K)."""

    omega: np.ndarray
    F: np.ndarray
    labels: tuple
    T: float
    metadata: dict = field(default_factory=dict)

    def index(self, label):
        return self.labels.index(label) if isinstance(label, str) else int(label)

    def pair(self, a, b):
        return self.F[:, self.index(a), self.index(b)]


def fourier_switching(sf, omega):
    """Exact transforms ``F_ab(w) = int f_ab(t) e^{iwt} dt`` of a switching set."""
    omega = np.asarray(omega, dtype=float)
    c = segment_transforms(sf.edges, omega)
    k = len(sf.labels)
    F = (c @ sf.values.reshape(sf.values.shape[0], k * k)).reshape(omega.size, k, k)
    return FilterFunctionSet(omega, F, sf.labels, sf.T)


def filter_function(ffs, first, second=None):
    """``Re[F_ab(w) F_a'b'(-w)]`` for index pairs ``first = (a, b)``, ``second = (a', b')``.

    For real switching functions ``F(-w) = conj(F(w))``.
    """
    second = first if second is None else second
    try:
        f1 = ffs.pair(*first)
        f2 = ffs.pair(*second)
    except (ValueError, IndexError) as exc:
        raise KeyError(f"missing filter-function index {first} or {second}") from exc
    return np.real(f1 * np.conj(f2))


def frequency_grid(n=N_GRID, symmetric=False):
    """Uniform grid on ``[0, pi]`` (or ``[-pi, pi]``) with ``n + 1`` points."""
    if symmetric:
        return np.linspace(-np.pi, np.pi, 2 * n + 1)
    return np.linspace(0.0, np.pi, n + 1)


# --------------------------------------------------------------------------
# overlaps and predictions
# --------------------------------------------------------------------------

def slot_density(spec):
    """Continuous density whose band-limited overlaps reproduce discrete variances."""
    if isinstance(spec, ArmaModel):
        spec = model_spectrum(spec)

    def fn(w):
        return spec(w) / np.sinc(w / (2 * np.pi)) ** 2

    return SpectrumFn(fn, label=f"slot({getattr(spec, 'label', 'custom')})")


def overlap_integral(spectrum, ff, omega, slot_equivalent=True):
    """``chi = int dw/2pi S(w) ff(w)`` over ``[-pi, pi]`` by the trapezoid rule.

    ``omega`` is either a grid on ``[0, pi]`` (the integrand is even and the
    result is doubled) or a grid covering ``[-pi, pi]``.  ``spectrum`` is an
    :class:`~corrzne.arma.ArmaModel` or callable; with ``slot_equivalent``
    the discrete SchWARMA spectrum is converted first.
    """
    omega = np.asarray(omega, dtype=float)
    ff = np.asarray(ff, dtype=float)
    if ff.shape != omega.shape:
        raise ValueError("filter function and frequency grid differ in shape")
    if isinstance(spectrum, ArmaModel):
        spectrum = model_spectrum(spectrum)
    s = slot_density(spectrum)(omega) if slot_equivalent else np.asarray(spectrum(omega))
    val = np.trapezoid(s * ff, omega) / (2 * np.pi)
    if omega[0] >= 0:
        val *= 2
    return float(max(val, 0.0))


def fine_grid(n=N_GRID, n_low=2000, w_min=1e-7, w_split=0.05):
    """Uniform grid on ``[0, pi]`` merged with a log-spaced grid near zero.

    Sharp low-frequency spectral peaks (correlation times far beyond the
    uniform spacing) are resolved by the log-spaced part.
    """
    g = np.concatenate([[0.0], np.geomspace(w_min, w_split, n_low), frequency_grid(n)])
    return np.unique(g)


def noise_axes(n_qubits, labels):
    """Basis indices of the single-qubit ``Z`` operators."""
    out = []
    for q in range(n_qubits):
        lab = "".join("Z" if k == q else "I" for k in range(n_qubits))
        out.append(labels.index(lab))
    return out


def chi(circuit, spectra, omega=None, sf=None):
    """Total dephasing overlap ``sum_q sum_b int S_q |F_{z_q b}|^2``.

    ``spectra`` is one model/callable for all qubits or a list per qubit.
    """
    omega = fine_grid() if omega is None else omega
    sf = sf or switching_functions(circuit)
    ffs = fourier_switching(sf, omega)
    axes = noise_axes(circuit.n_qubits, sf.labels)
    if not isinstance(spectra, (list, tuple)):
        spectra = [spectra] * circuit.n_qubits
    total = 0.0
    for q, a in enumerate(axes):
        ff = np.sum(np.abs(ffs.F[:, a, :]) ** 2, axis=1)
        total += overlap_integral(spectra[q], ff, omega)
    return total


def predict_expectation(chi_value, A, B):
    """``A + B exp(-2 chi)``.

    The SchWARMA kick ``exp(i y sigma^z)`` rotates by ``2y``, so coherences
    decay with twice the overlap of the angle process.
    """
    return A + B * np.exp(-2.0 * np.asarray(chi_value, dtype=float))


def dephased_constants(circuit, observable, initial=None):
    """``(A, B)``: fully dephased expectation and the remaining noiseless part."""
    n = circuit.n_qubits
    psi0 = basis_state(n, 0) if initial is None else np.asarray(initial, dtype=complex)
    psi = unitary_of(circuit) @ psi0
    o = observable.matrix
    noiseless = float(np.real(np.vdot(psi, o @ psi)))
    a = float(np.real(np.abs(psi) ** 2 @ np.diag(o)))
    return a, noiseless - a


def projector_prediction(circuit, spectra, observable, initial=None, omega=None):
    """Filter-function estimate ``A + B exp(-2 chi)`` of a noisy expectation."""
    a, b = dephased_constants(circuit, observable, initial)
    return float(predict_expectation(chi(circuit, spectra, omega), a, b))


@dataclass(frozen=True, eq=False)
class CumulantResult:
    """``C2 / 2`` as a matrix, with the noiseless state and the observable."""

    matrix: np.ndarray
    observable: Observable
    final_state: np.ndarray
    asymmetry: float

    def expectation(self):
        """``Tr[exp(-C2/2) rho_0 O]`` via the eigendecomposition of ``C2/2``."""
        w, v = linalg.eigh(self.matrix)
        damp = (v * np.exp(-w)) @ v.conj().T
        rho = np.outer(self.final_state, self.final_state.conj())
        return float(np.real(np.trace(damp @ rho @ self.observable.matrix)))


def a_operator(a_b, a_bp, o, o_inv):
    """``A_b A_b' - O^-1 A_b O A_b' - A_b O^-1 A_b' O + O^-1 A_b A_b' O``."""
    return (a_b @ a_bp - o_inv @ a_b @ o @ a_bp - a_b @ o_inv @ a_bp @ o
            + o_inv @ a_b @ a_bp @ o)


def second_cumulant(circuit, spectra, observable, initial=None, omega=None):
    """Second cumulant of the error operator for independent per-qubit dephasing."""
    o = observable.matrix
    if abs(np.linalg.det(o)) < 1e-12:
        raise ValueError("cumulant requires invertible observable; use predict_expectation route")
    o_inv = o if observable.involutory else np.linalg.inv(o)
    omega = fine_grid() if omega is None else np.asarray(omega, dtype=float)
    if omega[0] < 0:
        raise ValueError("second_cumulant integrates over [0, pi]; pass a one-sided grid")
    n = circuit.n_qubits
    basis = pauli_basis(n)
    sf = switching_functions(circuit, basis)
    ffs = fourier_switching(sf, omega)
    if not isinstance(spectra, (list, tuple)):
        spectra = [spectra] * n
    k = len(basis.labels)
    weights = np.zeros((k, k))
    for q, a in enumerate(noise_axes(n, basis.labels)):
        s = slot_density(spectra[q])(omega)
        fa = ffs.F[:, a, :]
        ff = np.real(fa[:, :, None] * np.conj(fa[:, None, :]))
        weights += np.trapezoid(s[:, None, None] * ff, omega, axis=0) / (2 * np.pi)
    mats = basis.matrices
    dim = 2**n
    c2 = np.zeros((dim, dim), dtype=complex)
    for b in range(k):
        for bp in range(k):
            if weights[b, bp] != 0.0:
                c2 += weights[b, bp] * a_operator(mats[b], mats[bp], o, o_inv)
    asym = float(np.max(np.abs(c2 - c2.conj().T))) if c2.size else 0.0
    c2 = 0.5 * (c2 + c2.conj().T)
    psi0 = basis_state(n, 0) if initial is None else np.asarray(initial, dtype=complex)
    return CumulantResult(c2, observable, unitary_of(circuit) @ psi0, asym)


# --------------------------------------------------------------------------
# analytic folding formulas
# --------------------------------------------------------------------------

def comb(m, x):
    """``sin(m x) / sin(x)`` with its limit ``(+-1)^... m`` at ``sin x = 0``."""
    x = np.asarray(x, dtype=float)
    k = np.round(x / np.pi)
    delta = x - k * np.pi
    sign = np.where((k * (m - 1)) % 2 == 0, 1.0, -1.0)
    small = np.abs(delta) < 1e-6
    safe = np.where(small, 1.0, delta)
    ratio = np.where(small, m * (1.0 - (m * m - 1) * delta**2 / 6.0),
                     np.sin(m * safe) / np.sin(safe))
    return sign * ratio


def _block_transform(values, omega):
    """Transform of unit slots starting at ``t = 0``; values shape (slots, K, K)."""
    edges = np.arange(values.shape[0] + 1, dtype=float)
    c = segment_transforms(edges, omega)
    k = values.shape[1]
    return (c @ values.reshape(values.shape[0], k * k)).reshape(len(omega), k, k)


def global_fold_parts(circuit, omega, basis=None):
    """``(F1, F2)`` for global folding.

    ``F1`` is the transform of one ``[U, U^dag]`` period: base slots
    ``1..d`` followed by the mirrored slots ``d-1..0``.  ``F2`` is the
    transform of the final, unfolded copy of the circuit.
    """
    sf = switching_functions(circuit, basis, include_initial=True)
    v = sf.values                      # slots 0..d
    period = np.concatenate([v[1:], v[:-1][::-1]])
    return _block_transform(period, omega), _block_transform(v[1:], omega), sf.labels


def analytic_global_fold(F1, F2, M, omega, T):
    """Transforms of ``U (U^dag U)^M`` from the period and suffix transforms.

    Returns ``(F, G)`` where ``G`` holds the four terms whose sum is the
    diagonal filter function ``|F|^2``:
    ``G11 = comb^2 |F1|^2``, ``G22 = |F2|^2`` and the two cross terms.
    """
    w = np.asarray(omega, dtype=float)[:, None, None]
    cm = comb(M, w * T)
    p1 = np.exp(1j * w * (M - 1) * T) * cm * F1
    p2 = np.exp(2j * w * M * T) * F2
    G = {
        "11": np.abs(p1) ** 2,
        "12": np.real(p1 * np.conj(p2)),
        "21": np.real(p2 * np.conj(p1)),
        "22": np.abs(p2) ** 2,
    }
    return p1 + p2, G


def local_fold_parts(circuit, omega, basis=None):
    """Per-moment ``(F1_j, F2_j)`` for local folding, stacked on axis 0.

    ``F1_j`` is the transform of the two-slot period ``[slot j, slot j-1]``
    and ``F2_j`` that of the closing single slot ``j``.
    """
    sf = switching_functions(circuit, basis, include_initial=True)
    v = sf.values
    d = circuit.depth
    F1 = np.stack([_block_transform(np.stack([v[j], v[j - 1]]), omega) for j in range(1, d + 1)])
    F2 = np.stack([_block_transform(v[j:j + 1], omega) for j in range(1, d + 1)])
    return F1, F2, sf.labels


def analytic_local_fold(F1, F2, M, omega):
    """Transforms of the locally folded circuit (unit gate time).

    Returns ``(F, G)`` with the four double-sum terms over moment pairs
    ``(j, k)``, carrying the inter-block phases ``e^{iw (2M+1)(j-k)}``.
    """
    w = np.asarray(omega, dtype=float)[:, None, None]
    d = F1.shape[0]
    cm = comb(M, w)
    shifts = np.exp(1j * w[None] * (2 * M + 1) * np.arange(d)[:, None, None, None])
    p1 = shifts * np.exp(1j * w * (M - 1)) * cm * F1
    p2 = shifts * np.exp(2j * M * w) * F2
    s1, s2 = p1.sum(axis=0), p2.sum(axis=0)
    G = {
        "11": np.abs(s1) ** 2,
        "12": np.real(s1 * np.conj(s2)),
        "21": np.real(s2 * np.conj(s1)),
        "22": np.abs(s2) ** 2,
    }
    return s1 + s2, G


def analytic_global_fold_ff(circuit, M, omega, basis=None):
    """Filter-function set of ``U (U^dag U)^M`` from the base circuit alone."""
    omega = np.asarray(omega, dtype=float)
    F1, F2, labels = global_fold_parts(circuit, omega, basis)
    F, G = analytic_global_fold(F1, F2, M, omega, circuit.depth)
    return FilterFunctionSet(omega, F, labels, float((2 * M + 1) * circuit.depth),
                             {"method": "global_fold", "M": M, "G": G})


def analytic_local_fold_ff(circuit, M, omega, basis=None):
    """Filter-function set of the locally folded circuit from per-moment parts."""
    omega = np.asarray(omega, dtype=float)
    F1, F2, labels = local_fold_parts(circuit, omega, basis)
    F, G = analytic_local_fold(F1, F2, M, omega)
    return FilterFunctionSet(omega, F, labels, float((2 * M + 1) * circuit.depth),
                             {"method": "local_fold", "M": M, "G": G})


# --------------------------------------------------------------------------
# scaled-circuit responses
# --------------------------------------------------------------------------

def scaled_filter_functions(circuit, method, lam, omega):
    """Filter-function set of ``circuit`` under a scaling method.

    Ideal scaling leaves the response unchanged, pulse stretching slows
    the switching functions by ``lam`` and the digital methods use the
    transformed circuit.
    """
    meth = ScalingMethod(method, lam)
    sf = switching_functions(circuit)
    if meth.kind == "ideal":
        out = fourier_switching(sf, omega)
    elif meth.kind == "pulse_stretch":
        out = fourier_switching(sf.stretched(meth.lam), omega)
    else:
        scaled = scale(meth, circuit, ArmaModel()).circuit
        out = fourier_switching(switching_functions(scaled), omega)
    out.metadata.update(method=meth.kind, lam=meth.lam)
    return out


def normalized_max_ff(circuit, method, lambdas, omega=None):
    """Largest diagonal filter function at each ``lam``, divided by its maximum.

    The largest function is the ``|F_{z_q b}|^2`` with the highest peak
    over the noise axes ``z_q`` of the circuit.  Returns ``{lam: curve}``.
    """
    omega = frequency_grid() if omega is None else np.asarray(omega, dtype=float)
    out = {}
    for lam in lambdas:
        ffs = scaled_filter_functions(circuit, method, lam, omega)
        axes = noise_axes(circuit.n_qubits, ffs.labels)
        cand = np.abs(ffs.F[:, axes, :]) ** 2
        peak = cand.max(axis=0)
        a, b = np.unravel_index(np.argmax(peak), peak.shape)
        curve = cand[:, a, b]
        out[lam] = curve / curve.max()
    return out


def spectral_centroid(curve, omega):
    return float(np.trapezoid(omega * curve, omega) / np.trapezoid(curve, omega))


__all__ = [
    "CumulantResult", "FilterFunctionSet", "SwitchingFunctionSet", "analytic_global_fold",
    "analytic_global_fold_ff", "analytic_local_fold_ff",
    "analytic_local_fold", "chi", "comb", "dephased_constants", "filter_function", "fine_grid",
    "fourier_switching", "frequency_grid", "global_fold_parts", "local_fold_parts",
    "normalized_max_ff", "overlap_integral", "predict_expectation", "projector_prediction",
    "scaled_filter_functions", "second_cumulant", "slot_density", "spectral_centroid",
    "switching_functions",
]
