import numpy as np
import pytest
from scipy.special import sici

from corrzne.arma import ArmaModel, preset
from corrzne.circuits import cpmg_circuit, free_induction_circuit, rb_circuit
from corrzne.filters import (SwitchingFunctionSet, analytic_global_fold, analytic_global_fold_ff,
                             analytic_local_fold_ff, chi, comb, dephased_constants,
                             filter_function, fine_grid, fourier_switching, frequency_grid,
                             global_fold_parts, normalized_max_ff, overlap_integral,
                             predict_expectation, second_cumulant, spectral_centroid,
                             switching_functions)
from corrzne.montecarlo import gaussian_dephasing_oracle
from corrzne.quantum import Circuit, Observable, gate
from corrzne.scaling import fold_global, fold_local

PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
W = frequency_grid(1024)


def _zz(sf):
    return sf.values[:, sf.index("Z"), sf.index("Z")]


def test_switching_examples():
    sf = switching_functions(free_induction_circuit(6))
    assert np.array_equal(sf.values, np.broadcast_to(np.eye(3), (6, 3, 3)))
    sf = switching_functions(Circuit(1, [[gate("I", 0)], [gate("X", 0)], [gate("I", 0)]]))
    np.testing.assert_allclose(_zz(sf), [-1, 1, 1], atol=1e-15)
    np.testing.assert_array_equal(sf.edges, [0, 1, 2, 3])


@pytest.mark.parametrize("circuit", [rb_circuit(2, 2, 0), cpmg_circuit(2, 2)])
def test_switching_invariants(circuit):
    sf = switching_functions(circuit)
    assert np.max(np.abs(sf.values)) <= 1 + 1e-9
    assert np.max(np.abs(sf.values[-1] - np.eye(len(sf.labels)))) < 1e-12
    # rows of an orthogonal transfer matrix
    np.testing.assert_allclose(np.sum(sf.values**2, axis=2), 1.0, atol=1e-12)


def test_fourier_examples():
    T = 8
    sf = switching_functions(free_induction_circuit(T))
    F = fourier_switching(sf, [0.0, 2 * np.pi / T]).pair("Z", "Z")
    assert F[0] == pytest.approx(T)
    assert abs(F[1]) < 1e-14
    w = np.linspace(-np.pi, np.pi, 101)
    f = fourier_switching(switching_functions(rb_circuit(1, 2, 3)), w).F
    np.testing.assert_allclose(f[::-1], f.conj(), atol=1e-13)


def test_filter_function_examples():
    T = 10
    w = np.linspace(1e-3, np.pi, 300)
    ffs = fourier_switching(switching_functions(free_induction_circuit(T)), w)
    ff = filter_function(ffs, ("Z", "Z"))
    np.testing.assert_allclose(ff, (2 * np.sin(w * T / 2) / w) ** 2, rtol=1e-12, atol=1e-12)
    rb = fourier_switching(switching_functions(rb_circuit(1, 3, 1)), W)
    assert np.all(filter_function(rb, ("Z", "X")) >= 0)
    with pytest.raises(KeyError, match="missing filter-function index"):
        filter_function(rb, ("Q", "Z"))


def test_parseval_band_identity():
    """The aliased sum of sinc^2 is one, so the in-band folded integral is exact."""
    c = rb_circuit(2, 2, 5)
    sf = switching_functions(c)
    w = np.linspace(-np.pi, np.pi, 4097)
    F = fourier_switching(sf, w).F
    dens = np.abs(F) ** 2 / np.sinc(w / (2 * np.pi))[:, None, None] ** 2
    lhs = np.trapezoid(dens, w, axis=0) / (2 * np.pi)
    rhs = np.sum(sf.values**2, axis=0)
    assert np.max(np.abs(lhs - rhs) / np.maximum(rhs, 1e-300)) < 1e-6


def test_parseval_full_line_with_analytic_tail():
    """int |F|^2 dw / 2pi over the real line equals T for one unit slot."""
    sf = SwitchingFunctionSet(np.array([0.0, 1.0]), np.ones((1, 1, 1)), ("Z",))
    cut = 200 * np.pi
    w = np.linspace(0, cut, 2_000_001)
    body = np.trapezoid(np.abs(fourier_switching(sf, w).F[:, 0, 0]) ** 2, w)
    # int_cut^inf (2 - 2 cos w) / w^2 dw
    si, _ = sici(cut)
    tail = 2 / cut - 2 * (np.cos(cut) / cut + si - np.pi / 2)
    assert (body + tail) / np.pi == pytest.approx(1.0, rel=1e-6)


def test_overlap_examples():
    ff = np.abs(fourier_switching(switching_functions(free_induction_circuit(12)), W)
                .pair("Z", "Z")) ** 2
    assert overlap_integral(lambda w: np.zeros_like(w), ff, W) == 0.0
    sigma2 = 0.01
    assert overlap_integral(ArmaModel([], [0.1]), ff, W) == pytest.approx(sigma2 * 12, rel=1e-6)
    with pytest.raises(ValueError, match="differ in shape"):
        overlap_integral(ArmaModel([], [0.1]), ff[:-1], W)


def test_cpmg_suppresses_pink():
    m = preset("pink", 1e-3)
    c = cpmg_circuit(2, 2)
    assert chi(c, m) < chi(free_induction_circuit(c.depth), m)


@pytest.mark.parametrize("kind", ["white", "lowpass", "pink", "brown"])
def test_grid_refinement(kind):
    m = preset(kind, 1e-3)
    c = cpmg_circuit(2, 2)
    a, b = chi(c, m, fine_grid(2048)), chi(c, m, fine_grid(4096))
    assert abs(a - b) / b < 1e-3


def test_predict_expectation_examples():
    assert predict_expectation(0.0, 0.3, 0.6) == pytest.approx(0.9)
    assert predict_expectation(1e3, 0.3, 0.6) == pytest.approx(0.3)
    c = free_induction_circuit(20)
    obs = Observable(np.full((2, 2), 0.5, dtype=complex), "projector", "+")
    a, b = dephased_constants(c, obs, PLUS)
    assert (a, b) == pytest.approx((0.5, 0.5))
    m = ArmaModel([], [0.07])
    oracle = 0.5 + 0.5 * gaussian_dephasing_oracle(m, 20)
    assert predict_expectation(chi(c, m), a, b) == pytest.approx(oracle, rel=0.05)


def test_cumulant_examples():
    c = free_induction_circuit(20)
    x = Observable.pauli("X")
    zero = second_cumulant(c, ArmaModel([], [0.0]), x, PLUS, W)
    assert np.all(zero.matrix == 0) and zero.expectation() == pytest.approx(1.0)
    m = ArmaModel([], [0.07])
    res = second_cumulant(c, m, x, PLUS, W)
    assert res.asymmetry < 1e-12
    assert res.expectation() == pytest.approx(gaussian_dephasing_oracle(m, 20), rel=0.05)
    with pytest.raises(ValueError, match="invertible observable"):
        second_cumulant(c, m, Observable.projector("0"), PLUS, W)
    with pytest.raises(ValueError, match="one-sided"):
        second_cumulant(c, m, x, PLUS, np.linspace(-1, 1, 11))


def test_comb_limits_and_zeros():
    x = np.array([0.0, 1e-9, np.pi, 2 * np.pi - 1e-10])
    for m in (1, 2, 3, 5):
        np.testing.assert_allclose(comb(m, x) ** 2, m * m, rtol=1e-9)
    m = 4
    zeros = np.array([k * np.pi / m for k in range(1, 8) if k % m])
    assert np.max(np.abs(comb(m, zeros))) < 1e-12
    y = np.linspace(0.1, 3.0, 7)
    np.testing.assert_allclose(comb(3, y), np.sin(3 * y) / np.sin(y), rtol=1e-12)


def test_global_fold_m0_is_base():
    c = rb_circuit(1, 3, 4)
    F1, F2, _ = global_fold_parts(c, W)
    F, G = analytic_global_fold(F1, F2, 0, W, c.depth)
    base = fourier_switching(switching_functions(c), W).F
    assert np.max(np.abs(F - base)) < 1e-12
    assert np.max(np.abs(G["11"])) == 0


def test_local_single_gate_equals_global():
    c = Circuit(1, [[gate("RY", 0, params=0.7)]])
    for M in (1, 2, 3):
        g = analytic_global_fold_ff(c, M, W).F
        loc = analytic_local_fold_ff(c, M, W).F
        assert np.max(np.abs(g - loc)) < 1e-12


def test_two_gate_local_fold_numeric():
    c = Circuit(1, [[gate("H", 0)], [gate("S", 0)]])
    num = fourier_switching(switching_functions(fold_local(c, 1)), W).F
    assert np.max(np.abs(analytic_local_fold_ff(c, 1, W).F - num)) < 1e-8


@pytest.mark.parametrize("fold", [fold_global, fold_local])
def test_integrated_response_scales(fold):
    c = rb_circuit(1, 4, 2)
    z = switching_functions(c).index("Z")

    def total(circ):
        # slot-density weighting makes the in-band integral the full-line one
        F = fourier_switching(switching_functions(circ), W).F[:, z, :]
        dens = np.sum(np.abs(F) ** 2, axis=1) / np.sinc(W / (2 * np.pi)) ** 2
        return np.trapezoid(dens, W)

    base = total(c)
    for lam in (3, 5):
        assert total(fold(c, (lam - 1) // 2)) / base == pytest.approx(lam, rel=0.01)


def test_normalized_max_ff():
    c = cpmg_circuit(2, 2)
    ref = normalized_max_ff(c, "ideal", [1], W)[1]
    for method in ("pulse_stretch", "global_fold", "local_fold", "gate_trotter"):
        np.testing.assert_allclose(normalized_max_ff(c, method, [1], W)[1], ref, atol=1e-12)
    # the folded response lives on comb lines pi/T apart; the peak stays on
    # the line nearest the base peak
    curves = normalized_max_ff(c, "global_fold", [1, 3, 5], W)
    for lam in (3, 5):
        shift = abs(W[np.argmax(curves[lam])] - W[np.argmax(curves[1])])
        assert shift <= np.pi / (2 * c.depth)
    st = normalized_max_ff(c, "pulse_stretch", [1, 3], W)
    assert spectral_centroid(st[3], W) < spectral_centroid(st[1], W)
