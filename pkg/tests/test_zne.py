import numpy as np
import pytest
from hypothesis import given, strategies as st

from corrzne.arma import ArmaModel
from corrzne.circuits import CircuitSpec, free_induction_circuit
from corrzne.montecarlo import ExpectationCurve, RunConfig, expectation_curve
from corrzne.quantum import Observable
from corrzne.zne import ExpFit, extrapolate, fit_exponential, method_comparison, relative_error

LAMS = np.array([1.0, 3, 5, 7, 9])


def white(sigma):
    return ArmaModel([], [sigma])



def test_synthetic_recovery():
    fit = fit_exponential((LAMS, 0.25 + 0.75 * np.exp(-0.3 * LAMS)), asymptote=0.25)
    assert fit.converged
    assert max(abs(fit.A - 0.25), abs(fit.B - 0.75), abs(fit.c - 0.3)) < 1e-6


@given(st.floats(0.0, 0.5), st.floats(0.1, 1.0), st.floats(0.01, 0.5), st.floats(-0.05, 0.05))
def test_synthetic_recovery_from_offset_start(a, b, c, shift):
    """Stage 2 recovers all three parameters when stage 1 pins a wrong asymptote."""
    e = a + b * np.exp(-c * LAMS)
    fit = fit_exponential((LAMS, e), asymptote=a + shift if a + shift < e.min() else a)
    assert np.max(np.abs(fit(LAMS) - e)) < 1e-6


def test_constant_curve():
    fit = fit_exponential(ExpectationCurve(LAMS, np.full(5, 0.25), np.zeros(5),
                                           {"asymptote": 0.25}))
    assert not fit.converged and fit.stage == 1
    assert fit.B == pytest.approx(0.0, abs=1e-12)
    assert extrapolate(fit).value_at_zero == pytest.approx(0.25)


def test_fit_needs_three_points():
    with pytest.raises(ValueError, match="three points"):
        fit_exponential(([1, 3], [0.9, 0.8]))


def test_extrapolate_examples():
    assert extrapolate(ExpFit(0.25, 0.75, 0.7, 0.0, True)).value_at_zero == 1.0
    assert extrapolate(ExpFit(0.5, 0.0, 0.0, 0.0, True)).value_at_zero == 0.5


def test_relative_error_examples():
    assert relative_error(0.7, 0.7) == 0.0
    assert relative_error(1.1, 1.0) == pytest.approx(0.1)
    assert relative_error(0.4, 0.5) == pytest.approx(0.2)
    with pytest.raises(ValueError, match="undefined relative error"):
        relative_error(0.3, 0.0)


@given(st.floats(-10, 10), st.floats(0.1, 10), st.floats(0.1, 100).map(lambda k: k))
def test_relative_error_scale_invariant(e, e_star, k):
    assert relative_error(k * e, k * e_star) == pytest.approx(relative_error(e, e_star), rel=1e-9)


def test_free_induction_decay_rate():
    """Under white noise the fitted decay rate is 2 K sigma^2."""
    k, sigma = 10, 0.05
    plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
    obs = Observable(np.full((2, 2), 0.5, dtype=complex), "projector", "+")
    cfg = RunConfig(3000, seed=1, observable=obs, exact=True, initial=plus)
    cur = expectation_curve(free_induction_circuit(k), "ideal", white(sigma), cfg)
    fit = fit_exponential(cur, asymptote=0.5)
    assert fit.c == pytest.approx(2 * k * sigma**2, rel=0.1)


def test_white_rb_extrapolates_to_one():
    spec = CircuitSpec("rb", 1, 3, seed=2)
    for method in ("ideal", "pulse_stretch", "global_fold", "local_fold", "gate_trotter"):
        cur = expectation_curve(spec, method, white(0.03), RunConfig(3000, seed=6))
        assert abs(extrapolate(fit_exponential(cur)).value_at_zero - 1.0) < 0.05


def test_method_comparison_table():
    specs = [CircuitSpec("rb", 1, 2, seed=s) for s in range(3)]
    models = {"white": white(0.03), "zero": ArmaModel([], [0.0])}
    cfg = RunConfig(500, seed=2, lambdas=(1, 3, 5))
    res = method_comparison(specs, ["ideal", "global_fold"], models, cfg)
    np.testing.assert_array_equal(res.mean_delta("zero", "global_fold"), 0.0)
    np.testing.assert_array_equal(res.mean_delta("white", "ideal"), 0.0)
    assert res.mean_delta("white", "global_fold")[0] == 0.0
    assert np.all(res.shot_band("white", "global_fold") > 0)
    rows = res.rows()
    assert len(rows) == 2 * 2 * 3
    again = method_comparison(specs, ["ideal", "global_fold"], models, cfg, threads=3)
    assert again.rows() == rows
