"""Exponential extrapolation to zero noise and the method-comparison table.

The fit model is ``E(lambda) = A + B exp(-c lambda)`` with ``c >= 0``.  It
is solved in two stages: with ``A`` pinned to the fully dephased value of
the observable, ``log(E - A)`` is linear in ``lambda``; that solution then
seeds a bounded nonlinear least-squares refinement of all three
parameters.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .montecarlo import AngleCache, ExpectationCurve, RunConfig, _resolve, expectation_curve

EPS = 1e-9


@dataclass(frozen=True)
class ExpFit:
    """Parameters of ``A + B exp(-c lambda)``."""

    A: float
    B: float
    c: float
    residual_rms: float
    converged: bool
    stage: int = 2

    def __call__(self, lam):
        return self.A + self.B * np.exp(-self.c * np.asarray(lam, dtype=float))


@dataclass(frozen=True)
class ZneEstimate:
    value_at_zero: float
    fit: ExpFit
    metadata: dict = field(default_factory=dict)


def _curve_arrays(curve):
    if isinstance(curve, ExpectationCurve):
        return curve.lambdas, curve.means, dict(curve.metadata)
    lam, mean = curve[0], curve[1]
    return np.asarray(lam, dtype=float), np.asarray(mean, dtype=float), {}


def _rms(lam, e, a, b, c):
    return float(np.sqrt(np.mean((a + b * np.exp(-c * lam) - e) ** 2)))


def fit_exponential(curve, asymptote=None):
    """Fit ``A + B exp(-c lambda)`` to an expectation curve.

    Parameters
    ----------
    curve : ExpectationCurve or (lambdas, means)
        At least three points.
    asymptote : float, optional
        Stage-1 value of ``A``; defaults to ``curve.metadata['asymptote']``
        or 0.

    Returns
    -------
    ExpFit
        ``converged`` is false when no point lies above the asymptote (the
        stage-1 constant fit is returned) or when the refinement fails.
    """
    lam, e, meta = _curve_arrays(curve)
    if lam.size < 3:
        raise ValueError("need at least three points to fit")
    a0 = float(meta.get("asymptote", 0.0) if asymptote is None else asymptote)
    above = e - a0 > EPS
    if above.sum() < 2:
        b0 = float(np.mean(e) - a0)
        return ExpFit(a0, b0, 0.0, _rms(lam, e, a0, b0, 0.0), False, 1)
    slope, intercept = np.polyfit(lam[above], np.log(e[above] - a0), 1)
    b0, c0 = float(np.exp(intercept)), max(float(-slope), 0.0)
    stage1 = ExpFit(a0, b0, c0, _rms(lam, e, a0, b0, c0), False, 1)

    def resid(x):
        return x[0] + x[1] * np.exp(-x[2] * lam) - e

    try:
        res = optimize.least_squares(resid, x0=[a0, b0, c0],
                                     bounds=([-np.inf, -np.inf, 0.0], np.inf),
                                     method="trf", xtol=1e-14, ftol=1e-14, gtol=1e-14,
                                     max_nfev=2000)
    except (ValueError, FloatingPointError):
        return stage1
    if not (res.success and np.all(np.isfinite(res.x))):
        return stage1
    a, b, c = map(float, res.x)
    return ExpFit(a, b, c, _rms(lam, e, a, b, c), True, 2)


def extrapolate(fit, metadata=None):
    """Zero-noise value ``A + B``."""
    return ZneEstimate(fit.A + fit.B, fit, dict(metadata or {}))


def relative_error(e, e_star):
    """``|E - E*| / |E*|``."""
    e_star = np.asarray(e_star, dtype=float)
    if np.any(e_star == 0):
        raise ValueError("undefined relative error: reference value is zero")
    out = np.abs((np.asarray(e, dtype=float) - e_star) / e_star)
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# method comparison
# --------------------------------------------------------------------------

@dataclass
class ComparisonResult:
    """Per-circuit curves and the aggregated relative-error table.

    ``curves[(spectrum, method)]`` is a list with one curve per circuit
    (the ``ideal`` entry is the reference ``E*``); ``delta`` and ``band``
    hold per-circuit arrays of shape (circuits, lambdas).
    """

    lambdas: np.ndarray
    spectra: tuple
    methods: tuple
    curves: dict
    delta: dict
    band: dict

    def rows(self):
        """``(spectrum, method, lambda, mean_delta, std_delta, shot_band, circuits)``."""
        out = []
        for sp in self.spectra:
            for m in self.methods:
                d = self.delta[(sp, m)]
                band = np.sqrt(np.mean(self.band[(sp, m)], axis=0))
                std = d.std(axis=0, ddof=1) if d.shape[0] > 1 else np.zeros(d.shape[1])
                for i, lam in enumerate(self.lambdas):
                    out.append((sp, m, float(lam), float(d[:, i].mean()), float(std[i]),
                                float(band[i]), d.shape[0]))
        return out

    def mean_delta(self, spectrum, method):
        return self.delta[(spectrum, method)].mean(axis=0)

    def shot_band(self, spectrum, method):
        """Typical per-circuit standard error of ``(E - E*) / E*``."""
        return np.sqrt(np.mean(self.band[(spectrum, method)], axis=0))


def _one_circuit(index, spec, methods, models, cfg, backend):
    circuit, local_cfg = _resolve(spec, cfg)
    cache = AngleCache(backend=backend)
    out = {}
    for name, model in models.items():
        out[(name, "ideal")] = expectation_curve(circuit, "ideal", model, local_cfg, index, cache,
                                                 backend)
        for m in methods:
            if m == "ideal":
                continue
            out[(name, m)] = expectation_curve(circuit, m, model, local_cfg, index, cache, backend)
    return out


def method_comparison(specs, methods, spectra, cfg, threads=1, backend=None, progress=None):
    """Relative noise-scaling error of each method against ideal scaling.

    Parameters
    ----------
    specs : sequence
        Circuit specs (or circuits); circuit ``i`` uses noise streams
        indexed by ``i``.
    methods : sequence of str
        Scaling methods; ``ideal`` is always evaluated as the reference.
    spectra : dict
        Name to :class:`~corrzne.arma.ArmaModel`.
    threads : int
        Worker threads over circuits; results do not depend on it.
    """
    from .scaling import method_name

    methods = tuple(dict.fromkeys(method_name(m) for m in methods))
    if not specs:
        raise ValueError("need at least one circuit")
    names = tuple(spectra)

    def work(i):
        res = _one_circuit(i, specs[i], methods, spectra, cfg, backend)
        if progress is not None:
            progress(i)
        return res

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_circuit = list(pool.map(work, range(len(specs))))
    else:
        per_circuit = [work(i) for i in range(len(specs))]

    curves, delta, band = {}, {}, {}
    for sp in names:
        ref = [r[(sp, "ideal")] for r in per_circuit]
        e_star = np.stack([c.means for c in ref])
        se_star = np.stack([c.stderrs for c in ref])
        curves[(sp, "ideal")] = ref
        for m in methods:
            cs = [r[(sp, m)] for r in per_circuit] if m != "ideal" else ref
            curves[(sp, m)] = cs
            e = np.stack([c.means for c in cs])
            se = np.stack([c.stderrs for c in cs])
            delta[(sp, m)] = relative_error(e, e_star)
            band[(sp, m)] = (se**2 + se_star**2) / e_star**2
    return ComparisonResult(np.asarray(cfg.lambdas, dtype=float), names, methods, curves,
                            delta, band)


__all__ = ["ComparisonResult", "ExpFit", "RunConfig", "ZneEstimate", "extrapolate",
           "fit_exponential", "method_comparison", "relative_error"]
