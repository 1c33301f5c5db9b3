"""ARMA models of time-correlated dephasing angles.

The angle sequence injected after every circuit moment follows

    y_k = sum_{i=1..p} a_i y_{k-i} + sum_{j=0..q} b_j x_k-j,   x_k ~ N(0, 1)

and its two-sided power spectrum on the Nyquist band is

    S(w) = |sum_j b_j e^{-ijw}|^2 / |1 - sum_i a_i e^{-iiw}|^2

normalised so that ``integral S dw / 2pi`` over ``[-pi, pi]`` is the
process variance.  The recursion and the spectrum use the same sign for
the AR coefficients.
"""
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, signal

from . import _kernels
from .rng import Stream, StreamId

BURN_IN_FACTOR = 10
BURN_IN_MIN_ORDER = 100
STABILITY_MARGIN = 1e-6
# relative l1 mass of stretch-filter taps that may be discarded
TAP_TRIM_TOL = 1e-3

PRESETS = ("white", "lowpass", "pink", "brown")
DEFAULT_POWER = 1e-4
LOWPASS_CUTOFF = 0.01 * np.pi
BROWN_POLE = 0.999
# pole/zero corner frequencies of the 1/f cascade (rad per gate time)
PINK_POLES = tuple(1e-3 * np.pi * 10.0**k for k in range(3))
PINK_ZERO_RATIO = 10.0**0.5


class UnstableModelError(ValueError):
    """AR polynomial has a root on or outside the unit circle."""


class ScaleFactorError(ValueError):
    """Scale factor outside the range a transform accepts."""


@dataclass(frozen=True)
class ArmaModel:
    """AR coefficients ``a_1..a_p`` and MA coefficients ``b_0..b_q``."""

    ar: tuple = ()
    ma: tuple = (1.0,)
    kind: str = "custom"
    power: float = None
    _gain: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ar = tuple(float(a) for a in np.atleast_1d(np.asarray(self.ar, dtype=float)))
        ma = tuple(float(b) for b in np.atleast_1d(np.asarray(self.ma, dtype=float)))
        if len(ma) == 0:
            raise ValueError("ma must contain at least b_0")
        if not all(map(math.isfinite, ar + ma)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "ar", ar)
        object.__setattr__(self, "ma", ma)
        object.__setattr__(self, "_gain", float(np.linalg.norm(ma)))
        if ar:
            rmax = pole_radius(ar)
            if rmax >= 1.0 - STABILITY_MARGIN:
                raise UnstableModelError(
                    f"AR polynomial root radius {rmax:.9f} violates stationarity")

    @property
    def p(self):
        return len(self.ar)

    @property
    def q(self):
        return len(self.ma) - 1

    @property
    def gain(self):
        """Euclidean norm of the MA coefficients."""
        return self._gain

    def unit_gain(self):
        """Same AR part with MA coefficients scaled to unit norm."""
        if self._gain == 0.0:
            return self
        return ArmaModel(self.ar, np.asarray(self.ma) / self._gain, self.kind)

    def to_record(self):
        return {"ar": list(self.ar), "ma": list(self.ma), "kind": self.kind, "power": self.power}

    @classmethod
    def from_record(cls, rec):
        if isinstance(rec, str):
            rec = json.loads(rec)
        return cls(tuple(rec.get("ar", ())), tuple(rec["ma"]), rec.get("kind", "custom"),
                   rec.get("power"))


def pole_radius(ar):
    """Largest root modulus of ``z^p - a_1 z^{p-1} - ... - a_p``."""
    ar = np.asarray(ar, dtype=float)
    if ar.size == 0:
        return 0.0
    return float(np.max(np.abs(np.roots(np.r_[1.0, -ar]))))


# --------------------------------------------------------------------------
# spectra
# --------------------------------------------------------------------------

class SpectrumFn:
    """Even, non-negative power density on ``[-pi, pi]``."""

    def __init__(self, fn, label=""):
        self._fn = fn
        self.label = label

    def __call__(self, omega):
        omega = np.abs(np.asarray(omega, dtype=float))
        return np.asarray(self._fn(omega), dtype=float)

    def __repr__(self):
        return f"SpectrumFn({self.label!r})"


def spectrum(model, omega):
    """Power density of ``model`` at normalised angular frequency ``omega``."""
    omega = np.asarray(omega, dtype=float)
    z = np.exp(-1j * omega)
    num = np.abs(np.polynomial.polynomial.polyval(z, model.ma)) ** 2
    if model.p:
        den = np.abs(np.polynomial.polynomial.polyval(z, np.r_[1.0, -np.asarray(model.ar)])) ** 2
        return num / den
    return num


def model_spectrum(model):
    return SpectrumFn(lambda w: spectrum(model, w), label=model.kind)


def integrated_power(spec, n=1 << 16):
    """``integral S dw / 2pi`` over the Nyquist band, trapezoid on [0, pi]."""
    w = np.linspace(0.0, np.pi, n + 1)
    s = spec(w) if callable(spec) else spectrum(spec, w)
    return float(np.trapezoid(s, w) / np.pi)


def impulse_response(model, n):
    """First ``n`` samples of the response to ``x_0 = 1``."""
    x = np.zeros(n)
    x[0] = 1.0
    return signal.lfilter(model.ma, np.r_[1.0, -np.asarray(model.ar)], x)


def _impulse_length(model, tol=1e-17, cap=1 << 21):
    r = pole_radius(model.ar)
    if r == 0.0:
        return model.q + 1
    n = int(math.ceil(math.log(tol) / math.log(r))) + model.q + 16
    return min(n, cap)


def autocovariance(model, max_lag):
    """``gamma(k) = E[y_t y_{t+k}]`` for ``k = 0..max_lag`` via the impulse response."""
    n = _impulse_length(model) + max_lag
    h = impulse_response(model, n)
    if max_lag == 0:
        return np.array([h @ h])
    full = signal.correlate(h, h, mode="full", method="fft" if n > 4096 else "direct")
    mid = h.size - 1
    return full[mid:mid + max_lag + 1]


def stationary_state_covariance(model):
    """Joint covariance of ``(y_{-1..-p}, x_{-1..-q})`` under stationarity."""
    p, q = model.p, model.q
    cov = np.zeros((p + q, p + q))
    if p:
        n = _impulse_length(model) + p + q
        h = impulse_response(model, n)
        gamma = np.array([h[: n - k] @ h[k:] for k in range(p)])
        for i in range(p):
            for j in range(p):
                cov[i, j] = gamma[abs(i - j)]
            for j in range(q):
                if j >= i:
                    cov[i, p + j] = cov[p + j, i] = h[j - i]
    cov[p:, p:] = np.eye(q)
    return cov


def _state_factor(model):
    cov = stationary_state_covariance(model)
    if cov.size == 0:
        return cov
    try:
        return linalg.cholesky(cov, lower=True)
    except linalg.LinAlgError:
        w, v = linalg.eigh(cov)
        return v * np.sqrt(np.clip(w, 0.0, None))


def scale_power(model, lam):
    """Multiply the spectrum by ``lam`` via ``b -> sqrt(lam) b``."""
    if not lam >= 0:
        raise ScaleFactorError(f"invalid scale factor {lam!r}")
    if lam == 1:
        return model
    power = None if model.power is None else model.power * lam
    return ArmaModel(model.ar, np.sqrt(lam) * np.asarray(model.ma), model.kind, power)


def stretched_target(model, lam):
    """The frequency-stretched density ``lam * S(w / lam)``."""
    return SpectrumFn(lambda w: lam * spectrum(model, w / lam), label=f"{model.kind}*{lam:g}")


def _map_roots(roots, lam):
    kept = []
    for r in roots:
        rho, theta = abs(r), np.angle(r)
        if 0.0 < rho < 1.0 and abs(theta) * lam < np.pi:
            kept.append(rho**lam * np.exp(1j * lam * theta))
    return np.array(kept, dtype=complex)


def stretch_model(model, lam, n_taps=1024):
    """ARMA model whose spectrum approximates ``lam * S(w / lam)``.

    Poles (and, for short MA parts, zeros) inside the unit circle are
    moved along ``r e^{it} -> r^lam e^{i lam t}``, which reproduces the
    stretched corner frequencies of the low-frequency structure.  The
    remaining smooth ratio between the target and that rational part is
    realised with a linear-phase FIR filter designed by frequency sampling
    on a ``4 * n_taps`` grid and truncated with a Hann window.
    """
    if not lam >= 1:
        raise ScaleFactorError(f"stretch factor must be >= 1, got {lam!r}")
    if n_taps < 64 or n_taps % 2:
        raise ValueError("n_taps must be even and >= 64")
    if lam == 1 or model.gain == 0.0:
        return model
    a_map = np.zeros(0)
    if model.p:
        poles = _map_roots(np.roots(np.r_[1.0, -np.asarray(model.ar)]), lam)
        a_map = -np.real(np.poly(poles))[1:] if poles.size else np.zeros(0)
    b_map = np.ones(1)
    if 0 < model.q <= 8 and model.ma[0] != 0.0:
        zeros = _map_roots(np.roots(model.ma), lam)
        if zeros.size:
            b_map = np.real(np.poly(zeros))
    rational = ArmaModel(a_map, b_map)

    n_grid = 4 * n_taps
    w = 2 * np.pi * np.arange(n_grid) / n_grid
    w = np.minimum(w, 2 * np.pi - w)
    ratio = lam * spectrum(model, w / lam) / spectrum(rational, w)
    h = np.fft.ifft(np.sqrt(ratio)).real
    m = n_taps // 2
    taps = np.r_[h[n_grid - m:], h[: m + 1]] * signal.windows.hann(n_taps + 3, sym=True)[1:-1]
    taps = _trim_symmetric(taps, TAP_TRIM_TOL)
    return ArmaModel(a_map, np.convolve(b_map, taps), f"{model.kind}-stretched")


def _trim_symmetric(taps, tol):
    """Drop outer tap pairs whose cumulative magnitude is below ``tol`` of the total."""
    mag = np.abs(taps)
    m = taps.size // 2
    outer = mag[:m] + mag[::-1][:m]
    cut = np.searchsorted(np.cumsum(outer), tol * mag.sum(), side="right")
    return taps[cut: taps.size - cut]


def stretch_spectrum(model, lam, n_taps=1024, stream=None, burn_in=None):
    """Noise generator realising the stretched spectrum ``lam * S(w / lam)``."""
    return NoiseGenerator(stretch_model(model, lam, n_taps), stream, burn_in=burn_in)


# --------------------------------------------------------------------------
# presets
# --------------------------------------------------------------------------

def _lowpass_pole(cutoff):
    c = math.cos(cutoff)
    return (2.0 - c) - math.sqrt((2.0 - c) ** 2 - 1.0)


def _normalise(ar, ma, kind, power):
    shape = ArmaModel(ar, ma)
    var = autocovariance(shape, 0)[0]
    return ArmaModel(ar, np.asarray(ma) * math.sqrt(power / var), kind, power)


def preset(kind, power):
    """One of the four reference spectra with integrated power ``power``.

    ``white``   MA(0), flat.
    ``lowpass`` one AR pole, half-power point at ``0.01 pi``.
    ``pink``    three pole/zero pairs, log-log slope close to -1.
    ``brown``   one AR pole at 0.999, slope close to -2 above the corner.
    """
    if not power > 0:
        raise ValueError("power must be positive")
    kind = kind.lower()
    if kind == "white":
        return ArmaModel((), (math.sqrt(power),), "white", power)
    if kind == "lowpass":
        return _normalise((_lowpass_pole(LOWPASS_CUTOFF),), (1.0,), "lowpass", power)
    if kind == "brown":
        return _normalise((BROWN_POLE,), (1.0,), "brown", power)
    if kind == "pink":
        poles = np.exp(-np.asarray(PINK_POLES))
        zeros = np.exp(-np.asarray(PINK_POLES) * PINK_ZERO_RATIO)
        return _normalise(-np.poly(poles)[1:], np.poly(zeros), "pink", power)
    raise ValueError(f"unknown preset {kind!r}; expected one of {PRESETS}")


# --------------------------------------------------------------------------
# spectral estimation
# --------------------------------------------------------------------------

def fit_ar(samples, order):
    """Least-squares AR(``order``) coefficients of a sample path."""
    x = np.asarray(samples, dtype=float)
    lags = np.column_stack([x[order - i - 1: x.size - i - 1] for i in range(order)])
    return np.linalg.lstsq(lags, x[order:], rcond=None)[0]


def periodogram(samples, n_fft, prewhiten=0):
    """Welch estimate (Hann, 50% overlap) of the two-sided density.

    With ``prewhiten > 0`` an AR filter of that order is fitted to the
    samples by least squares, the Welch estimate is taken of the filtered
    residual and the filter's response is divided back out.  This removes
    most of the leakage and resolution bias at sharp low-frequency peaks,
    so short segments (low variance) can be used.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.size < n_fft + prewhiten:
        raise ValueError(f"need at least {n_fft + prewhiten} samples, got {samples.size}")
    a = np.zeros(0)
    if prewhiten and np.any(samples):
        a = fit_ar(samples, prewhiten)
        samples = signal.lfilter(np.r_[1.0, -a], 1.0, samples)[prewhiten:]
    f, pxx = signal.welch(samples, fs=2 * np.pi, window="hann", nperseg=n_fft,
                          noverlap=n_fft // 2, detrend=False, return_onesided=False,
                          scaling="density")
    f, s = np.fft.fftshift(f), 2 * np.pi * np.fft.fftshift(pxx)
    if a.size:
        s = s / np.abs(np.polynomial.polynomial.polyval(np.exp(-1j * f), np.r_[1.0, -a])) ** 2
    # close the grid at +pi using evenness
    f = np.r_[f, np.pi]
    s = np.r_[s, s[0]]

    def evaluate(w):
        return np.interp(w, f, s)

    fn = SpectrumFn(evaluate, label="welch")
    fn.omega, fn.values = f, s
    return fn


# --------------------------------------------------------------------------
# sampling
# --------------------------------------------------------------------------

def burn_in_length(model):
    return BURN_IN_FACTOR * max(model.p, model.q, BURN_IN_MIN_ORDER)


#: MA orders above this are filtered by FFT convolution in :func:`generate`
FFT_MA_ORDER = 32


def stream_span(model, n, burn_in=None):
    """Number of stream positions :func:`generate` reads for ``n`` samples."""
    if burn_in is None:
        burn_in = burn_in_length(model)
    return model.p + model.q + burn_in + n


def generate(model, keys, n, burn_in=None, backend=None, normals=None):
    """Sample ``n`` post-burn-in angles for each stream key.

    Stream layout: positions ``0 .. p+q-1`` draw a stationary initial state
    (exact, so the burn-in only adds mixing), the next ``burn_in`` drive the
    warm-up and the following ``n`` produce the returned samples.  For pure
    MA models the warm-up is skipped by counter arithmetic, which gives the
    same values as running it.

    ``normals`` may supply the stream values at positions ``0 ..``
    (at least :func:`stream_span` columns) to avoid regenerating them.
    """
    keys = np.atleast_1d(np.asarray(keys, dtype=np.uint64))
    if burn_in is None:
        burn_in = burn_in_length(model)
    if model.gain == 0.0 or n == 0:
        return np.zeros((keys.size, n))
    unit = model.unit_gain()
    p, q = unit.p, unit.q

    def draw(start, count):
        if normals is not None:
            return normals[:, start:start + count]
        return _kernels.stream_normals(keys, start, count, backend)

    if p == 0:
        # x_k sits at stream position q + k, so the warm-up is an offset
        x = draw(burn_in, q + n)
        if q > FFT_MA_ORDER:
            return model.gain * signal.oaconvolve(x, unit.ma[None, :], mode="valid", axes=1)
        y, _, _ = _kernels.arma_filter((), unit.ma, np.zeros((keys.size, 0)), x[:, :q][:, ::-1],
                                       x[:, q:], backend)
        return model.gain * y
    z = draw(0, p + q + burn_in + n)
    state = z[:, : p + q] @ _state_factor(unit).T
    if q > FFT_MA_ORDER:
        xfull = np.concatenate([state[:, p:][:, ::-1], z[:, p + q:]], axis=1)
        v = signal.oaconvolve(xfull, np.asarray(unit.ma)[None, :], mode="valid", axes=1)
        y, _, _ = _kernels.arma_filter(unit.ar, (1.0,), state[:, :p], np.zeros((keys.size, 0)),
                                       v, backend)
    else:
        y, _, _ = _kernels.arma_filter(unit.ar, unit.ma, state[:, :p], state[:, p:],
                                       z[:, p + q:], backend)
    return model.gain * y[:, burn_in:]


class NoiseGenerator:
    """Stateful single-stream sampler of an :class:`ArmaModel`.

    ``step()`` draws the next Gaussian input from the stream; ``step(x)``
    forces the input instead.  Construct with ``stream=None`` and
    ``warm=False`` for a zero-history generator.
    """

    def __init__(self, model, stream=None, burn_in=None, warm=True):
        self.model = model
        self._unit = model.unit_gain()
        if stream is None:
            stream = StreamId(0)
        if isinstance(stream, StreamId):
            stream = Stream(stream)
        self.stream = stream
        p, q = self._unit.p, self._unit.q
        self.y_history = np.zeros(p)
        self.x_history = np.zeros(q)
        self.burn_in = burn_in_length(model) if burn_in is None else int(burn_in)
        if warm and model.gain != 0.0:
            self._warm_up()

    def _warm_up(self):
        p, q = self._unit.p, self._unit.q
        key = self.stream._key
        if p == 0:
            self.stream.skip(self.burn_in)
            self.x_history = self.stream.normals(q)[::-1].copy()
            return
        z = self.stream.normals(p + q)
        state = _state_factor(self._unit) @ z
        _, yh, xh = _kernels.arma_filter(self._unit.ar, self._unit.ma, state[None, :p],
                                         state[None, p:],
                                         _kernels.stream_normals(key, self.stream.position,
                                                                 self.burn_in))
        self.stream.skip(self.burn_in)
        self.y_history, self.x_history = yh[0], xh[0]

    def step(self, x=None):
        """Advance one sample and return the rotation angle ``y_k``."""
        if x is None:
            x = float(self.stream.normals(1)[0])
        unit = self._unit
        acc = unit.ma[0] * x
        for j in range(unit.q):
            acc += unit.ma[j + 1] * self.x_history[j]
        for i in range(unit.p):
            acc += unit.ar[i] * self.y_history[i]
        if unit.q:
            self.x_history = np.r_[x, self.x_history[:-1]]
        if unit.p:
            self.y_history = np.r_[acc, self.y_history[:-1]]
        return self.model.gain * acc

    def take(self, n):
        """Next ``n`` samples (same values as ``n`` calls of :meth:`step`)."""
        x = self.stream.normals(n)
        y, yh, xh = _kernels.arma_filter(self._unit.ar, self._unit.ma, self.y_history[None, :],
                                         self.x_history[None, :], x[None, :])
        self.y_history, self.x_history = yh[0], xh[0]
        return self.model.gain * y[0]
