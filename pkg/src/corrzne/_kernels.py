"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports cleanly and the environment
variable ``CORRZNE_DISABLE_NUMBA`` is unset (or ``0``).  Both paths
implement the same arithmetic; they agree to floating-point rounding but
are not guaranteed to be bit-identical to each other.  Within one backend
every kernel is deterministic.

Kernels
-------
stream_uniforms
    Counter-based uniforms: value ``i`` of stream ``key`` is a pure
    function of ``(key, i)`` (SplitMix64 output function).
stream_normals
    Inverse-CDF Gaussian variates built on :func:`stream_uniforms`.
arma_filter
    Run the recursion ``y_k = sum a_i y_{k-i} + sum b_j x_{k-j}`` for many
    streams at once, starting from explicit history buffers.
evolve_dephased
    Propagate a batch of statevectors through dense moment unitaries with
    a per-qubit ``exp(i y sigma^z)`` kick after every moment.
"""
import os

import numpy as np
from scipy.special import ndtri

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TWO_M53 = 2.0**-53


def _numba_requested():
    return os.environ.get("CORRZNE_DISABLE_NUMBA", "0").strip().lower() in ("", "0", "false", "no")


try:
    if not _numba_requested():
        raise ImportError("numba disabled by CORRZNE_DISABLE_NUMBA")
    import ctypes

    import numba
    from numba.extending import get_cython_function_address

    _ndtri_addr = get_cython_function_address("scipy.special.cython_special", "ndtri")
    _nb_ndtri = ctypes.CFUNCTYPE(ctypes.c_double, ctypes.c_double)(_ndtri_addr)
    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"


# --------------------------------------------------------------------------
# numpy implementations
# --------------------------------------------------------------------------

def mix64(z):
    """SplitMix64 finalizer on a uint64 array (wrapping arithmetic)."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _uniforms_np(keys, start, n):
    keys = np.asarray(keys, dtype=np.uint64)
    idx = np.arange(start + 1, start + n + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = keys[:, None] + idx[None, :] * GOLDEN
    bits = mix64(z) >> np.uint64(11)
    return (bits.astype(np.float64) + 0.5) * _TWO_M53


def _normals_np(keys, start, n):
    return ndtri(_uniforms_np(keys, start, n))


def _arma_filter_np(ar, ma, y_hist, x_hist, x):
    """Vectorised over streams; explicit loop over time only for the AR part."""
    ar = np.asarray(ar, dtype=np.float64)
    ma = np.asarray(ma, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    n_streams, n = x.shape
    p, q = ar.size, ma.size - 1
    # xbuf[:, q + k] = x_k ; xbuf[:, q - 1 - j] = x_{-1-j}
    xbuf = np.empty((n_streams, q + n))
    if q:
        xbuf[:, :q] = x_hist[:, ::-1]
    xbuf[:, q:] = x
    if q:
        win = np.lib.stride_tricks.sliding_window_view(xbuf, q + 1, axis=1)
        ma_part = win @ ma[::-1]
    else:
        ma_part = ma[0] * x
    if p == 0:
        y = ma_part
        new_y_hist = np.empty((n_streams, 0))
    else:
        ybuf = np.empty((n_streams, p + n))
        ybuf[:, :p] = y_hist[:, ::-1]
        for k in range(n):
            acc = ma_part[:, k].copy()
            for i in range(p):
                acc += ar[i] * ybuf[:, p + k - 1 - i]
            ybuf[:, p + k] = acc
        y = ybuf[:, p:]
        new_y_hist = ybuf[:, ::-1][:, :p].copy()
    new_x_hist = xbuf[:, ::-1][:, :q].copy()
    return y, new_y_hist, new_x_hist


def _evolve_np(states, unitaries, signs, angles):
    """states (S, D); unitaries (d, D, D); signs (D, n); angles (S, n, d)."""
    psi = np.array(states, dtype=np.complex128, copy=True)
    signs = np.asarray(signs, dtype=np.float64)
    for m in range(unitaries.shape[0]):
        psi = psi @ unitaries[m].T
        phase = angles[:, :, m] @ signs.T
        psi *= np.exp(1j * phase)
    return psi


# --------------------------------------------------------------------------
# numba implementations
# --------------------------------------------------------------------------

if HAVE_NUMBA:

    @numba.njit(cache=True, nogil=True)
    def _mix64_nb(z):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))

    @numba.njit(cache=True, nogil=True)
    def _uniforms_nb(keys, start, n):
        out = np.empty((keys.size, n))
        g = np.uint64(0x9E3779B97F4A7C15)
        for s in range(keys.size):
            k = keys[s]
            for i in range(n):
                z = k + np.uint64(start + i + 1) * g
                bits = _mix64_nb(z) >> np.uint64(11)
                out[s, i] = (np.float64(bits) + 0.5) * 1.1102230246251565e-16
        return out

    # ctypes pointer to ndtri: not cacheable, compiled on first use
    @numba.njit(nogil=True)
    def _normals_nb(keys, start, n):
        u = _uniforms_nb(keys, start, n)
        for s in range(u.shape[0]):
            for i in range(n):
                u[s, i] = _nb_ndtri(u[s, i])
        return u

    @numba.njit(cache=True, nogil=True)
    def _arma_filter_nb(ar, ma, y_hist, x_hist, x):
        n_streams, n = x.shape
        p = ar.size
        q = ma.size - 1
        y = np.empty((n_streams, n))
        new_y = np.empty((n_streams, p))
        new_x = np.empty((n_streams, q))
        xbuf = np.empty(q + n)
        ybuf = np.empty(p + n)
        for s in range(n_streams):
            for j in range(q):
                xbuf[q - 1 - j] = x_hist[s, j]
            for k in range(n):
                xbuf[q + k] = x[s, k]
            for i in range(p):
                ybuf[p - 1 - i] = y_hist[s, i]
            for k in range(n):
                acc = 0.0
                for j in range(q + 1):
                    acc += ma[j] * xbuf[q + k - j]
                for i in range(p):
                    acc += ar[i] * ybuf[p + k - 1 - i]
                ybuf[p + k] = acc
                y[s, k] = acc
            for i in range(p):
                new_y[s, i] = ybuf[p + n - 1 - i]
            for j in range(q):
                new_x[s, j] = xbuf[q + n - 1 - j]
        return y, new_y, new_x

    @numba.njit(cache=True, nogil=True)
    def _evolve_nb(states, unitaries, signs, angles):
        n_traj, dim = states.shape
        depth = unitaries.shape[0]
        nq = signs.shape[1]
        out = np.empty_like(states)
        tmp = np.empty(dim, dtype=np.complex128)
        psi = np.empty(dim, dtype=np.complex128)
        kick = np.empty(nq, dtype=np.complex128)
        for s in range(n_traj):
            for a in range(dim):
                psi[a] = states[s, a]
            for m in range(depth):
                for a in range(dim):
                    acc = 0j
                    for b in range(dim):
                        acc += unitaries[m, a, b] * psi[b]
                    tmp[a] = acc
                for j in range(nq):
                    kick[j] = complex(np.cos(angles[s, j, m]), np.sin(angles[s, j, m]))
                for a in range(dim):
                    ph = 1.0 + 0j
                    for j in range(nq):
                        if signs[a, j] > 0:
                            ph *= kick[j]
                        else:
                            ph *= kick[j].conjugate()
                    psi[a] = tmp[a] * ph
            for a in range(dim):
                out[s, a] = psi[a]
        return out


# --------------------------------------------------------------------------
# dispatch
# --------------------------------------------------------------------------

def stream_uniforms(keys, start, n, backend=None):
    """Uniforms in (0, 1) at positions ``start .. start+n-1`` of each stream."""
    keys = np.ascontiguousarray(keys, dtype=np.uint64).reshape(-1)
    if _use_numba(backend):
        return _uniforms_nb(keys, int(start), int(n))
    return _uniforms_np(keys, int(start), int(n))


def stream_normals(keys, start, n, backend=None):
    """Standard normal variates by inverse CDF of :func:`stream_uniforms`."""
    keys = np.ascontiguousarray(keys, dtype=np.uint64).reshape(-1)
    if _use_numba(backend):
        return _normals_nb(keys, int(start), int(n))
    return _normals_np(keys, int(start), int(n))


def arma_filter(ar, ma, y_hist, x_hist, x, backend=None):
    """Filter inputs ``x`` (streams, n) given histories (most recent first).

    Returns ``(y, y_hist, x_hist)`` with the histories advanced past ``x``.
    """
    ar = np.ascontiguousarray(ar, dtype=np.float64)
    ma = np.ascontiguousarray(ma, dtype=np.float64)
    x = np.ascontiguousarray(np.atleast_2d(x), dtype=np.float64)
    n_streams = x.shape[0]
    y_hist = np.ascontiguousarray(np.reshape(y_hist, (n_streams, ar.size)), dtype=np.float64)
    x_hist = np.ascontiguousarray(np.reshape(x_hist, (n_streams, ma.size - 1)), dtype=np.float64)
    if _use_numba(backend):
        return _arma_filter_nb(ar, ma, y_hist, x_hist, x)
    return _arma_filter_np(ar, ma, y_hist, x_hist, x)


def evolve_dephased(states, unitaries, signs, angles, backend=None):
    """Apply ``U_m`` then ``exp(i sum_j y_jm s_j)`` for each moment ``m``."""
    states = np.ascontiguousarray(states, dtype=np.complex128)
    unitaries = np.ascontiguousarray(unitaries, dtype=np.complex128)
    signs = np.ascontiguousarray(signs, dtype=np.float64)
    angles = np.ascontiguousarray(angles, dtype=np.float64)
    if _use_numba(backend):
        return _evolve_nb(states, unitaries, signs, angles)
    return _evolve_np(states, unitaries, signs, angles)


def _use_numba(backend):
    if backend is None:
        return HAVE_NUMBA
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but unavailable")
        return True
    if backend == "numpy":
        return False
    raise ValueError(f"unknown backend {backend!r}")
