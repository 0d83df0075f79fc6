"""Hot inner loops, each with a numba path and a numpy fallback.

The public names at the bottom of the module are bound to one of the two
implementations according to :data:`nsparam._accel.USE_NUMBA`.  Both
implementations stay importable (``*_numba`` / ``*_numpy``) so tests and the
benchmark can compare them directly.
"""

import math

import numpy as np

from ._accel import USE_NUMBA, njit

_DTFT_CHUNK = 1 << 20


# --- accumulated autocorrelation ---------------------------------------------

@njit(cache=True, fastmath=True)
def _aacf_loop(re, im, max_lag, n1, n2):
    out = np.zeros(2 * max_lag + 1, dtype=np.complex128)
    for k in range(-max_lag, max_lag + 1):
        # split real accumulators let the compiler vectorize the sum
        acc_r = 0.0
        acc_i = 0.0
        for n in range(n1, n2 + 1):
            acc_r += re[n] * re[n + k] + im[n] * im[n + k]
            acc_i += re[n] * im[n + k] - im[n] * re[n + k]
        out[k + max_lag] = complex(acc_r, acc_i)
    return out


def aacf_numba(y, max_lag, n1, n2):
    y = np.asarray(y, dtype=np.complex128)
    return _aacf_loop(np.ascontiguousarray(y.real), np.ascontiguousarray(y.imag),
                      max_lag, n1, n2)


def aacf_numpy(y, max_lag, n1, n2):
    y = np.asarray(y, dtype=np.complex128)
    head = y[n1:n2 + 1]
    out = np.empty(2 * max_lag + 1, dtype=np.complex128)
    for k in range(-max_lag, max_lag + 1):
        out[k + max_lag] = np.vdot(head, y[n1 + k:n2 + 1 + k])
    return out


# --- discrete-time Fourier transform at arbitrary frequencies ----------------

@njit(cache=True)
def _dtft_loop(x, n, freqs):
    out = np.zeros(freqs.shape[0], dtype=np.complex128)
    for f in range(freqs.shape[0]):
        w = freqs[f]
        acc = 0.0 + 0.0j
        for i in range(x.shape[0]):
            ph = -w * n[i]
            acc += x[i] * complex(math.cos(ph), math.sin(ph))
        out[f] = acc
    return out


def dtft_numba(x, n, freqs):
    return _dtft_loop(np.ascontiguousarray(x, dtype=np.complex128),
                      np.ascontiguousarray(n, dtype=np.float64),
                      np.ascontiguousarray(freqs, dtype=np.float64))


def dtft_numpy(x, n, freqs):
    x = np.asarray(x, dtype=np.complex128)
    n = np.asarray(n, dtype=np.float64)
    freqs = np.atleast_1d(np.asarray(freqs, dtype=np.float64))
    out = np.empty(freqs.shape[0], dtype=np.complex128)
    step = max(1, _DTFT_CHUNK // max(1, x.shape[0]))
    for s in range(0, freqs.shape[0], step):
        block = freqs[s:s + step]
        out[s:s + step] = np.exp(-1j * np.outer(block, n)) @ x
    return out


# --- Bessel functions of the first kind, integer order -----------------------

@njit(cache=True)
def _bessel_series_loop(order, x):
    half = 0.5 * x
    term = 1.0
    for i in range(1, order + 1):
        term *= half / i
    total = term
    q = -half * half
    k = 0
    while True:
        k += 1
        term *= q / (k * (k + order))
        total += term
        if abs(term) <= 1e-17 * abs(total) or k > 500:
            break
    return total


def bessel_series_numba(order, x):
    return _bessel_series_loop(int(order), float(x))


def bessel_series_numpy(order, x):
    # terms t_k = (-1)^k (x/2)^(2k+i) / (k! (k+i)!) built from their ratios
    half = 0.5 * float(x)
    lead = 1.0
    for i in range(1, int(order) + 1):
        lead *= half / i
    k = np.arange(1, 120, dtype=np.float64)
    ratios = -(half * half) / (k * (k + order))
    terms = lead * np.concatenate(([1.0], np.cumprod(ratios)))
    return float(np.sum(terms[::-1]))


@njit(cache=True)
def _bessel_downward_loop(max_order, x):
    # Miller's algorithm normalized by J_0 + 2 * sum_k J_2k = 1
    start = max_order + int(x) + 40
    if start % 2 == 1:
        start += 1
    vals = np.zeros(max_order + 1)
    j_next = 0.0
    j_cur = 1e-300
    norm = 0.0
    for k in range(start, 0, -1):
        j_prev = (2.0 * k / x) * j_cur - j_next
        j_next = j_cur
        j_cur = j_prev
        if abs(j_cur) > 1e250:
            j_cur *= 1e-250
            j_next *= 1e-250
            norm *= 1e-250
            for m in range(max_order + 1):
                vals[m] *= 1e-250
        if k - 1 <= max_order:
            vals[k - 1] = j_cur
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * j_cur
    norm += j_cur
    for m in range(max_order + 1):
        vals[m] /= norm
    return vals


def bessel_downward_numba(max_order, x):
    return _bessel_downward_loop(int(max_order), float(x))


def bessel_downward_numpy(max_order, x):
    # the recurrence is inherently sequential; the pure-python loop is the fallback
    return _bessel_downward_loop.py_func(int(max_order), float(x)) if USE_NUMBA \
        else _bessel_downward_loop(int(max_order), float(x))


if USE_NUMBA:
    aacf = aacf_numba
    dtft = dtft_numba
    bessel_series = bessel_series_numba
    bessel_downward = bessel_downward_numba
else:
    aacf = aacf_numpy
    dtft = dtft_numpy
    bessel_series = bessel_series_numpy
    bessel_downward = bessel_downward_numpy
