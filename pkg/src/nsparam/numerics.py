"""Dense numerical kernels shared by the estimators.

Spectra, peak picking, SVD null vectors, polynomial roots, complex least
squares, integer-order Bessel functions and the discrete analytic signal.
Everything here is a pure function of its arguments.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.optimize
import scipy.signal

from . import _kernels
from .errors import InvalidArgumentError, NormalizationFailureError, RangeError
from .signal import ComplexSignal, as_signal

BESSEL_SERIES_MAX_X = 12.0
BESSEL_MAX_X = 60.0
TLS_TIE_TOL = 1e-12


def wrap_angle(w):
    """Map angular frequencies into (-pi, pi]."""
    w = np.asarray(w, dtype=float)
    out = np.pi - np.mod(np.pi - w, 2.0 * np.pi)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Uniform-grid spectrum over (-pi, pi] in rad/sample.

    ``source`` optionally keeps the transformed samples so that peak residues
    can be re-evaluated off-grid.
    """

    frequencies: np.ndarray
    values: np.ndarray
    source_length: int
    source: Optional[np.ndarray] = field(default=None, repr=False)
    norm: Optional[float] = None

    def __post_init__(self):
        if self.frequencies.shape != self.values.shape:
            raise InvalidArgumentError("frequencies and values differ in length")

    @property
    def bin_width(self):
        return 2.0 * np.pi / self.frequencies.size

    @property
    def magnitude(self):
        return np.abs(self.values)

    def residue_at(self, freqs):
        """Off-grid values ``norm * DTFT(source)``; needs ``source``."""
        scale = self.norm if self.norm is not None else 1.0 / self.source_length
        return dtft(self.source, freqs) * scale


@dataclass(frozen=True)
class SpectralPeak:
    frequency: float
    residue: complex

    @property
    def magnitude(self):
        return abs(self.residue)


def dtft(samples, freqs, n=None):
    """Evaluate ``sum_i x[i] exp(-j w n_i)`` at arbitrary frequencies."""
    x = np.asarray(samples, dtype=np.complex128)
    if n is None:
        n = np.arange(x.size, dtype=float)
    return _kernels.dtft(x, np.asarray(n, dtype=float),
                         np.atleast_1d(np.asarray(freqs, dtype=float)))


def periodogram(signal, nfft, window=None):
    """Zero-padded DFT normalized by ``1/N``.

    An in-bin tone ``A exp(j phi) exp(j w_b n)`` (``n`` counted from the first
    sample) yields the value ``A exp(j phi)`` at bin ``w_b``.  With this
    normalization ``N * sum_b |X_b|^2 = (nfft / N) * sum_n |x[n]|^2``, which is
    the plain Parseval identity when ``nfft == N``.

    An optional ``window`` tapers the samples; the normalization becomes
    ``1 / sum(window)`` so an in-bin tone still reads as its amplitude.
    """
    x = as_signal(signal).samples
    n_samples = x.size
    if n_samples == 0:
        raise InvalidArgumentError("periodogram of an empty signal")
    nfft = int(nfft)
    if nfft < n_samples:
        raise InvalidArgumentError(f"nfft={nfft} is smaller than the signal length {n_samples}")
    if nfft & (nfft - 1):
        raise InvalidArgumentError(f"nfft={nfft} is not a power of two")
    norm = 1.0 / n_samples
    if window is not None:
        window = np.asarray(window, dtype=float)
        if window.shape != x.shape:
            raise InvalidArgumentError("window length differs from the signal length")
        x = x * window
        norm = 1.0 / float(window.sum())
    values = np.fft.fft(x, nfft) * norm
    # reorder bins to run from -pi (exclusive) up to pi (inclusive)
    shift = nfft // 2 - 1
    values = np.roll(values, shift)
    freqs = 2.0 * np.pi * (np.arange(nfft) - shift) / nfft
    return Spectrum(freqs, values, n_samples, x, norm)


def _parabolic_offset(left, mid, right):
    denom = left - 2.0 * mid + right
    if denom >= 0.0 or not np.isfinite(denom):
        return 0.0
    return float(np.clip(0.5 * (left - right) / denom, -0.5, 0.5))


def find_peaks(spectrum, rel_threshold=0.05, min_separation=0.0):
    """Local maxima of ``|values|`` above ``rel_threshold * max``.

    Maxima are taken strongest first and a candidate closer than
    ``min_separation`` (rad/sample, circular distance) to an accepted peak is
    dropped.  The location is refined by a three-point parabola on the log
    magnitude; the residue is the normalized correlation of the source samples
    at the refined frequency, or the peak-bin value when no source is held.
    Results are sorted by frequency.
    """
    if not 0.0 < rel_threshold < 1.0:
        raise InvalidArgumentError("rel_threshold must lie in (0, 1)")
    mag = spectrum.magnitude
    size = mag.size
    if size == 0:
        raise InvalidArgumentError("empty spectrum")
    top = mag.max()
    if top == 0.0:
        return []
    left = np.roll(mag, 1)
    right = np.roll(mag, -1)
    is_max = (mag >= left) & (mag > right) & (mag > rel_threshold * top)
    candidates = np.flatnonzero(is_max)
    candidates = candidates[np.argsort(mag[candidates])[::-1]]

    tiny = top * 1e-300 + 1e-300
    log_mag = np.log(mag + tiny)
    dw = spectrum.bin_width
    accepted = []
    for b in candidates:
        offset = _parabolic_offset(log_mag[b - 1], log_mag[b], log_mag[(b + 1) % size])
        freq = wrap_angle(spectrum.frequencies[b] + offset * dw)
        if any(abs(wrap_angle(freq - f)) < min_separation for f, _ in accepted):
            continue
        accepted.append((freq, b))

    peaks = []
    for freq, b in accepted:
        if spectrum.source is not None:
            residue = complex(spectrum.residue_at(freq)[0])
        else:
            residue = complex(spectrum.values[b])
        peaks.append(SpectralPeak(freq, residue))
    peaks.sort(key=lambda p: p.frequency)
    return peaks


def refine_frequency(samples, freq, half_width, n=None):
    """Maximize ``|DTFT|`` of ``samples`` within ``freq +/- half_width``.

    A grid scan finer than the main-lobe width picks the best cell, whose
    stationary point is then solved to machine precision on the derivative of
    the squared magnitude.  Falls back to a bounded scalar search when the
    derivative does not change sign across the cell.
    """
    x = np.asarray(samples, dtype=np.complex128)
    if n is None:
        n = np.arange(x.size, dtype=float)
    n = np.asarray(n, dtype=float)
    xn = x * n

    def slope(w):
        X = _kernels.dtft(x, n, np.array([w]))[0]
        dX = -1j * _kernels.dtft(xn, n, np.array([w]))[0]
        return 2.0 * (X.conjugate() * dX).real

    span = max(float(np.ptp(n)), 1.0)
    cells = int(np.clip(np.ceil(2.0 * half_width * span / np.pi), 8, 4096))
    grid = np.linspace(freq - half_width, freq + half_width, 2 * cells + 1)
    mag = np.abs(_kernels.dtft(x, n, grid))
    best = int(np.argmax(mag))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, grid.size - 1)]
    s_lo, s_hi = slope(lo), slope(hi)
    if s_lo > 0.0 > s_hi:
        w = scipy.optimize.brentq(slope, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    else:
        res = scipy.optimize.minimize_scalar(
            lambda w: -abs(_kernels.dtft(x, n, np.array([w]))[0]),
            bounds=(lo, hi), method="bounded", options={"xatol": 1e-13})
        w = res.x
    return float(w)


def tls_null_vector(matrix, noise_dim=1):
    """Total-least-squares solution of ``C a = 0`` with ``a[0] = 1``.

    With ``noise_dim == 1`` this is the right singular vector of the smallest
    singular value.  A larger ``noise_dim`` returns the minimum-norm vector with
    unit first entry inside the span of the ``noise_dim`` weakest right
    singular vectors, which is what extended-order Prony needs when the null
    space is not one-dimensional.  Singular values tied with the smallest
    (within ``1e-12`` of the largest) always join that subspace.

    Returns ``(a, sigma_min)``.
    """
    C = np.asarray(matrix, dtype=np.complex128)
    if C.ndim != 2 or C.size == 0:
        raise InvalidArgumentError("matrix must be a nonempty 2-D array")
    rows, cols = C.shape
    _, s, vh = np.linalg.svd(C, full_matrices=True)
    sigma = np.zeros(cols)
    sigma[:s.size] = s
    sigma_min = float(sigma[-1])
    # singular values tied with the smallest one span an equally good subspace
    tied = int(np.sum(sigma - sigma_min <= TLS_TIE_TOL * max(float(sigma[0]), np.finfo(float).tiny)))
    noise_dim = int(np.clip(max(noise_dim, tied), 1, cols))
    basis = vh[cols - noise_dim:].conj().T  # columns span the weak subspace
    head = basis[0, :]
    scale = float(np.vdot(head, head).real)
    if np.sqrt(scale) < 1e-12:
        raise NormalizationFailureError(
            "first entry of the minimal singular vector vanishes; retry with a different order")
    a = basis @ head.conj() / scale
    a[0] = 1.0
    return a, sigma_min


def polynomial_roots(coeffs):
    """Roots of ``z^L + a_1 z^(L-1) + ... + a_L`` from companion eigenvalues.

    ``coeffs`` is ``[1, a_1, ..., a_L]``.  Trailing zero coefficients give
    roots at the origin.
    """
    a = np.asarray(coeffs, dtype=np.complex128).reshape(-1)
    if a.size == 0 or a[0] != 1.0:
        raise InvalidArgumentError("coefficient vector must start with exactly 1")
    degree = a.size - 1
    if degree == 0:
        return np.empty(0, dtype=np.complex128)
    companion = np.zeros((degree, degree), dtype=np.complex128)
    companion[0, :] = -a[1:]
    companion[np.arange(1, degree), np.arange(degree - 1)] = 1.0
    return np.linalg.eigvals(companion)


def least_squares_complex(basis, observations, rcond=1e-10):
    """Minimum-norm least-squares coefficients via a truncated SVD.

    Columns are scaled to unit norm before the decomposition so that decaying
    and growing exponentials share one truncation threshold, then the
    coefficients are scaled back.
    """
    B = np.asarray(basis, dtype=np.complex128)
    y = np.asarray(observations, dtype=np.complex128).reshape(-1)
    if B.ndim == 1:
        B = B[:, None]
    n_rows, n_cols = B.shape
    if n_rows < n_cols:
        raise InvalidArgumentError(f"underdetermined system: {n_rows} rows < {n_cols} columns")
    if y.size != n_rows:
        raise InvalidArgumentError("basis and observations differ in length")
    norms = np.linalg.norm(B, axis=0)
    norms[norms == 0.0] = 1.0
    u, s, vh = np.linalg.svd(B / norms, full_matrices=False)
    keep = s > rcond * s[0] if s.size else s.astype(bool)
    coef = vh[keep].conj().T @ ((u[:, keep].conj().T @ y) / s[keep])
    return coef / norms


def bessel_j(order, x):
    """Integer-order Bessel function of the first kind, ``0 <= x <= 60``.

    Ascending series up to ``x = 12``, normalized downward recurrence above.
    Negative orders are the caller's business (``J_-i = (-1)^i J_i``).
    """
    order = int(order)
    if order < 0:
        raise InvalidArgumentError("order must be nonnegative")
    x = float(x)
    if not 0.0 <= x <= BESSEL_MAX_X:
        raise RangeError(f"Bessel argument {x} outside [0, {BESSEL_MAX_X}]")
    if x == 0.0:
        return 1.0 if order == 0 else 0.0
    if x <= BESSEL_SERIES_MAX_X:
        return float(_kernels.bessel_series(order, x))
    return float(_kernels.bessel_downward(order, x)[order])


def bessel_j_table(max_order, x):
    """``[J_0(x), ..., J_max_order(x)]``."""
    max_order = int(max_order)
    x = float(x)
    if not 0.0 <= x <= BESSEL_MAX_X:
        raise RangeError(f"Bessel argument {x} outside [0, {BESSEL_MAX_X}]")
    if x == 0.0:
        out = np.zeros(max_order + 1)
        out[0] = 1.0
        return out
    if x <= BESSEL_SERIES_MAX_X:
        return np.array([_kernels.bessel_series(i, x) for i in range(max_order + 1)])
    return np.asarray(_kernels.bessel_downward(max_order, x), dtype=float)


def bessel_j_signed(orders, x):
    """``J_i(x)`` for possibly negative integer orders ``i``."""
    orders = np.asarray(orders, dtype=int)
    table = bessel_j_table(int(np.max(np.abs(orders))) if orders.size else 0, x)
    vals = table[np.abs(orders)]
    return np.where((orders < 0) & (orders % 2 == 1), -vals, vals)


def analytic_signal(real_samples, center=0):
    """One-sided discrete analytic signal.

    Negative-frequency bins are zeroed, positive bins doubled, DC and Nyquist
    kept, so the real part reproduces the input.
    """
    x = np.asarray(real_samples)
    if x.size == 0:
        raise InvalidArgumentError("analytic signal of an empty sequence")
    if np.iscomplexobj(x):
        if np.any(x.imag != 0.0):
            raise InvalidArgumentError("analytic_signal expects real samples")
        x = x.real
    if x.size < 4:
        raise InvalidArgumentError("analytic_signal needs at least 4 samples")
    z = scipy.signal.hilbert(np.asarray(x, dtype=float))
    return ComplexSignal(z, center)
