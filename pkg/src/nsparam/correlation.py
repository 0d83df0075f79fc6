"""Single-record correlation statistics.

Expectations over random phases are replaced by the product computed from
one record; lag structure and summation windows are kept exactly.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InvalidArgumentError
from .numerics import bessel_j_signed
from .signal import as_signal


@dataclass(frozen=True, eq=False)
class AacfSequence:
    """Accumulated autocorrelation ``c[k]`` for ``k = -max_lag .. max_lag``."""

    values: np.ndarray
    max_lag: int
    window: tuple

    @property
    def lags(self):
        return np.arange(-self.max_lag, self.max_lag + 1)

    def at(self, k):
        return self.values[np.asarray(k) + self.max_lag]


@dataclass(frozen=True, eq=False)
class ProductFunction:
    """``p[k]`` at even lags ``k = -K, -K+2, ..., K``.

    ``values[i]`` holds ``p[2 (i - K/2)]``; the natural time variable of the
    sequence is ``k/2``, with unit spacing.
    """

    values: np.ndarray
    max_even_lag: int

    @property
    def half_lags(self):
        h = self.max_even_lag // 2
        return np.arange(-h, h + 1)

    @property
    def lags(self):
        return 2 * self.half_lags

    def at(self, k):
        k = np.asarray(k)
        if np.any(k % 2):
            raise InvalidArgumentError("product function is defined at even lags only")
        return self.values[k // 2 + self.max_even_lag // 2]


@dataclass(frozen=True, eq=False)
class EnvelopeCorrelations:
    """``r1[n] = |x[n]|^2`` over the record and ``r2[n] = x*[-n] x[n]``.

    ``r1`` is indexed like the source samples (``center`` marks ``n = 0``);
    ``r2`` covers ``n = -half_width .. half_width``.
    """

    r1: np.ndarray
    r2: np.ndarray
    center: int
    half_width: int

    @property
    def r1_times(self):
        return np.arange(self.r1.size) - self.center

    @property
    def r2_times(self):
        return np.arange(-self.half_width, self.half_width + 1)


@dataclass(frozen=True)
class BurstSegment:
    start: int
    end: int
    peak_index: int

    def __post_init__(self):
        if not self.start <= self.peak_index <= self.end:
            raise InvalidArgumentError("peak_index outside [start, end]")

    def __len__(self):
        return self.end - self.start + 1


def sample_aacf(signal, max_lag):
    """``c[k] = sum_{n=J}^{N-1-J} conj(y[n]) y[n+k]`` over one fixed window."""
    y = as_signal(signal).samples
    J = int(max_lag)
    if J < 1:
        raise InvalidArgumentError("max_lag must be positive")
    N = y.size
    if N < 2 * J + 2:
        raise InvalidArgumentError(f"signal length {N} < 2*max_lag + 2 = {2 * J + 2}")
    n1, n2 = J, N - 1 - J
    return AacfSequence(_kernels.aacf(y, J, n1, n2), J, (n1, n2))


def theoretical_aacf_exponential(components, n1, n2, max_lag):
    """Random-phase expectation of the aacf of damped complex exponentials.

    ``c[k] = sum_m A_m^2 (sum_{n=n1}^{n2} exp(2 alpha_m n)) exp(s_m k)``.
    """
    if n1 > n2:
        raise InvalidArgumentError("window start after window end")
    J = int(max_lag)
    k = np.arange(-J, J + 1)
    n = np.arange(n1, n2 + 1)
    c = np.zeros(k.size, dtype=np.complex128)
    for comp in components:
        weight = comp.amplitude ** 2 * np.sum(np.exp(2.0 * comp.damping * n))
        c += weight * np.exp((comp.damping + 1j * comp.frequency) * k)
    return AacfSequence(c, J, (int(n1), int(n2)))


def product_function(signal, max_even_lag):
    """``p[k] = conj(x[-k/2]) x[k/2]`` for even ``|k| <= max_even_lag``.

    The symmetric evaluation about the signal center is the one whose
    expansion is a sum of Bessel-weighted lines in ``k/2``.
    """
    sig = as_signal(signal)
    K = int(max_even_lag)
    if K < 0 or K % 2:
        raise InvalidArgumentError("max_even_lag must be a nonnegative even integer")
    h = K // 2
    if h > sig.half_width:
        raise InvalidArgumentError(
            f"max_even_lag {K} needs half-width {h}, signal only offers {sig.half_width} "
            f"around center {sig.center}")
    q = np.arange(-h, h + 1)
    values = np.conj(sig.at(-q)) * sig.at(q)
    return ProductFunction(values, K)


def cross_weight(first, second):
    """``A_1 A_2 [exp(j(phi_2 - phi_1)) + exp(j(phi_1 - phi_2))]``."""
    return 2.0 * first.amplitude * second.amplitude * np.cos(second.phase - first.phase)


def theoretical_p2(components, max_even_lag, truncation):
    """Bessel-series expansion of the product function of two FM components.

    Self terms carry ``J_i(2 beta)``.  Each factor of a cross term is a single
    FM exponential, so the cross term carries ``J_i(beta_1) J_m(beta_2)``.
    """
    components = list(components)
    if len(components) != 2:
        raise InvalidArgumentError("theoretical_p2 takes exactly two components")
    K = int(max_even_lag)
    if K < 0 or K % 2:
        raise InvalidArgumentError("max_even_lag must be a nonnegative even integer")
    beta_max = max(c.mod_index for c in components)
    needed = int(np.ceil(2.0 * beta_max)) + 10
    if truncation < needed:
        raise InvalidArgumentError(f"truncation {truncation} < ceil(2*max beta) + 10 = {needed}")
    T = int(truncation)
    orders = np.arange(-T, T + 1)
    t = np.arange(-(K // 2), K // 2 + 1, dtype=float)  # k/2
    p = np.zeros(t.size, dtype=np.complex128)

    for c in components:
        weights = c.amplitude ** 2 * bessel_j_signed(orders, 2.0 * c.mod_index)
        freqs = 2.0 * c.carrier + orders * c.mod_frequency
        p += np.exp(1j * np.outer(t, freqs)) @ weights

    c1, c2 = components
    w1 = bessel_j_signed(orders, c1.mod_index)
    w2 = bessel_j_signed(orders, c2.mod_index)
    weights = cross_weight(c1, c2) * np.outer(w1, w2).ravel()
    freqs = (c1.carrier + c2.carrier
             + (orders[:, None] * c1.mod_frequency + orders[None, :] * c2.mod_frequency).ravel())
    p += np.exp(1j * np.outer(t, freqs)) @ weights
    return ProductFunction(p, K)


def envelope_correlations(signal):
    sig = as_signal(signal)
    if not 0 < sig.center < len(sig) - 1:
        raise InvalidArgumentError("signal center must lie strictly inside the record")
    x = sig.samples
    h = sig.half_width
    n = np.arange(-h, h + 1)
    r1 = np.abs(x) ** 2
    r2 = np.conj(sig.at(-n)) * sig.at(n)
    return EnvelopeCorrelations(r1, r2, sig.center, h)


def segment_bursts(r1, rel_floor=1e-3, min_gap=5, origin=0):
    """Split a nonnegative envelope into disjoint bursts.

    Samples above ``rel_floor * max(r1)`` form runs; runs separated by fewer
    than ``min_gap`` samples are merged.  Indices are reported relative to
    ``origin`` (pass the signal center for two-sided times).
    """
    r1 = np.asarray(r1, dtype=float)
    if r1.size == 0:
        raise InvalidArgumentError("empty envelope")
    if np.any(r1 < 0):
        raise InvalidArgumentError("envelope must be nonnegative")
    if not 0.0 < rel_floor < 1.0:
        raise InvalidArgumentError("rel_floor must lie in (0, 1)")
    top = r1.max()
    if top == 0.0:
        return []
    above = r1 > rel_floor * top
    if not above.any():
        return []
    edges = np.diff(np.concatenate(([0], above.astype(np.int8), [0])))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1) - 1
    runs = [[int(starts[0]), int(ends[0])]]
    for s, e in zip(starts[1:], ends[1:]):
        if s - runs[-1][1] - 1 < min_gap:
            runs[-1][1] = int(e)
        else:
            runs.append([int(s), int(e)])
    out = []
    for s, e in runs:
        peak = s + int(np.argmax(r1[s:e + 1]))
        out.append(BurstSegment(s - origin, e - origin, peak - origin))
    return out
