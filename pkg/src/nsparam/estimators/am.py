"""Single-tone complex AM estimation from the aacf spectrum."""

import numpy as np

from ..correlation import sample_aacf
from ..errors import InsufficientPeaksError, PreconditionError
from ..models import AMComponent, ModelSpec, nmse, synthesize
from ..numerics import find_peaks, least_squares_complex, periodogram, wrap_angle
from ..signal import as_signal
from ._refine import relax_lines, tone_basis
from .config import ComponentDiagnostics, EstimationConfig, FitReport

MAX_PAIRED_LINES = 8
REALNESS_WARN = 0.1


def spectral_lag(n_samples, config):
    """Max lag for spectral analysis of the aacf: a quarter of the record."""
    if config.max_lag is not None:
        return config.max_lag
    return max(1, n_samples // 4)


def aacf_lines(sig, config, max_lines=None):
    """Spectral lines of the aacf: Blackman-tapered periodogram peaks."""
    J = spectral_lag(len(sig), config)
    if len(sig) < 2 * J + 2:
        raise PreconditionError(f"need at least {2 * J + 2} samples for max_lag {J}, got {len(sig)}")
    aacf = sample_aacf(sig, J)
    size = aacf.values.size
    spec = periodogram(aacf.values, config.fft_size(size), window=np.blackman(size))
    sep = 6.0 * np.pi / size
    # Blackman sidelobes peak at 1.2e-3 of the strongest line; lines are powers,
    # so a 2e-3 floor still admits sidebands down to mu ~ 0.045
    floor = config.peak_rel_threshold if max_lines is None else min(config.peak_rel_threshold, 2e-3)
    peaks = find_peaks(spec, floor, sep)
    peaks.sort(key=lambda p: -p.magnitude)
    if max_lines is not None:
        peaks = peaks[:max_lines]
    return [p.frequency for p in peaks], sep


def _merge_duplicates(freqs, gains, coarse, tol, y, n):
    """Drop lines that refinement moved onto a stronger line, or that carry no gain."""
    order = np.argsort(-np.abs(gains))
    top = np.abs(gains[order[0]])
    kept = []
    for i in order:
        if np.abs(gains[i]) < 1e-9 * top:
            continue
        if all(abs(wrap_angle(freqs[i] - freqs[j])) > tol for j in kept):
            kept.append(i)
    if len(kept) == freqs.size:
        return freqs, gains, coarse
    kept = np.array(sorted(kept))
    freqs = freqs[kept]
    return freqs, least_squares_complex(tone_basis(freqs, n), y), coarse[kept]


def _groupings(items, n_groups):
    """Partitions of ``items`` into ``n_groups`` blocks of size 1 or 2."""
    if not items:
        if n_groups == 0:
            yield []
        return
    if len(items) > 2 * n_groups or len(items) < n_groups:
        return
    first, rest = items[0], items[1:]
    if len(rest) >= n_groups - 1:
        for tail in _groupings(rest, n_groups - 1):
            yield [(first,)] + tail
    for i, other in enumerate(rest):
        remaining = rest[:i] + rest[i + 1:]
        for tail in _groupings(remaining, n_groups - 1):
            yield [(first, other)] + tail


def _pair_cost(a, d):
    """Distance of the sideband gain from ``mu * carrier gain`` with real ``0 <= mu < 1``."""
    ratio = d / a
    mu = min(max(ratio.real, 0.0), 1.0)
    cost = abs(d - mu * a) ** 2
    if abs(ratio) >= 1.0:
        cost += abs(d) ** 2
    return cost


def pair_lines(freqs, gains, n_components):
    """Assign lines to (carrier, sideband) pairs.

    Every pair implies a sideband-to-carrier gain ratio that the model
    requires to be real and below one; the grouping closest to that
    constraint wins.  Unpaired lines become pure carriers.
    """
    idx = list(range(len(freqs)))
    best, best_cost = None, np.inf
    for grouping in _groupings(idx, n_components):
        pairs = [g for g in grouping if len(g) == 2]
        total = 0.0
        oriented = []
        for p, q in pairs:
            c_pq = _pair_cost(gains[p], gains[q])
            c_qp = _pair_cost(gains[q], gains[p])
            if c_pq <= c_qp:
                total += c_pq
                oriented.append((p, q))
            else:
                total += c_qp
                oriented.append((q, p))
            if total >= best_cost:
                break
        if total < best_cost:
            singles = [(g[0], None) for g in grouping if len(g) == 1]
            best, best_cost = oriented + singles, total
    return best


def estimate_am(signal, config=None):
    """Fit single-tone complex AM components.

    Carrier and sideband frequencies are read off the aacf spectrum, refined
    against the samples, grouped into (carrier, sideband) pairs, and the
    gains of the paired lines give amplitude, phase and modulation index.
    """
    config = config or EstimationConfig()
    sig = as_signal(signal)
    N = len(sig)
    M = config.model_order
    if M is not None and 2 * M > MAX_PAIRED_LINES:
        raise PreconditionError(f"pairing enumeration supports at most {MAX_PAIRED_LINES // 2} components")
    if N < 8:
        raise PreconditionError(f"AM estimation needs at least 8 samples, got {N}")

    max_lines = 2 * M if M is not None else MAX_PAIRED_LINES
    freqs, sep = aacf_lines(sig, config, max_lines if M is not None else None)
    if M is not None and len(freqs) < M:
        raise InsufficientPeaksError(len(freqs), 2 * M)
    if M is None:
        if not freqs:
            raise InsufficientPeaksError(0, 1)
        freqs = freqs[:MAX_PAIRED_LINES]
        M = (len(freqs) + 1) // 2

    y = sig.samples
    n = sig.n.astype(float)
    coarse = np.array(freqs)
    if config.refine:
        fine, gains = relax_lines(y, n, coarse, half_width=min(sep, 4 * np.pi / N))
    else:
        fine, gains = coarse, least_squares_complex(tone_basis(coarse, n), y)
    fine = np.array([wrap_angle(f) for f in fine])
    fine, gains, coarse = _merge_duplicates(fine, gains, coarse, np.pi / N, y, n)

    warnings = []
    pairs = pair_lines(fine, gains, M)
    components, diags = [], []
    for carrier_i, side_i in pairs:
        a = gains[carrier_i]
        carrier = float(fine[carrier_i])
        flags = []
        if side_i is None:
            comp = AMComponent(float(abs(a)), float(np.angle(a)), 0.0, 0.0, carrier)
            warnings.append(f"no sideband for carrier {carrier:.6g}; mu set to 0")
            flags.append("no sideband")
            realness = 0.0
            moved = abs(carrier - coarse[carrier_i])
        else:
            d = gains[side_i]
            ratio = d / a
            mu = float(abs(ratio))
            realness = float(abs(np.angle(ratio)))
            if mu >= 1.0:
                warnings.append(f"modulation index {mu:.4g} >= 1 clipped")
                flags.append("mu clipped")
                mu = float(np.nextafter(1.0, 0.0))
            if realness > REALNESS_WARN:
                warnings.append(f"sideband ratio phase {realness:.3g} rad at carrier {carrier:.6g}: model mismatch")
                flags.append("complex mu")
            xi = float(fine[side_i] - fine[carrier_i])
            comp = AMComponent(float(abs(a)), float(np.angle(a)), mu, xi, carrier)
            moved = max(abs(carrier - coarse[carrier_i]), abs(fine[side_i] - coarse[side_i]))
        components.append(comp)
        diags.append(ComponentDiagnostics(carrier, comp.amplitude, float(moved), flags,
                                          {"mu_phase": realness}))
    order = np.argsort([c.carrier for c in components])
    components = [components[i] for i in order]
    diags = [diags[i] for i in order]
    spec = ModelSpec("am", components)
    fit = synthesize(spec, N, sig.center)
    return FitReport(spec, nmse(sig, fit), diags, warnings, sig.center)
