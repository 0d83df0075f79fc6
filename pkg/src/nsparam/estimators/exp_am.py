"""Exponential-envelope AM estimation from envelope correlations.

Each component ``A exp(b [1 - cos(xi n - c)]) exp(j [w n + phi])`` is a
periodic burst whose squared envelope ``r1`` peaks where ``xi n - c = pi``
and whose log is linear in ``(ln A, b)``.  Components are isolated either by
time (bursts at distinct phases of the period) or, when bursts coincide in
time, by frequency band around each carrier.  Initial values from the
per-component statistics are polished jointly on the samples.
"""

import math

import numpy as np
import scipy.ndimage
import scipy.optimize

from ..correlation import envelope_correlations, segment_bursts
from ..errors import (InsufficientSupportError, PreconditionError, SegmentationError,
                      EstimationError)
from ..models import ExpAMComponent, ModelSpec, nmse, synthesize
from ..numerics import analytic_signal, periodogram, refine_frequency, wrap_angle
from ..signal import ComplexSignal, as_signal
from ._refine import solve_gains, vp_polish
from .config import ComponentDiagnostics, EstimationConfig, FitReport

TWO_PI = 2.0 * math.pi
DEPTH_MAX = 340.0
FLAT_SPREAD = 1e-9
# log fits on band-separated components stay clear of leakage
BAND_LOG_FLOOR = 1e-4
MAX_HARMONICS = 8


def _parabolic_vertex(values, k):
    """Sub-sample offset of a three-point parabola through ``values[k-1:k+2]``."""
    if k <= 0 or k >= values.size - 1:
        return 0.0
    l, m, r = values[k - 1], values[k], values[k + 1]
    denom = l - 2.0 * m + r
    if denom >= 0.0 or not np.isfinite(denom):
        return 0.0
    return float(np.clip(0.5 * (l - r) / denom, -0.5, 0.5))


def estimate_xi(r1, config):
    """Fundamental of the periodic squared envelope ``r1``.

    The lowest strong peak of the mean-removed, Hann-tapered periodogram is
    refined by maximizing the summed power over its first harmonics.
    """
    r1 = np.asarray(r1, dtype=float)
    N = r1.size
    d = r1 - r1.mean()
    if not np.any(d):
        return None
    win = np.hanning(N)
    spec = periodogram(d, config.fft_size(N), window=win)
    freqs, mag = spec.frequencies, spec.magnitude
    pos = freqs > 2.5 * TWO_PI / N
    f, m = freqs[pos], mag[pos]
    inner = np.flatnonzero((m[1:-1] >= m[:-2]) & (m[1:-1] > m[2:])) + 1
    strong = inner[m[inner] >= config.peak_rel_threshold * m.max()] if inner.size else inner
    if strong.size == 0:
        return None
    xi0 = float(f[strong[0]])
    n = np.arange(N, dtype=float)
    x = d * win
    n_harm = max(1, min(MAX_HARMONICS, int(math.pi / xi0)))

    def neg_power(xi):
        k = np.arange(1, n_harm + 1)
        return -float(np.sum(np.abs(np.exp(-1j * np.outer(k * xi, n)) @ x) ** 2))

    res = scipy.optimize.minimize_scalar(
        neg_power, bounds=(xi0 - TWO_PI / N, xi0 + TWO_PI / N), method="bounded",
        options={"xatol": 1e-12})
    return float(res.x)


def _time_groups(r1, xi, n, config):
    """Boolean sample masks, one per burst phase within the period.

    Segments are grouped by the phase of their peak.  Bursts cut by the
    record edges have unreliable peaks, so they only join existing groups.
    """
    segments = segment_bursts(r1, config.burst_rel_floor, config.burst_min_gap)
    if not segments:
        return []
    period = TWO_PI / xi
    tol = 0.5 * config.burst_min_gap + 1

    def gap(a, b):
        d = abs(a - b) % period
        return min(d, period - d)

    interior = [g for g in segments if g.start > 0 and g.end < r1.size - 1]
    edge = [g for g in segments if g not in interior]
    if not interior:
        interior, edge = segments, []
    groups = []
    for seg in interior:
        phase = n[seg.peak_index] % period
        for g in groups:
            if gap(phase, g["phase"]) < tol:
                g["segments"].append(seg)
                break
        else:
            groups.append({"phase": phase, "segments": [seg]})
    for seg in edge:
        phase = n[seg.peak_index] % period
        min(groups, key=lambda g: gap(phase, g["phase"]))["segments"].append(seg)
    masks = []
    for g in groups:
        mask = np.zeros(r1.size, dtype=bool)
        for seg in g["segments"]:
            mask[seg.start:seg.end + 1] = True
        masks.append(mask)
    return masks


def _band_centers(z, xi, n_components, config):
    """Carrier-band centres from the smoothed Hann spectrum of the samples."""
    N = z.size
    spec = periodogram(z, config.fft_size(N), window=np.hanning(N))
    bw = spec.bin_width
    width = max(1, int(round(3.0 * xi / bw)))
    smooth = scipy.ndimage.uniform_filter1d(spec.magnitude, size=width, mode="wrap")
    left, right = np.roll(smooth, 1), np.roll(smooth, -1)
    idx = np.flatnonzero((smooth >= left) & (smooth > right))
    idx = idx[np.argsort(-smooth[idx])]
    floor = 1e-3 if n_components is not None else config.peak_rel_threshold
    centers = []
    for i in idx:
        if smooth[i] < floor * smooth[idx[0]]:
            break
        f = spec.frequencies[i]
        if all(abs(wrap_angle(f - c)) > 4.0 * xi for c in centers):
            centers.append(f)
        if n_components is not None and len(centers) == n_components:
            break
    return centers


def _band_split(z, centers):
    """Split the samples by nearest band centre on the DFT grid."""
    N = z.size
    Z = np.fft.fft(z)
    f = wrap_angle(TWO_PI * np.arange(N) / N)
    dist = np.abs(wrap_angle(f[:, None] - np.asarray(centers)[None, :]))
    owner = np.argmin(dist, axis=1)
    return [np.fft.ifft(np.where(owner == m, Z, 0.0)) for m in range(len(centers))]


def _basis(theta, n, K):
    """Peak-normalized burst columns; ``theta = [xi, (b, c, w) * K]``."""
    xi = theta[0]
    p = np.asarray(theta[1:]).reshape(K, 3)
    b, c, w = p[:, 0], p[:, 1], p[:, 2]
    n = np.asarray(n, dtype=float)[:, None]
    return np.exp(b * (1.0 - np.cos(xi * n - c)) - 2.0 * b + 1j * w * n)


def _init_component(xm, n, xi, log_floor, center):
    """Log-linear envelope fit and carrier for one isolated component."""
    r1 = np.abs(xm) ** 2
    top = r1.max()
    if top == 0.0:
        raise InsufficientSupportError("isolated component has no energy")
    with np.errstate(divide="ignore"):
        logr = np.log(np.maximum(r1, log_floor * top))
    # bursts cut by the record edges misplace the peak; search whole periods
    period = TWO_PI / xi
    interior = (n >= n[0] + 0.5 * period) & (n <= n[-1] - 0.5 * period)
    if not interior.any():
        interior = np.ones(n.size, dtype=bool)
    k = int(np.flatnonzero(interior)[np.argmax(r1[interior])])
    n_peak = n[k] + _parabolic_vertex(logr, k)
    c = (xi * n_peak - math.pi) % TWO_PI

    keep = r1 > log_floor * top
    if keep.sum() < 4:
        raise InsufficientSupportError(
            f"only {int(keep.sum())} samples above the log floor near n={n_peak:.1f}")
    # energy weighting keeps leakage in the tails from steering the fit
    wts = np.sqrt(r1[keep] / top)
    A_ls = np.column_stack([np.ones(keep.sum()), 1.0 - np.cos(xi * n[keep] - c)])
    (log_a, b), *_ = np.linalg.lstsq(A_ls * wts[:, None], 0.5 * logr[keep] * wts, rcond=None)
    b = float(np.clip(b, 0.0, DEPTH_MAX))

    # r2 lines sit at 2w + k xi, so its peak fixes w only modulo xi / 2 and pi;
    # the energy-weighted phase increment picks the branch
    env = envelope_correlations(ComplexSignal(xm, center))
    size = env.r2.size
    spec = periodogram(env.r2, max(4096, 1 << (4 * size - 1).bit_length()), window=np.hanning(size))
    kk = int(np.argmax(spec.magnitude))
    w2 = spec.frequencies[kk] + _parabolic_vertex(np.log(spec.magnitude + 1e-300), kk) * spec.bin_width
    w_inc = float(np.angle(np.vdot(xm[:-1], xm[1:])))
    step = 0.5 * xi
    w0 = 0.5 * w2 + step * np.round(wrap_angle(w_inc - 0.5 * w2) / step)
    shape = np.exp(b * (1.0 - np.cos(xi * n - c)) - 2.0 * b)
    w = refine_frequency(xm * shape, w0, 0.25 * xi, n)
    return {"b": b, "c": c, "w": w % TWO_PI, "log_a": float(log_a), "n_peak": float(n_peak)}


def _fit(y, n, real, xi, inits, refine):
    K = len(inits)
    theta = np.concatenate([[xi], np.ravel([[p["b"], p["c"], p["w"]] for p in inits])])
    if refine:
        lower = np.concatenate([[0.5 * xi], np.tile([0.0, -np.inf, -np.inf], K)])
        upper = np.concatenate([[2.0 * xi], np.tile([DEPTH_MAX, np.inf, np.inf], K)])
        theta, gains = vp_polish(y, n, lambda th, nn: _basis(th, nn, K), theta, lower, upper,
                                 real=real, stages=(1.0,), max_nfev=2000)
    else:
        gains, _ = solve_gains(_basis(theta, n, K), y, real)
    return theta, gains


def _relax(z, y, n, real, theta, gains, floor, center, refine, sweeps=3):
    """Re-isolate each component by subtracting the others' fit, then re-polish.

    Band masks leak strong neighbours into weak components; once the strong
    ones are fitted their removal leaves a clean view of the rest.
    """
    K = gains.size
    scale = 2.0 if real else 1.0

    def cost(th):
        _, fit = solve_gains(_basis(th, n, K), y, real)
        return float(np.linalg.norm(y - fit))

    best = cost(theta)
    for _ in range(sweeps):
        improved = False
        for m in range(K):
            B = _basis(theta, n, K)
            others = np.delete(np.arange(K), m)
            xm = z - scale * (B[:, others] @ gains[others])
            try:
                init = _init_component(xm, n, theta[0], floor, center)
            except EstimationError:
                continue
            trial = theta.copy()
            trial[1 + 3 * m:4 + 3 * m] = [init["b"], init["c"], init["w"]]
            inits = [dict(zip("bcw", trial[1 + 3 * j:4 + 3 * j])) for j in range(K)]
            cand, cand_gains = _fit(y, n, real, trial[0], inits, refine)
            val = cost(cand)
            if val < best * (1.0 - 1e-9):
                theta, gains, best, improved = cand, cand_gains, val, True
        if not improved:
            break
    return theta, gains


def _components(theta, gains, real):
    K = gains.size
    xi = float(theta[0])
    p = np.asarray(theta[1:]).reshape(K, 3)
    comps = []
    for (b, c, w), g in zip(p, gains):
        b = float(max(b, 0.0))
        # deep envelopes can push A below the double range; keep it positive
        amp = float(max(abs(g) * math.exp(-2.0 * b), np.finfo(float).tiny))
        comps.append(ExpAMComponent(amp, float(np.angle(g)), b, float(c), float(w)))
        if real:
            comps.append(ExpAMComponent(amp, -float(np.angle(g)), b, float(c), -float(w)))
    return xi, comps


def _recenter(sig):
    if sig.half_width >= len(sig) // 4:
        return sig, None
    mid = len(sig) // 2
    return ComplexSignal(sig.samples, mid, sig.sample_rate), (
        f"signal re-centred at sample {mid} for the symmetric correlation")


def _flat_fit(sig, z, real, known_xi, warnings):
    """Constant envelope: a pure tone with depth 0 and unidentifiable offset."""
    warnings.append("flat envelope: offset c unidentifiable, reported as 0")
    N = len(z)
    n = z.n.astype(float)
    env = envelope_correlations(z)
    size = env.r2.size
    spec = periodogram(env.r2, max(4096, 1 << (4 * size - 1).bit_length()), window=np.hanning(size))
    w2 = spec.frequencies[int(np.argmax(spec.magnitude))]
    y = sig.samples.real.astype(np.complex128) if real else z.samples
    best = None
    for w0 in (0.5 * w2, 0.5 * w2 + math.pi):
        w = refine_frequency(z.samples, w0, 2.0 * TWO_PI / N, n)
        g, fit = solve_gains(np.exp(1j * w * n)[:, None], y, real)
        err = float(np.linalg.norm(y - fit))
        if best is None or err < best[0]:
            best = (err, w, g[0])
    _, w, g = best
    xi = known_xi if known_xi is not None else TWO_PI / N
    comps = [ExpAMComponent(abs(g), float(np.angle(g)), 0.0, 0.0, float(wrap_angle(w)))]
    if real:
        comps.append(ExpAMComponent(abs(g), -float(np.angle(g)), 0.0, 0.0, -float(wrap_angle(w))))
    return xi, comps


def estimate_exp_am(signal, config=None, known_xi=None):
    """Fit exponential-envelope AM components sharing one modulating frequency.

    Parameters
    ----------
    signal : ComplexSignal or array_like
        Real input is analysed through its analytic signal and reported as
        conjugate pairs.  A record whose centre is not mid-record is re-centred.
    config : EstimationConfig, optional
        ``model_order`` fixes the number of components (pairs for real input).
    known_xi : float, optional
        Shared modulating frequency in rad/sample; estimated from the
        periodicity of the squared envelope otherwise.

    Returns
    -------
    FitReport
        ``extra["separation"]`` names how the components were isolated
        (``"time"`` or ``"band"``).
    """
    config = config or EstimationConfig()
    sig = as_signal(signal)
    N = len(sig)
    if N < 16:
        raise PreconditionError(f"exp-AM estimation needs at least 16 samples, got {N}")
    if known_xi is not None and not known_xi > 0.0:
        raise PreconditionError("known_xi must be positive")
    sig, note = _recenter(sig)
    warnings = [note] if note else []
    real = sig.is_real
    z = analytic_signal(sig.samples.real, sig.center) if real else sig
    n = z.n.astype(float)
    y = sig.samples.real.astype(np.complex128) if real else z.samples
    M = config.model_order

    r1 = np.abs(z.samples) ** 2
    if r1.max() == 0.0:
        raise SegmentationError("signal is identically zero")
    if np.ptp(r1) <= FLAT_SPREAD * r1.max():
        xi, comps = _flat_fit(sig, z, real, known_xi, warnings)
        spec = ModelSpec("exp_am", comps, shared_xi=xi)
        fit = synthesize(spec, N, sig.center)
        diags = [ComponentDiagnostics(c.carrier, c.amplitude, 0.0, ["flat envelope"]) for c in comps]
        return FitReport(spec, nmse(sig, fit), diags, warnings, sig.center,
                         extra={"separation": "none"})

    xi = known_xi if known_xi is not None else estimate_xi(r1, config)
    if xi is None:
        raise SegmentationError("no periodicity found in the squared envelope")

    attempts = []
    masks = _time_groups(r1, xi, n, config)
    if not masks and known_xi is not None:
        raise SegmentationError("no bursts above the floor")
    if masks and (M is None or len(masks) == M):
        parts = [np.where(mask, z.samples, 0.0) for mask in masks]
        attempts.append(("time", parts, config.log_floor))
    centers = _band_centers(z.samples, xi, M, config)
    if centers and (M is None or len(centers) == M):
        attempts.append(("band", _band_split(z.samples, centers), max(config.log_floor, BAND_LOG_FLOOR)))
    if not attempts:
        raise SegmentationError(
            f"could not isolate {M} components: {len(masks)} burst groups, {len(centers)} bands")

    best, errors = None, []
    for label, parts, floor in attempts:
        try:
            inits = [_init_component(xm, n, xi, floor, z.center) for xm in parts]
            theta, gains = _fit(y, n, real, xi, inits, config.refine)
            theta, gains = _relax(z.samples, y, n, real, theta, gains, floor, z.center,
                                  config.refine)
            shared, comps = _components(theta, gains, real)
            spec = ModelSpec("exp_am", comps, shared_xi=shared)
            err = nmse(sig, synthesize(spec, N, sig.center))
        except EstimationError as exc:
            errors.append(f"{label}: {exc}")
            continue
        if best is None or err < best[0]:
            best = (err, label, spec, inits, theta)
    if best is None:
        raise SegmentationError("; ".join(errors))
    err, label, spec, inits, theta = best

    K = len(inits)
    p = np.asarray(theta[1:]).reshape(K, 3)
    diags = []
    per = 2 if real else 1
    for m, init in enumerate(inits):
        moved = abs(wrap_angle(p[m, 2] - init["w"]))
        flags = []
        if p[m, 0] < 1e-9:
            flags.append("zero depth")
        for c in spec.components[per * m:per * (m + 1)]:
            diags.append(ComponentDiagnostics(
                c.carrier, c.amplitude, float(moved), list(flags),
                {"peak_time": c.peak_time(spec.shared_xi), "initial_depth": init["b"],
                 "initial_offset": init["c"]}))
    return FitReport(spec, err, diags, warnings, sig.center,
                     extra={"separation": label, "initial_xi": float(xi)})
