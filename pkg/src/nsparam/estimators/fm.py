"""Single-tone complex FM estimation from the product-function spectrum.

For one component ``A exp(j[w n + beta sin(xi n)])`` the product
``conj(x[-q]) x[q]`` is a line cluster at ``2 w + i xi`` (in ``q``) with
residues ``A^2 J_i(2 beta)``; two components add a cross cluster centred at
``w_1 + w_2``.  Carriers are the cluster centres whose half-frequency carries
a matching line in the signal spectrum, sideband spacing gives ``xi`` and the
Bessel residue pattern gives ``beta``.
"""

import warnings as _warnings

import numpy as np
import scipy.optimize

from ..correlation import product_function
from ..errors import ClusterAmbiguityError, PreconditionError
from ..models import FMComponent, ModelSpec, nmse, synthesize
from ..numerics import (analytic_signal, bessel_j_table, dtft, find_peaks,
                        periodogram, wrap_angle)
from ..signal import ComplexSignal, as_signal
from ._refine import solve_gains, vp_polish
from .config import ComponentDiagnostics, EstimationConfig, FitReport

BETA_MAX = 15.0
MAX_COMPONENTS = 16
# Blackman sidelobes peak near 1.3e-3 of the main lobe
CENTER_FLOOR = 2e-3
SIDEBAND_FLOOR = 2e-3
PAIR_RATIO = 0.5
XI_CANDIDATES = 3
MAX_SIDE_ORDER = 4
# accepted |Y(w)|^2 / |P(2w)| band for a self-cluster centre
MATCH_BAND = (0.2, 5.0)


def _beta_cost_ratio(beta, mags, orders):
    table = bessel_j_table(int(np.max(np.abs(orders))), 2.0 * beta)
    j = np.abs(table[np.abs(orders)])
    with np.errstate(divide="ignore", invalid="ignore"):
        model = j / j[orders == 0][0]
    if not np.all(np.isfinite(model)):
        return np.inf
    return float(np.sum((mags / mags[orders == 0][0] - model) ** 2))


def _beta_cost_absolute(beta, mags, orders):
    table = bessel_j_table(int(np.max(np.abs(orders))), 2.0 * beta)
    j = np.abs(table[np.abs(orders)])
    denom = float(j @ j)
    scale = float(j @ mags) / denom if denom > 0 else 0.0
    return float(np.sum((mags - scale * j) ** 2))


def _golden_min(cost, lo, hi, n_grid=301, xtol=1e-6):
    """Grid scan for the basin, golden section inside it."""
    grid = np.linspace(lo, hi, n_grid)
    vals = np.array([cost(b) for b in grid])
    k = int(np.argmin(vals))
    if k == 0 or k == n_grid - 1:
        return float(grid[k])
    a, b, c = grid[k - 1], grid[k], grid[k + 1]
    res = scipy.optimize.minimize_scalar(cost, bracket=(a, b, c), method="golden",
                                         tol=xtol / max(b, 1.0))
    return float(res.x) if lo <= res.x <= hi and res.fun <= vals[k] else float(b)


def beta_from_residues(residues, center_residue_index):
    """Modulation index and squared amplitude from a self-cluster's residues.

    Parameters
    ----------
    residues : array_like of complex
        Residues at cluster offsets ``i = index - center_residue_index``.
    center_residue_index : int
        Position of the ``i = 0`` residue.

    Returns
    -------
    beta, amplitude_sq : float
        ``beta`` minimizes the misfit of ``|r_i / r_0|`` to
        ``|J_i(2 beta) / J_0(2 beta)|`` over ``[0, 15]``; ``amplitude_sq`` is
        the mean of ``|r_i| / |J_i(2 beta)|`` over offsets where
        ``|J_i(2 beta)| > 0.05``.

    Notes
    -----
    When the centre residue vanishes (``2 beta`` near a zero of ``J_0``) the
    ratios are meaningless; the magnitudes are then matched against
    ``A^2 |J_i|`` directly and a ``RuntimeWarning`` is issued.
    """
    r = np.asarray(residues, dtype=np.complex128).ravel()
    c = int(center_residue_index)
    if not 0 <= c < r.size:
        raise PreconditionError("center_residue_index outside the residue vector")
    mags = np.abs(r)
    orders = np.arange(r.size) - c
    if r.size == 1:
        return 0.0, float(mags[0])
    if mags[c] < 1e-12:
        _warnings.warn("centre residue vanishes; matching absolute Bessel magnitudes",
                       RuntimeWarning, stacklevel=2)
        beta = _golden_min(lambda b: _beta_cost_absolute(b, mags, orders), 0.0, BETA_MAX)
    else:
        beta = _golden_min(lambda b: _beta_cost_ratio(b, mags, orders), 0.0, BETA_MAX)
    j = np.abs(bessel_j_table(int(np.max(np.abs(orders))), 2.0 * beta)[np.abs(orders)])
    use = j > 0.05
    amp_sq = float(np.mean(mags[use] / j[use]))
    return beta, amp_sq


def fm_basis(carriers, xis, betas, n):
    """Columns ``exp(j [w n + beta sin(xi n)])``."""
    n = np.asarray(n, dtype=float)[:, None]
    return np.exp(1j * (np.asarray(carriers)[None, :] * n
                        + np.asarray(betas)[None, :] * np.sin(np.asarray(xis)[None, :] * n)))


class _WindowedSpectrum:
    """Blackman-weighted DTFT normalized so a tone reads as its amplitude."""

    def __init__(self, samples, n):
        w = np.blackman(samples.size)
        self._x = samples * w / w.sum()
        self._n = np.asarray(n, dtype=float)

    def __call__(self, freqs):
        return dtft(self._x, freqs, self._n)


def _local_maxima(freqs, mag):
    inner = (mag[1:-1] >= mag[:-2]) & (mag[1:-1] > mag[2:])
    idx = np.flatnonzero(inner) + 1
    out = []
    for k in idx:
        l, m, r = np.log(mag[k - 1:k + 2] + 1e-300)
        denom = l - 2 * m + r
        off = 0.5 * (l - r) / denom if denom < 0 else 0.0
        out.append((freqs[k] + off * (freqs[1] - freqs[0]), mag[k]))
    return out


def _sideband_candidates(spec_p, center, resolution, limit):
    """Offsets ``s`` with matched peaks at ``center +/- s`` in the product spectrum."""
    bw = spec_p.bin_width
    size = spec_p.frequencies.size
    half = int(np.ceil(limit / bw)) + 2
    k0 = int(np.rint((center - spec_p.frequencies[0]) / bw))
    idx = np.arange(k0 - half, k0 + half + 1)
    offsets = (idx - k0) * bw + wrap_angle(spec_p.frequencies[k0 % size] - center)
    mag = spec_p.magnitude[idx % size]
    ref = mag[half]
    maxima = _local_maxima(offsets, mag)
    pos = [(s, m) for s, m in maxima if resolution < s <= limit and m > SIDEBAND_FLOOR * ref]
    neg = [(-s, m) for s, m in maxima if -limit <= s < -resolution and m > SIDEBAND_FLOOR * ref]
    cands = []
    for s, m in pos:
        match = [(t, k) for t, k in neg if abs(t - s) <= 2 * resolution / 3]
        if not match:
            continue
        t, k = min(match, key=lambda tk: abs(tk[0] - s))
        if min(m, k) / max(m, k) < PAIR_RATIO:
            continue
        cands.append((0.5 * (s + t), min(m, k)))
    cands.sort(key=lambda c: -c[1])
    return [s for s, _ in cands[:XI_CANDIDATES]]


def _cluster_residues(spec_p, center, spacing, limit):
    order = int(max(1, min(MAX_SIDE_ORDER, np.floor(limit / spacing))))
    offsets = np.arange(-order, order + 1)
    return spec_p.residue_at(center + offsets * spacing), order


def _assign_modulation(y, n, real, carriers, spec_p, resolution, cache, warnings, sweeps=2):
    """Pick each carrier's (xi, beta) among its sideband candidates by signal residual.

    Candidates for a carrier are cached in ``cache`` keyed by its frequency.
    Carriers are visited strongest first; a carrier keeps ``beta = 0`` unless
    some candidate lowers the residual.  Returns ``(xis, betas, gains)``.
    """
    K = carriers.size
    xis, betas = np.zeros(K), np.zeros(K)
    limit = np.pi / 4

    def residual(xs, bs):
        _, fit = solve_gains(fm_basis(carriers, xs, bs, n), y, real)
        return float(np.linalg.norm(y - fit))

    for _ in range(sweeps):
        for m in range(K):
            key = float(carriers[m])
            if key not in cache:
                cache[key] = []
                for s in _sideband_candidates(spec_p, 2 * key, resolution, limit):
                    r, c = _cluster_residues(spec_p, 2 * key, s, limit)
                    with _warnings.catch_warnings(record=True) as caught:
                        _warnings.simplefilter("always")
                        beta, _ = beta_from_residues(r, c)
                    warnings.extend(str(w.message) for w in caught)
                    if beta > 0.0:
                        cache[key].append((s, beta))
            trial_x, trial_b = xis.copy(), betas.copy()
            trial_x[m] = trial_b[m] = 0.0
            best = (residual(trial_x, trial_b), 0.0, 0.0)
            for s, beta in cache[key]:
                for sign in (1.0, -1.0):
                    trial_x[m], trial_b[m] = sign * s, beta
                    val = residual(trial_x, trial_b)
                    if val < best[0]:
                        best = (val, sign * s, beta)
            xis[m], betas[m] = best[1], best[2]
    gains, _ = solve_gains(fm_basis(carriers, xis, betas, n), y, real)
    return xis, betas, gains


def _recenter(sig):
    if sig.half_width >= len(sig) // 4:
        return sig, None
    mid = len(sig) // 2
    return ComplexSignal(sig.samples, mid, sig.sample_rate), (
        f"signal re-centred at sample {mid} for the symmetric product")


def estimate_fm(signal, config=None):
    """Fit single-tone complex FM components.

    Real input is analysed through its analytic signal and reported as
    explicit conjugate pairs; ``config.model_order`` then counts pairs.

    Parameters
    ----------
    signal : ComplexSignal or array_like
        Samples; a record whose centre is not mid-record is re-centred.
    config : EstimationConfig, optional

    Returns
    -------
    FitReport
        ``extra`` holds the product-spectrum peaks, the chosen self-cluster
        centres and, per carrier pair, the nearest peak to their cross-cluster
        centre.
    """
    config = config or EstimationConfig()
    sig = as_signal(signal)
    N = len(sig)
    if N < 32:
        raise PreconditionError(f"FM estimation needs at least 32 samples, got {N}")
    sig, note = _recenter(sig)
    warnings = [note] if note else []
    real = sig.is_real
    z = analytic_signal(sig.samples.real, sig.center) if real else sig
    M = config.model_order
    if M is not None and M > MAX_COMPONENTS:
        raise PreconditionError(f"at most {MAX_COMPONENTS} components are supported")

    H = z.half_width
    p = product_function(z, 2 * H)
    size = p.values.size
    spec_p = periodogram(p.values, config.fft_size(size), window=np.blackman(size))
    p_bin = 2.0 * np.pi / size
    resolution = 3.0 * p_bin
    floor = min(config.peak_rel_threshold, CENTER_FLOOR) if M is not None else config.peak_rel_threshold
    peaks = find_peaks(spec_p, floor, resolution)
    if not peaks:
        raise ClusterAmbiguityError("product spectrum has no peaks", [])

    n = z.n.astype(float)
    Y = _WindowedSpectrum(z.samples, n)
    y_bin = 2.0 * np.pi / N
    grid = np.linspace(-2 * y_bin, 2 * y_bin, 41)

    # carrier candidates: p-peak half-frequencies with a matching signal line
    cands = []
    for pk in peaks:
        best = None
        for w0 in (0.5 * pk.frequency, wrap_angle(0.5 * pk.frequency + np.pi)):
            vals = np.abs(Y(w0 + grid))
            k = int(np.argmax(vals))
            if best is None or vals[k] > best[1]:
                best = (wrap_angle(w0 + grid[k]), float(vals[k]))
        match = best[1] ** 2 / pk.magnitude
        cands.append((best[0], best[1], match, pk.frequency))
    cands.sort(key=lambda c: -c[1])
    top = cands[0][1]

    carriers, centers, qualities = [], [], []
    for w, score, match, theta in cands:
        if M is not None and len(carriers) == M:
            break
        if M is None and score < config.peak_rel_threshold * top:
            break
        if not MATCH_BAND[0] <= match <= MATCH_BAND[1]:
            continue
        if any(abs(wrap_angle(w - c)) < 2 * y_bin for c in carriers):
            continue
        # a cross-cluster centre is the midpoint of two accepted self centres
        if any(abs(wrap_angle(theta - (a + b))) < p_bin
               for i, a in enumerate(carriers) for b in carriers[i + 1:]):
            continue
        carriers.append(w)
        centers.append(theta)
        qualities.append(match)
    if not carriers or (M is not None and len(carriers) < M):
        raise ClusterAmbiguityError(
            f"found {len(carriers)} consistent self-clusters, need {M or 1}",
            [c[3] for c in cands])

    y = sig.samples.real.astype(np.complex128) if real else z.samples
    carriers = np.array(carriers)
    centers, qualities = np.array(centers), np.array(qualities)
    sidebands = {}
    while True:
        xis, betas, gains = _assign_modulation(y, n, real, carriers, spec_p, resolution,
                                               sidebands, warnings)
        if M is not None:
            break
        keep = np.abs(gains) >= config.amp_rel_threshold * np.abs(gains).max()
        if keep.all():
            break
        carriers, centers, qualities = carriers[keep], centers[keep], qualities[keep]
    K = carriers.size

    coarse = carriers.copy()
    modulated = np.flatnonzero(betas > 0)
    if config.refine:
        nx = modulated.size
        theta0 = np.concatenate([carriers, xis[modulated], betas[modulated]])
        lower = np.concatenate([carriers - 2 * y_bin, xis[modulated] - 2 * p_bin, np.zeros(nx)])
        upper = np.concatenate([carriers + 2 * y_bin, xis[modulated] + 2 * p_bin,
                                np.full(nx, BETA_MAX)])

        def unpack(th):
            ws = th[:K]
            xs, bs = np.zeros(K), np.zeros(K)
            xs[modulated] = th[K:K + nx]
            bs[modulated] = th[K + nx:]
            return ws, xs, bs

        theta, gains = vp_polish(y, n, lambda th, nn: fm_basis(*unpack(th), nn), theta0,
                                 lower, upper, real=real, stages=(0.125, 0.25, 0.5, 1.0))
        carriers, xis, betas = unpack(theta)
    else:
        gains, _ = solve_gains(fm_basis(carriers, xis, betas, n), y, real)

    components, diags = [], []
    for m in np.argsort(carriers):
        g = gains[m]
        beta, xi = float(betas[m]), float(xis[m])
        if beta == 0.0:
            xi = 0.0
        comp = FMComponent(float(abs(g)), float(np.angle(g)), beta, xi, float(wrap_angle(carriers[m])))
        flags = [] if beta > 0 else ["pure sinusoid"]
        extra = {"cluster_center": float(centers[m]), "residue_match": float(qualities[m]),
                 "xi_candidates": len(sidebands[float(coarse[m])])}
        for c in ([comp, comp.conjugate()] if real else [comp]):
            components.append(c)
            diags.append(ComponentDiagnostics(c.carrier, c.amplitude,
                                              float(abs(carriers[m] - coarse[m])), list(flags),
                                              dict(extra)))

    cross = []
    for i in range(K):
        for j in range(i + 1, K):
            mid = wrap_angle(0.5 * (centers[i] + centers[j]))
            near = min(peaks, key=lambda pk: abs(wrap_angle(pk.frequency - mid)))
            cross.append({"pair": [i, j], "midpoint": float(mid),
                          "nearest_peak": float(near.frequency),
                          "bins": float(abs(wrap_angle(near.frequency - mid)) / p_bin)})

    spec = ModelSpec("fm", components)
    fit = synthesize(spec, N, sig.center)
    return FitReport(spec, nmse(sig, fit), diags, warnings, sig.center,
                     extra={"product_peaks": [(pk.frequency, pk.magnitude) for pk in peaks],
                            "self_centers": [float(c) for c in centers],
                            "cross_centers": cross, "bin_width": p_bin})
