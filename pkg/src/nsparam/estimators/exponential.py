"""Extended-order Prony estimation of damped complex exponentials."""

import numpy as np

from ..correlation import sample_aacf
from ..errors import DegenerateRootError, NormalizationFailureError, PreconditionError
from ..models import ExponentialComponent, ModelSpec, nmse, synthesize
from ..numerics import least_squares_complex, polynomial_roots, tls_null_vector
from ..signal import as_signal
from .config import ComponentDiagnostics, EstimationConfig, FitReport

# keeps squared column norms finite in the least-squares scaling
_LOG_OVERFLOW = 300.0


def prony_matrix(aacf_values, max_lag, order):
    """``(2J-L+1) x (L+1)`` matrix with entry ``(i, j) = c[-J + L + i - j]``."""
    J, L = int(max_lag), int(order)
    i = np.arange(2 * J - L + 1)[:, None]
    j = np.arange(L + 1)[None, :]
    return np.asarray(aacf_values)[L + i - j]


def pole_basis(poles, n):
    """Columns ``z^n``; columns that would overflow are returned as zeros."""
    poles = np.asarray(poles, dtype=np.complex128)
    n = np.asarray(n, dtype=float)
    B = np.zeros((n.size, poles.size), dtype=np.complex128)
    with np.errstate(divide="ignore"):
        logs = np.log(poles)
    for k, lz in enumerate(logs):
        if not np.isfinite(lz):
            B[n == 0, k] = 1.0
            continue
        if np.max(n * lz.real) > _LOG_OVERFLOW:
            continue
        B[:, k] = np.exp(n * lz)
    return B


def estimate_exponential(signal, config=None):
    """Fit a sum of damped complex exponentials.

    The aacf over lags ``-J..J`` feeds the extended-order linear-prediction
    system, solved in the total-least-squares sense.  The ``L`` roots of the
    prediction polynomial are candidate poles; complex gains come from a
    least-squares fit to the samples, and low-gain roots are discarded as
    noise roots.  When ``model_order`` is given the weakest ``L + 1 - M``
    singular directions are treated as the noise subspace.
    """
    config = config or EstimationConfig()
    sig = as_signal(signal)
    N = len(sig)
    J, L = config.geometry(N)
    if N < 2 * J + 2:
        raise PreconditionError(f"need at least 2*J+2 = {2 * J + 2} samples, got {N}")
    M = config.model_order
    if M is not None and M > L:
        raise PreconditionError(f"model_order {M} exceeds extended_order {L}")

    aacf = sample_aacf(sig, J)
    C = prony_matrix(aacf.values, J, L)
    noise_dim = L + 1 - M if M is not None else 1
    try:
        coeffs, sigma_min = tls_null_vector(C, noise_dim)
    except NormalizationFailureError as exc:
        raise NormalizationFailureError(f"{exc} (extended_order L={L})") from None
    roots = polynomial_roots(coeffs)

    y = sig.samples
    n = sig.n.astype(float)
    gains = least_squares_complex(pole_basis(roots, n), y)
    mags = np.abs(gains)
    order = np.argsort(mags)[::-1]
    if M is not None:
        keep = order[:M]
    else:
        keep = order[mags[order] >= config.amp_rel_threshold * mags[order[0]]]
    poles = roots[keep]
    if np.any(np.abs(poles) < 1e-12):
        raise DegenerateRootError("a retained root lies at z = 0; no exponential corresponds to it")

    gains = least_squares_complex(pole_basis(poles, n), y)
    scale = 1.0 + np.max(np.abs(coeffs[1:])) if coeffs.size > 1 else 1.0
    components, diags = [], []
    warnings = []
    for z, g in sorted(zip(poles, gains), key=lambda t: np.angle(t[0])):
        s = np.log(z)
        if abs(g) == 0.0:
            warnings.append(f"pole {z:.6g} received zero gain and was dropped")
            continue
        comp = ExponentialComponent(float(abs(g)), float(np.angle(g)), float(s.real), float(s.imag))
        components.append(comp)
        resid = abs(np.polyval(coeffs, z)) / scale
        diags.append(ComponentDiagnostics(comp.frequency, comp.amplitude, float(resid),
                                          extra={"pole": [z.real, z.imag]}))
    if not components:
        raise DegenerateRootError("every retained pole received zero gain")
    spec = ModelSpec("exponential", components)
    fit = synthesize(spec, N, sig.center)
    return FitReport(spec, nmse(sig, fit), diags, warnings, sig.center,
                     extra={"sigma_min": sigma_min, "candidate_poles": roots})
