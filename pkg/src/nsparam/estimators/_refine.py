"""Signal-domain refinement shared by the spectral estimators.

Two tools: cyclic per-line frequency relaxation for sums of complex tones,
and a variable-projection least-squares polish in which complex gains are
eliminated by linear least squares at every evaluation.
"""

import numpy as np
import scipy.optimize

from ..numerics import least_squares_complex, refine_frequency


def tone_basis(freqs, n):
    return np.exp(1j * np.outer(n, np.asarray(freqs, dtype=float)))


def relax_lines(y, n, freqs, half_width, max_sweeps=60, tol=1e-13):
    """Refine tone frequencies one at a time against the others' residual.

    Each sweep re-fits all gains, then for every line maximizes the
    correlation of the signal minus the other lines.  Returns
    ``(freqs, gains)``.
    """
    y = np.asarray(y, dtype=np.complex128)
    n = np.asarray(n, dtype=float)
    freqs = np.array(freqs, dtype=float)
    if freqs.size == 0:
        return freqs, np.empty(0, dtype=np.complex128)
    for _ in range(max_sweeps):
        B = tone_basis(freqs, n)
        gains = least_squares_complex(B, y)
        moved = 0.0
        for i in range(freqs.size):
            others = np.delete(np.arange(freqs.size), i)
            resid = y - B[:, others] @ gains[others]
            w = refine_frequency(resid, freqs[i], half_width, n)
            moved = max(moved, abs(w - freqs[i]))
            freqs[i] = w
            B[:, i] = np.exp(1j * w * n)
        if moved < tol:
            break
    B = tone_basis(freqs, n)
    return freqs, least_squares_complex(B, y)


def solve_gains(B, y, real):
    """Linear gains for basis ``B``.

    With ``real`` the model is ``sum_k 2 Re(g_k b_k)``, which is what a
    conjugate-paired complex model looks like on a real record.
    """
    if not real:
        g = least_squares_complex(B, y)
        return g, B @ g
    A = np.hstack([2.0 * B.real, -2.0 * B.imag])
    coef, *_ = np.linalg.lstsq(A, y.real, rcond=1e-12)
    k = B.shape[1]
    g = coef[:k] + 1j * coef[k:]
    return g, (A @ coef).astype(np.complex128)


def vp_polish(y, n, build_basis, theta0, lower=None, upper=None, real=False,
              stages=(1.0,), max_nfev=400):
    """Variable-projection least squares over the nonlinear parameters.

    ``build_basis(theta, n)`` returns the ``(len(n), K)`` complex basis.  The
    fit runs on centered sub-records whose half-lengths are the given
    fractions of the full one, so early stages see a wider basin of
    attraction.  Returns ``(theta, gains)`` for the full record.
    """
    y = np.asarray(y, dtype=np.complex128)
    n = np.asarray(n, dtype=float)
    theta = np.asarray(theta0, dtype=float).copy()
    lo = np.full(theta.size, -np.inf) if lower is None else np.asarray(lower, float)
    hi = np.full(theta.size, np.inf) if upper is None else np.asarray(upper, float)
    theta = np.clip(theta, lo, hi)
    scale = np.sqrt(np.mean(np.abs(y) ** 2)) or 1.0
    full = np.max(np.abs(n))

    for frac in stages:
        mask = np.abs(n) <= max(frac * full, 16)
        ys, ns = y[mask] / scale, n[mask]

        def resid(th):
            B = build_basis(th, ns)
            _, fit = solve_gains(B, ys, real)
            r = ys - fit
            return r.real if real else np.concatenate([r.real, r.imag])

        if theta.size:
            sol = scipy.optimize.least_squares(
                resid, theta, bounds=(lo, hi), method="trf", x_scale="jac",
                xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=max_nfev)
            theta = sol.x
    B = build_basis(theta, n)
    gains, _ = solve_gains(B, y, real)
    return theta, gains
