"""Estimation settings and the fit result container."""

from dataclasses import dataclass, field, asdict
from typing import Optional

from ..errors import InvalidArgumentError

MAX_DEFAULT_LAG = 100


def next_pow2(n):
    n = int(n)
    return 1 if n <= 1 else 1 << (n - 1).bit_length()


@dataclass(frozen=True)
class EstimationConfig:
    """Knobs shared by the four estimators.

    ``model_order`` is the number of components sought; for real-valued input
    to :func:`estimate_fm` it counts conjugate pairs.  Unset geometry is
    derived from the record length by :meth:`geometry`.
    """

    model_order: Optional[int] = None
    extended_order: Optional[int] = None
    max_lag: Optional[int] = None
    nfft: Optional[int] = None
    amp_rel_threshold: float = 0.1
    peak_rel_threshold: float = 0.05
    bessel_truncation: int = 30
    burst_rel_floor: float = 1e-3
    burst_min_gap: int = 5
    log_floor: float = 1e-8
    refine: bool = True

    def __post_init__(self):
        M, L, J = self.model_order, self.extended_order, self.max_lag
        if M is not None and M < 1:
            raise InvalidArgumentError("model_order must be positive")
        if L is not None and L < 1:
            raise InvalidArgumentError("extended_order must be positive")
        if J is not None and J < 1:
            raise InvalidArgumentError("max_lag must be positive")
        if M is not None and L is not None and L < 2 * M:
            raise InvalidArgumentError(f"extended_order {L} < 2 * model_order {M}")
        if L is not None and J is not None and J < L:
            raise InvalidArgumentError(f"max_lag {J} < extended_order {L}")
        if self.nfft is not None and (self.nfft < 1 or self.nfft & (self.nfft - 1)):
            raise InvalidArgumentError("nfft must be a power of two")
        for name in ("amp_rel_threshold", "peak_rel_threshold", "burst_rel_floor", "log_floor"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise InvalidArgumentError(f"{name} must lie in (0, 1)")

    def geometry(self, n_samples):
        """``(J, L)`` for a record of ``n_samples``: J = min((N-2)//2, 100), L = 2J//3."""
        J = self.max_lag
        if J is None:
            J = min((n_samples - 2) // 2, MAX_DEFAULT_LAG)
            if self.extended_order is not None:
                J = max(J, self.extended_order)
        L = self.extended_order
        if L is None:
            L = (2 * J) // 3
        if J < 1 or L < 1:
            raise InvalidArgumentError(f"record of {n_samples} samples is too short")
        return J, L

    def fft_size(self, length, minimum=4096):
        if self.nfft is not None:
            if self.nfft < length:
                raise InvalidArgumentError(f"nfft {self.nfft} < sequence length {length}")
            return self.nfft
        return max(minimum, next_pow2(4 * length))

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise InvalidArgumentError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


@dataclass
class ComponentDiagnostics:
    """Per-component fit diagnostics.

    ``frequency_residual`` is estimator specific: the monic-polynomial residual
    at the pole (exponential) or the distance the refinement moved the
    spectral estimate (the spectral estimators).
    """

    frequency: float
    amplitude: float
    frequency_residual: float = 0.0
    flags: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)


@dataclass
class FitReport:
    spec: object
    nmse: float
    diagnostics: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    center: int = 0
    extra: dict = field(default_factory=dict, repr=False)

    def diagnostics_dict(self):
        return {
            "nmse": self.nmse,
            "warnings": list(self.warnings),
            "components": [asdict(d) for d in self.diagnostics],
        }
