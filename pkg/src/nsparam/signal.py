"""The sampled-signal container shared by every module."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidArgumentError


@dataclass(frozen=True, eq=False)
class ComplexSignal:
    """Finite complex sequence with a declared time origin.

    ``samples[center]`` is the sample at ``n = 0``; index ``i`` corresponds to
    ``n = i - center``.  ``sample_rate`` is metadata only.
    """

    samples: np.ndarray
    center: int = 0
    sample_rate: Optional[float] = None

    def __post_init__(self):
        x = np.array(self.samples, dtype=np.complex128, copy=True).reshape(-1)
        if not np.all(np.isfinite(x)):
            raise InvalidArgumentError("signal samples must be finite")
        if x.size and not 0 <= int(self.center) < x.size:
            raise InvalidArgumentError(
                f"center {self.center} outside [0, {x.size})")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "center", int(self.center))

    def __len__(self):
        return self.samples.size

    @property
    def n(self):
        """Center-relative time index of every sample."""
        return np.arange(self.samples.size) - self.center

    @property
    def is_real(self):
        return bool(np.all(self.samples.imag == 0.0))

    def with_samples(self, samples):
        return ComplexSignal(samples, self.center, self.sample_rate)

    def at(self, n):
        """Samples at center-relative indices ``n``."""
        return self.samples[np.asarray(n) + self.center]

    @property
    def half_width(self):
        """Largest ``m`` such that both ``x[-m]`` and ``x[m]`` exist."""
        return min(self.center, self.samples.size - 1 - self.center)


def as_signal(obj, center=0):
    if isinstance(obj, ComplexSignal):
        return obj
    return ComplexSignal(np.asarray(obj), center)
