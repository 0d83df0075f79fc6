"""Signal-model components, forward synthesis, noise and error metrics.

Frequencies are angular, in rad/sample, everywhere in this module.  Every
synthesizer evaluates its model at center-relative times
``n = -center, ..., N - 1 - center``.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import InvalidArgumentError, RangeError, ValidationError
from .signal import ComplexSignal, as_signal

TWO_PI = 2.0 * math.pi
KINDS = ("exponential", "am", "fm", "exp_am")


def _phase(value):
    return float(value) % TWO_PI


def _positive(name, value):
    if not (math.isfinite(value) and value > 0.0):
        raise ValidationError(name, f"must be a positive finite number, got {value}")


def _finite(name, value):
    if not math.isfinite(value):
        raise ValidationError(name, f"must be finite, got {value}")


@dataclass(frozen=True)
class ExponentialComponent:
    """``A exp(j phi) exp((damping + j frequency) n)``."""

    amplitude: float
    phase: float
    damping: float
    frequency: float

    def __post_init__(self):
        _positive("amplitude", self.amplitude)
        _finite("phase", self.phase)
        _finite("damping", self.damping)
        _finite("frequency", self.frequency)
        if not -math.pi < self.frequency <= math.pi:
            raise ValidationError("frequency", f"{self.frequency} outside (-pi, pi]")
        object.__setattr__(self, "phase", _phase(self.phase))

    @property
    def pole(self):
        return complex(np.exp(self.damping + 1j * self.frequency))

    @property
    def gain(self):
        return self.amplitude * complex(np.exp(1j * self.phase))

    def conjugate(self):
        return replace(self, phase=-self.phase,
                       frequency=-self.frequency if self.frequency != math.pi else math.pi)


@dataclass(frozen=True)
class AMComponent:
    """``A exp(j phi) [1 + mod_index exp(j mod_frequency n)] exp(j carrier n)``.

    A negative ``mod_frequency`` is allowed so the conjugate partner of a
    component is representable; ``mod_frequency`` may only be zero when the
    modulation index is.
    """

    amplitude: float
    phase: float
    mod_index: float
    mod_frequency: float
    carrier: float

    def __post_init__(self):
        _positive("amplitude", self.amplitude)
        _finite("phase", self.phase)
        if not (math.isfinite(self.mod_index) and 0.0 <= self.mod_index < 1.0):
            raise ValidationError("mod_index", f"μ (mu) must lie in [0, 1), got {self.mod_index}")
        _finite("mod_frequency", self.mod_frequency)
        _finite("carrier", self.carrier)
        if self.mod_frequency == 0.0 and self.mod_index != 0.0:
            raise ValidationError("mod_frequency", "xi must be nonzero when mu > 0")
        if abs(self.carrier) > math.pi:
            raise ValidationError("carrier", f"{self.carrier} outside [-pi, pi]")
        if abs(self.carrier + self.mod_frequency) > math.pi:
            raise ValidationError("mod_frequency", "sideband carrier + xi outside [-pi, pi]")
        object.__setattr__(self, "phase", _phase(self.phase))

    @property
    def sideband(self):
        return self.carrier + self.mod_frequency

    def conjugate(self):
        return replace(self, phase=-self.phase, mod_frequency=-self.mod_frequency,
                       carrier=-self.carrier)


@dataclass(frozen=True)
class FMComponent:
    """``A exp(j phi) exp(j [carrier n + mod_index sin(mod_frequency n)])``."""

    amplitude: float
    phase: float
    mod_index: float
    mod_frequency: float
    carrier: float

    def __post_init__(self):
        _positive("amplitude", self.amplitude)
        _finite("phase", self.phase)
        if not (math.isfinite(self.mod_index) and self.mod_index >= 0.0):
            raise ValidationError("mod_index", f"β (beta) must be >= 0, got {self.mod_index}")
        _finite("mod_frequency", self.mod_frequency)
        _finite("carrier", self.carrier)
        if self.mod_frequency == 0.0 and self.mod_index != 0.0:
            raise ValidationError("mod_index", "beta must be 0 when xi = 0")
        object.__setattr__(self, "phase", _phase(self.phase))

    def conjugate(self):
        return replace(self, phase=-self.phase, mod_frequency=-self.mod_frequency,
                       carrier=-self.carrier)


@dataclass(frozen=True)
class ExpAMComponent:
    """``A exp(j phi) exp(depth [1 - cos(xi n - offset)]) exp(j carrier n)``.

    ``xi`` is shared by every component of a model and lives on
    :class:`ModelSpec`.
    """

    amplitude: float
    phase: float
    depth: float
    offset: float
    carrier: float

    def __post_init__(self):
        _positive("amplitude", self.amplitude)
        _finite("phase", self.phase)
        if not (math.isfinite(self.depth) and self.depth >= 0.0):
            raise ValidationError("depth", f"b must be >= 0, got {self.depth}")
        _finite("offset", self.offset)
        _finite("carrier", self.carrier)
        object.__setattr__(self, "phase", _phase(self.phase))
        object.__setattr__(self, "offset", _phase(self.offset))

    def peak_time(self, xi):
        """Center-relative time of the envelope maximum in ``[0, 2 pi / xi)``."""
        return ((math.pi + self.offset) / xi) % (TWO_PI / xi)

    def conjugate(self):
        # the envelope is real, so only phase and carrier flip
        return replace(self, phase=-self.phase, carrier=-self.carrier)


COMPONENT_TYPES = {
    "exponential": ExponentialComponent,
    "am": AMComponent,
    "fm": FMComponent,
    "exp_am": ExpAMComponent,
}


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    components: tuple
    shared_xi: Optional[float] = None
    extras: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in COMPONENT_TYPES:
            raise ValidationError("kind", f"unknown model kind {self.kind!r}")
        comps = tuple(self.components)
        if not comps:
            raise ValidationError("components", "component list is empty")
        expected = COMPONENT_TYPES[self.kind]
        for c in comps:
            if not isinstance(c, expected):
                raise ValidationError("components", f"{type(c).__name__} in a {self.kind} model")
        object.__setattr__(self, "components", comps)
        if self.kind == "exp_am":
            if self.shared_xi is None or not (math.isfinite(self.shared_xi) and self.shared_xi > 0.0):
                raise ValidationError("shared_xi", "exp_am models need shared_xi > 0")
            object.__setattr__(self, "shared_xi", float(self.shared_xi))
        elif self.shared_xi is not None:
            raise ValidationError("shared_xi", "only exp_am models carry shared_xi")

    def __len__(self):
        return len(self.components)


def _times(n_samples, center):
    n_samples = int(n_samples)
    if n_samples < 1:
        raise InvalidArgumentError("n_samples must be >= 1")
    if not 0 <= center < n_samples:
        raise InvalidArgumentError(f"center {center} outside [0, {n_samples})")
    return np.arange(n_samples, dtype=float) - center


def synth_exponential(components, n_samples, center=0):
    n = _times(n_samples, center)
    x = np.zeros(n.size, dtype=np.complex128)
    for c in components:
        x += c.amplitude * np.exp(1j * c.phase + (c.damping + 1j * c.frequency) * n)
    return ComplexSignal(x, center)


def synth_am(components, n_samples, center=0):
    n = _times(n_samples, center)
    x = np.zeros(n.size, dtype=np.complex128)
    for c in components:
        env = 1.0 + c.mod_index * np.exp(1j * c.mod_frequency * n)
        x += c.amplitude * np.exp(1j * c.phase) * env * np.exp(1j * c.carrier * n)
    return ComplexSignal(x, center)


def synth_fm(components, n_samples, center=0):
    n = _times(n_samples, center)
    x = np.zeros(n.size, dtype=np.complex128)
    for c in components:
        x += c.amplitude * np.exp(1j * (c.phase + c.carrier * n
                                        + c.mod_index * np.sin(c.mod_frequency * n)))
    return ComplexSignal(x, center)


def exp_am_log_envelope(component, xi, n):
    return math.log(component.amplitude) + component.depth * (1.0 - np.cos(xi * n - component.offset))


def synth_exp_am(components, shared_xi, n_samples, center=0):
    """Exponential-envelope AM bursts.

    Evaluated as ``exp(ln A + b (1 - cos(...)))`` so that tiny amplitudes
    paired with deep envelopes do not underflow.
    """
    if not shared_xi > 0.0:
        raise InvalidArgumentError("shared_xi must be > 0")
    n = _times(n_samples, center)
    x = np.zeros(n.size, dtype=np.complex128)
    for c in components:
        if 2.0 * c.depth > 700.0:
            raise RangeError(f"envelope depth {c.depth} overflows double precision")
        log_env = exp_am_log_envelope(c, shared_xi, n)
        x += np.exp(log_env + 1j * (c.phase + c.carrier * n))
    return ComplexSignal(x, center)


def synthesize(spec, n_samples, center=0):
    if spec.kind == "exponential":
        return synth_exponential(spec.components, n_samples, center)
    if spec.kind == "am":
        return synth_am(spec.components, n_samples, center)
    if spec.kind == "fm":
        return synth_fm(spec.components, n_samples, center)
    return synth_exp_am(spec.components, spec.shared_xi, n_samples, center)


def with_conjugates(components):
    """Each component followed by its conjugate partner (real-signal pairs)."""
    out = []
    for c in components:
        out.extend([c, c.conjugate()])
    return out


def add_noise(signal, snr_db, seed):
    """Add white Gaussian noise at ``snr_db``.

    Complex records get circular complex noise, real records real noise, so
    a real signal stays real.  ``snr_db = inf`` returns an unchanged copy.
    The noise variance is set from the mean signal power, so the SNR holds
    in expectation.
    """
    signal = as_signal(signal)
    x = signal.samples
    if x.size == 0:
        raise InvalidArgumentError("cannot add noise to an empty signal")
    power = float(np.mean(np.abs(x) ** 2))
    if power == 0.0:
        raise InvalidArgumentError("signal has zero power; SNR undefined")
    if math.isinf(snr_db) and snr_db > 0:
        return signal.with_samples(x.copy())
    noise_var = power / 10.0 ** (snr_db / 10.0)
    rng = np.random.default_rng(seed)
    if signal.is_real:
        return signal.with_samples(x + math.sqrt(noise_var) * rng.standard_normal(x.size))
    w = rng.standard_normal(x.size) + 1j * rng.standard_normal(x.size)
    return signal.with_samples(x + math.sqrt(noise_var / 2.0) * w)


def nmse(reference, test):
    """``sum |ref - test|^2 / sum |ref|^2``."""
    ref = as_signal(reference).samples
    tst = as_signal(test).samples
    if ref.size != tst.size:
        raise InvalidArgumentError(f"length mismatch: {ref.size} vs {tst.size}")
    energy = float(np.sum(np.abs(ref) ** 2))
    if energy == 0.0:
        raise InvalidArgumentError("reference signal is identically zero")
    return float(np.sum(np.abs(ref - tst) ** 2) / energy)
