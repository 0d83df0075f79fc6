"""Parametric modelling of non-stationary signals.

Four component models (damped exponentials, single-tone AM, single-tone FM
and exponential-envelope AM), their correlation statistics, estimators that
recover the parameters from samples, and file/CLI plumbing.
"""

from .errors import NsparamError
from .models import (AMComponent, ExpAMComponent, ExponentialComponent, FMComponent,
                     ModelSpec, add_noise, nmse, synthesize)
from .signal import ComplexSignal

__version__ = "0.1.0"

__all__ = [
    "AMComponent",
    "ComplexSignal",
    "ExpAMComponent",
    "ExponentialComponent",
    "FMComponent",
    "ModelSpec",
    "NsparamError",
    "add_noise",
    "nmse",
    "synthesize",
]
