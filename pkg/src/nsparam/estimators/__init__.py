"""Parameter estimators for the four signal models."""

from ..errors import InvalidArgumentError
from .am import estimate_am
from .config import ComponentDiagnostics, EstimationConfig, FitReport
from .exp_am import estimate_exp_am
from .exponential import estimate_exponential
from .fm import beta_from_residues, estimate_fm

ESTIMATORS = {
    "exponential": estimate_exponential,
    "am": estimate_am,
    "fm": estimate_fm,
    "exp_am": estimate_exp_am,
}

# short names accepted on the command line
KIND_ALIASES = {"exp": "exponential", "expam": "exp_am"}


def canonical_kind(kind):
    kind = KIND_ALIASES.get(kind, kind)
    if kind not in ESTIMATORS:
        raise InvalidArgumentError(f"unknown model kind {kind!r}")
    return kind


def estimate(kind, signal, config=None, **kwargs):
    """Dispatch to the estimator for ``kind`` (long or short name)."""
    return ESTIMATORS[canonical_kind(kind)](signal, config, **kwargs)


__all__ = [
    "ComponentDiagnostics",
    "EstimationConfig",
    "FitReport",
    "beta_from_residues",
    "canonical_kind",
    "estimate",
    "estimate_am",
    "estimate_exp_am",
    "estimate_exponential",
    "estimate_fm",
]
