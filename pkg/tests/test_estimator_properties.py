"""Cross-estimator properties: equivariance, order insensitivity, root rejection."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import phase_diff
from nsparam.estimators import EstimationConfig, estimate
from nsparam.models import (AMComponent, ExpAMComponent, ExponentialComponent, FMComponent,
                            add_noise, synth_am, synth_exp_am, synth_exponential, synth_fm)

CASES = {
    "exponential": (lambda: synth_exponential(
        [ExponentialComponent(1.0, 0.3, -0.01, 0.5), ExponentialComponent(0.6, 1.0, -0.02, -0.9)], 200),
        2),
    "am": (lambda: synth_am([AMComponent(1.0, 0.3, 0.5, 0.4, 0.9)], 512), 1),
    "fm": (lambda: synth_fm([FMComponent(1.0, 0.3, 0.6, 0.06, 0.8)], 2048, 1024), 1),
    "exp_am": (lambda: synth_exp_am([ExpAMComponent(0.05, 0.3, 3.0, 0.4, 0.8)],
                                    2 * np.pi / 166, 498, 249), 1),
}
ROUND_TRIP = {"exponential": 1e-6, "am": 1e-6, "fm": 1e-4, "exp_am": 1e-3}


def freq_of(c):
    return c.frequency if isinstance(c, ExponentialComponent) else c.carrier


@pytest.mark.parametrize("kind", sorted(CASES))
@pytest.mark.parametrize("gain", [2.5, np.exp(1.2j), 0.4 * np.exp(-2.0j)])
def test_scaling_equivariance(kind, gain):
    make, order = CASES[kind]
    x = make()
    cfg = EstimationConfig(model_order=order)
    base = estimate(kind, x, cfg)
    scaled = estimate(kind, x.with_samples(gain * x.samples), cfg)
    assert base.nmse <= ROUND_TRIP[kind] and scaled.nmse <= ROUND_TRIP[kind]
    pairs = zip(sorted(base.spec.components, key=freq_of), sorted(scaled.spec.components, key=freq_of))
    for b, s in pairs:
        assert s.amplitude == pytest.approx(abs(gain) * b.amplitude, rel=1e-6)
        assert phase_diff(s.phase, b.phase + np.angle(gain)) <= 1e-6
        assert freq_of(s) == pytest.approx(freq_of(b), abs=1e-9)


def test_extended_order_insensitivity():
    comp = ExponentialComponent(1.3, 0.7, -0.02, 0.45)
    x = synth_exponential([comp], 100)
    poles = []
    for L in (4, 8, 12):
        report = estimate("exponential", x, EstimationConfig(model_order=1, extended_order=L, max_lag=2 * L))
        (c,) = report.spec.components
        poles.append(np.exp(c.damping + 1j * c.frequency))
    assert max(abs(p - poles[0]) for p in poles) <= 1e-8
    assert abs(poles[0] - comp.pole) <= 1e-8


def test_noise_root_rejection():
    comps = [ExponentialComponent(1.0, 0.0, -0.005, 0.6), ExponentialComponent(0.8, 1.0, -0.01, -1.2)]
    x = synth_exponential(comps, 256)
    truth = np.array([c.pole for c in comps])
    cfg = EstimationConfig(model_order=2, max_lag=60, extended_order=24)
    hits = 0
    for seed in range(50):
        report = estimate("exponential", add_noise(x, 20.0, seed), cfg)
        candidates = np.asarray(report.extra["candidate_poles"])
        closest = {int(np.argmin(np.abs(candidates - z))) for z in truth}
        kept = {int(np.argmin(np.abs(candidates - np.exp(c.damping + 1j * c.frequency))))
                for c in report.spec.components}
        hits += kept == closest
    assert hits / 50 >= 0.9


@given(st.floats(0.05, 0.9), st.floats(0.1, 0.6), st.floats(-1.5, 1.5), st.floats(0, 6.28))
@settings(max_examples=15, deadline=None)
def test_am_mu_realness(mu, xi, carrier, phase):
    x = synth_am([AMComponent(1.0, phase, mu, xi, carrier)], 512)
    report = estimate("am", x, EstimationConfig(model_order=1))
    (d,) = report.diagnostics
    assert d.extra["mu_phase"] < 0.01
    assert report.spec.components[0].mod_index == pytest.approx(mu, abs=1e-6)
