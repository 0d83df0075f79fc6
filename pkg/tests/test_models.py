import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsparam.errors import InvalidArgumentError, RangeError, ValidationError
from nsparam.models import (AMComponent, ExpAMComponent, ExponentialComponent, FMComponent,
                            ModelSpec, add_noise, nmse, synth_am, synth_exp_am,
                            synth_exponential, synth_fm, synthesize, with_conjugates)
from nsparam.signal import ComplexSignal

XI_ECG = 2 * np.pi / 166


class TestValidation:
    def test_amplitude_positive(self):
        with pytest.raises(ValidationError, match="amplitude"):
            ExponentialComponent(0.0, 0.0, 0.0, 0.1)

    def test_frequency_range(self):
        with pytest.raises(ValidationError, match="frequency"):
            ExponentialComponent(1.0, 0.0, 0.0, 4.0)

    def test_mu_range(self):
        with pytest.raises(ValidationError, match="μ"):
            AMComponent(1.0, 0.0, 1.2, 0.1, 0.5)

    def test_beta_nonnegative(self):
        with pytest.raises(ValidationError, match="β"):
            FMComponent(1.0, 0.0, -0.1, 0.1, 0.5)

    def test_depth_nonnegative(self):
        with pytest.raises(ValidationError, match="depth"):
            ExpAMComponent(1.0, 0.0, -1.0, 0.0, 0.1)

    def test_phase_and_offset_wrapped(self):
        c = ExpAMComponent(1.0, -0.5, 1.0, 7.0, 0.1)
        assert 0 <= c.phase < 2 * np.pi and 0 <= c.offset < 2 * np.pi

    def test_spec_invariants(self):
        with pytest.raises(ValidationError):
            ModelSpec("am", [])
        with pytest.raises(ValidationError):
            ModelSpec("am", [FMComponent(1.0, 0.0, 0.0, 0.0, 0.1)])
        with pytest.raises(ValidationError, match="shared_xi"):
            ModelSpec("exp_am", [ExpAMComponent(1.0, 0.0, 1.0, 0.0, 0.1)])
        with pytest.raises(ValidationError, match="shared_xi"):
            ModelSpec("fm", [FMComponent(1.0, 0.0, 0.0, 0.0, 0.1)], shared_xi=0.1)


class TestSynthesis:
    def test_constant_exponential(self):
        x = synth_exponential([ExponentialComponent(1.0, 0.0, 0.0, 0.0)], 4)
        assert np.array_equal(x.samples, np.ones(4))

    def test_phase_only(self):
        x = synth_exponential([ExponentialComponent(2.0, np.pi / 2, 0.0, 0.0)], 5)
        assert np.allclose(x.samples, 2j, atol=1e-15)

    def test_transient_is_real_and_decaying(self, transient):
        x = synthesize(transient, 256).samples
        assert np.max(np.abs(x.imag)) <= 1e-12
        head, tail = np.abs(x[:32]).max(), np.abs(x[-32:]).max()
        assert tail < 0.1 * head

    def test_am_degenerate(self):
        x = synth_am([AMComponent(1.0, 0.0, 0.0, 0.0, np.pi / 3)], 32)
        assert np.allclose(x.samples, np.exp(1j * np.pi / 3 * np.arange(32)), atol=1e-14)

    def test_am_at_origin(self):
        x = synth_am([AMComponent(1.0, 0.0, 0.5, 0.2, 1.0)], 3)
        assert x.samples[0] == pytest.approx(1.5)

    def test_vowel_has_carriers_with_upper_sidebands(self, vowel):
        x = synthesize(vowel, 2048).samples
        assert np.max(np.abs(x.imag)) <= 1e-12
        positive = [c for c in vowel.components if c.carrier > 0]
        spectrum = np.abs(np.fft.fft(x * np.hanning(x.size), 1 << 15))
        w = 2 * np.pi * np.fft.fftfreq(1 << 15)
        for c in positive:
            for f in (c.carrier, c.sideband):
                near = np.abs(w - f) < 0.005
                assert spectrum[near].max() > 0.05 * spectrum.max()

    def test_fm_degenerate_and_origin(self):
        n = np.arange(40)
        x = synth_fm([FMComponent(1.0, 0.0, 0.0, 0.0, 0.5)], 40)
        assert np.allclose(x.samples, np.exp(0.5j * n), atol=1e-14)
        y = synth_fm([FMComponent(1.0, 0.0, 1.0, 0.1, 0.5)], 40)
        assert y.samples[0] == pytest.approx(1.0)

    def test_fricative_is_real(self, fricative):
        x = synthesize(fricative, 8192, 4096).samples
        assert np.max(np.abs(x.imag)) <= 1e-10 * np.linalg.norm(x.real)

    def test_exp_am_flat_and_peak(self):
        flat = synth_exp_am([ExpAMComponent(0.7, 0.4, 0.0, 1.0, 0.3)], XI_ECG, 20)
        n = np.arange(20)
        assert np.allclose(flat.samples, 0.7 * np.exp(1j * (0.4 + 0.3 * n)), atol=1e-14)
        burst = synth_exp_am([ExpAMComponent(1.0, 0.0, 1.0, 0.0, 0.0)], XI_ECG, 200)
        assert burst.samples[83] == pytest.approx(np.e ** 2, rel=1e-12)
        assert np.argmax(np.abs(burst.samples)) == 83

    def test_ecg_peak_formula_and_bound(self, ecg, ecg_signal):
        x = ecg_signal.samples
        bound = sum(c.amplitude * math.exp(2 * c.depth) for c in ecg.components)
        assert np.max(np.abs(x)) <= bound * (1 + 1e-12)
        qrs = ecg.components[1]
        assert qrs.depth == pytest.approx(44.2553)
        assert qrs.peak_time(XI_ECG) == pytest.approx(91.0, abs=0.5)
        # each wave peaks at its formula time in every period
        for c in ecg.components:
            single = synth_exp_am([c], ecg.shared_xi, 498, 249)
            peak_n = single.n[np.argmax(np.abs(single.samples))]
            assert (peak_n - c.peak_time(ecg.shared_xi) + 83) % 166 - 83 == pytest.approx(0, abs=0.5)

    def test_exp_am_overflow_guard(self):
        with pytest.raises(RangeError):
            synth_exp_am([ExpAMComponent(1.0, 0.0, 400.0, 0.0, 0.1)], 0.1, 10)

    def test_center_relative_times(self):
        c = ExponentialComponent(1.0, 0.0, 0.0, 0.3)
        x = synth_exponential([c], 10, center=4)
        assert x.center == 4
        assert x.at(0) == pytest.approx(1.0)
        assert x.at(-4) == pytest.approx(np.exp(-1.2j))

    def test_bad_lengths(self):
        with pytest.raises(InvalidArgumentError):
            synth_fm([FMComponent(1.0, 0.0, 0.0, 0.0, 0.1)], 0)
        with pytest.raises(InvalidArgumentError):
            synth_fm([FMComponent(1.0, 0.0, 0.0, 0.0, 0.1)], 5, center=5)


amp = st.floats(0.1, 5.0)
phase = st.floats(0.0, 6.28)
freq = st.floats(-3.0, 3.0)


@given(amp, phase, freq, st.integers(0, 20))
@settings(max_examples=60, deadline=None)
def test_degeneracy_chain(a, phi, w, center):
    n_samples = 64
    ref = synth_exponential([ExponentialComponent(a, phi, 0.0, w)], n_samples, center).samples
    others = [
        synth_am([AMComponent(a, phi, 0.0, 0.0, w)], n_samples, center),
        synth_fm([FMComponent(a, phi, 0.0, 0.0, w)], n_samples, center),
        synth_exp_am([ExpAMComponent(a, phi, 0.0, 1.3, w)], 0.2, n_samples, center),
    ]
    for x in others:
        assert np.max(np.abs(x.samples - ref)) <= 1e-12 * max(1.0, a)


@given(st.sampled_from(["exponential", "am", "fm", "exp_am"]), st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_conjugate_pair_closure(kind, seed):
    r = np.random.default_rng(seed)
    comps = []
    for _ in range(r.integers(1, 4)):
        a, phi, w = r.uniform(0.2, 2), r.uniform(0, 2 * np.pi), r.uniform(-1.2, 1.2)
        if kind == "exponential":
            comps.append(ExponentialComponent(a, phi, r.uniform(-0.05, 0), w))
        elif kind == "am":
            comps.append(AMComponent(a, phi, r.uniform(0, 0.9), r.uniform(0.05, 0.5), w))
        elif kind == "fm":
            comps.append(FMComponent(a, phi, r.uniform(0, 2), r.uniform(0.01, 0.2), w))
        else:
            comps.append(ExpAMComponent(a, phi, r.uniform(0, 5), r.uniform(0, 6), w))
    spec = ModelSpec(kind, with_conjugates(comps), shared_xi=0.1 if kind == "exp_am" else None)
    x = synthesize(spec, 128, 64).samples
    assert np.linalg.norm(x.imag) <= 1e-10 * np.linalg.norm(x.real)


class TestNoise:
    def test_infinite_snr_is_identity(self, rng):
        x = ComplexSignal(rng.standard_normal(16) + 1j * rng.standard_normal(16), 3)
        y = add_noise(x, math.inf, 1)
        assert np.array_equal(x.samples, y.samples) and y.center == 3

    def test_deterministic_per_seed(self):
        x = ComplexSignal(np.exp(0.3j * np.arange(100)))
        a, b, c = add_noise(x, 10, 7), add_noise(x, 10, 7), add_noise(x, 10, 8)
        assert np.array_equal(a.samples, b.samples)
        assert not np.array_equal(a.samples, c.samples)

    def test_measured_snr(self):
        # sample-variance oracle: measured SNR of a long record sits within 0.2 dB
        x = ComplexSignal(np.exp(0.3j * np.arange(100_000)))
        y = add_noise(x, 20.0, 3)
        noise = y.samples - x.samples
        snr = 10 * np.log10(np.mean(np.abs(x.samples) ** 2) / np.mean(np.abs(noise) ** 2))
        assert abs(snr - 20.0) <= 0.2
        # complex records receive circular noise with equal power per quadrature
        assert np.var(noise.real) == pytest.approx(np.var(noise.imag), rel=0.05)

    def test_real_signal_stays_real(self):
        y = add_noise(ComplexSignal(np.cos(0.3 * np.arange(500))), 10, 1)
        assert y.is_real

    def test_zero_power(self):
        with pytest.raises(InvalidArgumentError):
            add_noise(np.zeros(8), 10, 1)

    def test_nmse_decreases_with_snr(self):
        x = synth_fm([FMComponent(1.0, 0.2, 0.5, 0.05, 0.7)], 256)
        means = [np.mean([nmse(x, add_noise(x, s, seed)) for seed in range(30)])
                 for s in (10, 20, 30)]
        assert means[0] > means[1] > means[2]


class TestNmse:
    def test_identities(self, rng):
        x = rng.standard_normal(50) + 1j * rng.standard_normal(50)
        assert nmse(x, x) == 0.0
        assert nmse(x, np.zeros(50)) == pytest.approx(1.0)
        assert nmse(x, x * (1 + 1e-3)) == pytest.approx(1e-6, abs=1e-12)

    def test_errors(self):
        with pytest.raises(InvalidArgumentError):
            nmse(np.ones(3), np.ones(4))
        with pytest.raises(InvalidArgumentError):
            nmse(np.zeros(3), np.ones(3))
