import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsparam.correlation import (BurstSegment, cross_weight, envelope_correlations,
                                 product_function, sample_aacf, segment_bursts,
                                 theoretical_aacf_exponential, theoretical_p2)
from nsparam.errors import InvalidArgumentError
from nsparam.models import (ExpAMComponent, ExponentialComponent, FMComponent, synth_exp_am,
                            synth_exponential, synth_fm)
from nsparam.signal import ComplexSignal

TWO_FM = [FMComponent(1.0, 0.4, 0.3, 0.05, 0.6), FMComponent(0.7, 2.0, 0.5, 0.08, 1.3)]


class TestSampleAacf:
    def test_constant(self):
        c = sample_aacf(np.ones(9), 2)
        assert c.window == (2, 6)
        assert np.allclose(c.values, 5.0)
        assert list(c.lags) == [-2, -1, 0, 1, 2]

    def test_single_exponential_closed_form(self):
        z = 0.9 * np.exp(0.5j)
        comp = ExponentialComponent(1.0, 0.0, np.log(0.9), 0.5)
        x = synth_exponential([comp], 40)
        c = sample_aacf(x, 8)
        n1, n2 = c.window
        B = np.sum(np.abs(z) ** (2 * np.arange(n1, n2 + 1)))
        assert np.allclose(c.values, B * z ** c.lags, atol=1e-10)
        oracle = theoretical_aacf_exponential([comp], n1, n2, 8)
        assert np.allclose(c.values, oracle.values, atol=1e-10)

    def test_zero_signal(self):
        assert np.all(sample_aacf(np.zeros(20), 3).values == 0)

    def test_too_short(self):
        with pytest.raises(InvalidArgumentError):
            sample_aacf(np.ones(9), 4)

    @given(st.integers(1, 10), st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_matches_brute_force(self, J, seed):
        r = np.random.default_rng(seed)
        N = 2 * J + 2 + int(r.integers(0, 20))
        y = r.standard_normal(N) + 1j * r.standard_normal(N)
        c = sample_aacf(y, J)
        n = np.arange(J, N - J)
        brute = np.array([np.sum(np.conj(y[n]) * y[n + k]) for k in range(-J, J + 1)])
        assert np.allclose(c.values, brute, atol=1e-10)
        # c[0] is an energy, hence real
        assert abs(c.at(0).imag) <= 1e-10


class TestTheoreticalAacf:
    def test_undamped(self):
        c = theoretical_aacf_exponential([ExponentialComponent(1.0, 0.0, 0.0, 1.1)], 0, 4, 2)
        assert c.at(0) == pytest.approx(5.0)
        c = theoretical_aacf_exponential([ExponentialComponent(2.0, 0.0, 0.0, 0.3)], 0, 4, 3)
        assert np.allclose(c.values, 4 * 5 * np.exp(0.3j * c.lags))

    def test_random_phase_expectation(self):
        # Monte Carlo oracle: average the sample aacf over random phase pairs
        a = (0.8, 0.5)
        J, N, trials = 6, 40, 10_000
        r = np.random.default_rng(5)
        phases = r.uniform(0, 2 * np.pi, (trials, 2))
        n = np.arange(N)
        base = [a[0] * np.exp((-0.01 + 0.4j) * n), a[1] * np.exp((-0.02 - 1.0j) * n)]
        acc = np.zeros(2 * J + 1, dtype=complex)
        for p1, p2 in phases:
            acc += sample_aacf(base[0] * np.exp(1j * p1) + base[1] * np.exp(1j * p2), J).values
        acc /= trials
        comps = [ExponentialComponent(a[0], 0.0, -0.01, 0.4), ExponentialComponent(a[1], 0.0, -0.02, -1.0)]
        oracle = theoretical_aacf_exponential(comps, J, N - 1 - J, J).values
        rel = np.max(np.abs(acc - oracle)) / np.max(np.abs(oracle))
        assert rel <= 3 / np.sqrt(trials)

    def test_window_order(self):
        with pytest.raises(InvalidArgumentError):
            theoretical_aacf_exponential([ExponentialComponent(1.0, 0.0, 0.0, 0.1)], 5, 4, 2)


class TestProductFunction:
    def test_zero_lag(self, rng):
        x = ComplexSignal(rng.standard_normal(21) + 1j * rng.standard_normal(21), 10)
        p = product_function(x, 10)
        assert p.at(0) == pytest.approx(abs(x.at(0)) ** 2)

    def test_single_fm_closed_form(self):
        c = FMComponent(1.0, 0.0, 1.3, 0.07, 0.5)
        x = synth_fm([c], 401, 200)
        p = product_function(x, 400)
        k = p.lags
        expected = np.exp(1j * 0.5 * k) * np.exp(2j * 1.3 * np.sin(0.07 * k / 2))
        assert np.allclose(p.values, expected, atol=1e-12)

    def test_odd_lag_rejected(self):
        p = product_function(ComplexSignal(np.ones(11), 5), 4)
        with pytest.raises(InvalidArgumentError):
            p.at(1)
        with pytest.raises(InvalidArgumentError):
            product_function(np.ones(11), 3)

    def test_half_width_limit(self):
        with pytest.raises(InvalidArgumentError):
            product_function(ComplexSignal(np.ones(11), 2), 6)

    def test_matches_bessel_expansion(self):
        x = synth_fm(TWO_FM, 1025, 512)
        sampled = product_function(x, 1024)
        series = theoretical_p2(TWO_FM, 1024, 25)
        assert np.max(np.abs(sampled.values - series.values)) <= 1e-8


class TestTheoreticalP2:
    def test_unmodulated(self):
        c1, c2 = FMComponent(1.2, 0.3, 0.0, 0.0, 0.4), FMComponent(0.5, 1.1, 0.0, 0.0, 1.0)
        p = theoretical_p2([c1, c2], 20, 10)
        k = p.lags
        expected = (1.44 * np.exp(0.4j * k) + 0.25 * np.exp(1.0j * k)
                    + cross_weight(c1, c2) * np.exp(1j * 1.4 * k / 2))
        assert np.allclose(p.values, expected, atol=1e-13)

    def test_in_phase_cross_weight(self):
        c1, c2 = FMComponent(1.2, 0.3, 0.0, 0.0, 0.4), FMComponent(0.5, 0.3, 0.0, 0.0, 1.0)
        assert cross_weight(c1, c2) == pytest.approx(2 * 1.2 * 0.5)

    def test_truncation_guard(self):
        with pytest.raises(InvalidArgumentError):
            theoretical_p2(TWO_FM, 10, 5)
        with pytest.raises(InvalidArgumentError):
            theoretical_p2(TWO_FM[:1], 10, 25)


class TestEnvelopeCorrelations:
    @given(st.integers(3, 60), st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_modulus_identity(self, n, seed):
        r = np.random.default_rng(seed)
        x = ComplexSignal(r.standard_normal(n) + 1j * r.standard_normal(n), n // 2)
        env = envelope_correlations(x)
        assert np.all(env.r1 >= 0)
        mid = env.r2.size // 2
        assert env.r2[mid] == pytest.approx(env.r1[env.center])
        r1 = dict(zip(env.r1_times, env.r1))
        for t, v in zip(env.r2_times, env.r2):
            assert abs(v) == pytest.approx(np.sqrt(r1[t] * r1[-t]), abs=1e-10)

    def test_single_burst_envelope(self):
        xi = 2 * np.pi / 166
        c = ExpAMComponent(0.3, 2.2, 3.0, 1.1, 0.4)
        x = synth_exp_am([c], xi, 333, 166)
        env = envelope_correlations(x)
        n = env.r1_times
        expected = 0.09 * np.exp(2 * 3.0 * (1 - np.cos(xi * n - 1.1)))
        assert np.allclose(env.r1, expected, rtol=1e-12)


class TestSegmentBursts:
    def test_single_bump(self):
        n = np.arange(100)
        r1 = np.exp(-0.5 * ((n - 40) / 5.0) ** 2)
        segs = segment_bursts(r1)
        assert len(segs) == 1 and segs[0].start <= 40 <= segs[0].end and segs[0].peak_index == 40

    def test_two_bumps(self):
        n = np.arange(200)
        r1 = np.exp(-0.5 * ((n - 40) / 4.0) ** 2) + 0.5 * np.exp(-0.5 * ((n - 140) / 4.0) ** 2)
        r1[r1 < 1e-6] = 0.0
        segs = segment_bursts(r1, min_gap=5)
        assert [s.peak_index for s in segs] == [40, 140]

    def test_origin_shift_and_empty(self):
        r1 = np.zeros(30)
        assert segment_bursts(r1) == []
        r1[20] = 1.0
        assert segment_bursts(r1, origin=15)[0].peak_index == 5

    def test_segment_invariant(self):
        with pytest.raises(InvalidArgumentError):
            BurstSegment(5, 10, 12)

    def test_ecg_peak_ordering(self, ecg):
        # the four waves of one period overlap in time, so the composite forms a
        # single burst; each wave alone peaks where the closed-form peak time says
        xi = ecg.shared_xi
        peaks = []
        for c in ecg.components:
            x = synth_exp_am([c], xi, 166)
            (seg,) = segment_bursts(np.abs(x.samples) ** 2, rel_floor=1e-3)
            assert abs(seg.peak_index - c.peak_time(xi)) <= 0.5
            peaks.append(seg.peak_index)
        formula = [c.peak_time(xi) for c in ecg.components]
        assert np.argsort(peaks).tolist() == np.argsort(formula).tolist()
        qrs = ecg.components[1]
        assert peaks[1] == 91 and qrs.peak_time(xi) == pytest.approx(91.0, abs=0.01)
        composite = synth_exp_am(ecg.components, xi, 166)
        segs = segment_bursts(np.abs(composite.samples) ** 2, rel_floor=1e-3)
        assert any(s.start <= 91 <= s.end for s in segs)
