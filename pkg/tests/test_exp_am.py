import numpy as np
import pytest

from conftest import match_by, phase_diff
from nsparam.errors import PreconditionError, SegmentationError
from nsparam.estimators import EstimationConfig, estimate_exp_am
from nsparam.models import ExpAMComponent, ModelSpec, add_noise, synth_exp_am, synthesize
from nsparam.signal import ComplexSignal

XI = 2 * np.pi / 166


def check_ecg(report, ecg):
    truth = list(ecg.components)
    got = match_by(report.spec.components, truth, key=lambda c: c.carrier)
    for g, t in zip(got, truth):
        assert g.depth == pytest.approx(t.depth, rel=0.01)
        assert phase_diff(g.offset, t.offset) <= 0.01
        assert g.carrier == pytest.approx(t.carrier, abs=1e-3)
    assert report.spec.shared_xi == pytest.approx(ecg.shared_xi, rel=1e-6)
    assert report.nmse <= 1e-3


def test_ecg_table(ecg, ecg_signal):
    report = estimate_exp_am(ecg_signal, EstimationConfig(model_order=4))
    check_ecg(report, ecg)


def test_ecg_table_order_and_xi_unknown(ecg, ecg_signal):
    check_ecg(estimate_exp_am(ecg_signal), ecg)


def test_ecg_table_known_xi(ecg, ecg_signal):
    check_ecg(estimate_exp_am(ecg_signal, known_xi=XI), ecg)


def test_qrs_peak_time(ecg):
    qrs = ecg.components[1]
    assert (np.pi + qrs.offset) * 166 / (2 * np.pi) == pytest.approx(91.0, abs=0.05)


def test_time_separated_bursts():
    comps = [ExpAMComponent(0.01, 0.5, 4.0, 0.0, 0.6), ExpAMComponent(0.002, 2.0, 5.0, 3.0, 1.9)]
    x = synth_exp_am(comps, 2 * np.pi / 200, 601, 300)
    report = estimate_exp_am(x, EstimationConfig(model_order=2))
    assert report.extra["separation"] in ("time", "band")
    got = match_by(report.spec.components, comps, key=lambda c: c.carrier)
    for g, t in zip(got, comps):
        assert g.depth == pytest.approx(t.depth, rel=1e-3)
        assert g.amplitude == pytest.approx(t.amplitude, rel=1e-3)
        assert phase_diff(g.phase, t.phase) <= 1e-3
    assert report.nmse <= 1e-6


def test_real_input_reports_pairs():
    comp = ExpAMComponent(0.05, 1.0, 3.0, 0.5, 0.8)
    spec = ModelSpec("exp_am", [comp, comp.conjugate()], shared_xi=XI)
    x = synthesize(spec, 498, 249)
    report = estimate_exp_am(ComplexSignal(x.samples.real, 249), EstimationConfig(model_order=1))
    assert len(report.spec) == 2
    assert sorted(c.carrier for c in report.spec.components) == pytest.approx([-0.8, 0.8], abs=1e-6)
    assert report.nmse <= 1e-6


def test_flat_envelope():
    x = synth_exp_am([ExpAMComponent(0.7, 0.3, 0.0, 0.0, 0.9)], XI, 256, 128)
    report = estimate_exp_am(x, EstimationConfig(model_order=1))
    (got,) = report.spec.components
    assert got.offset == 0.0 and got.depth == pytest.approx(0.0, abs=1e-9)
    assert got.amplitude == pytest.approx(0.7, rel=1e-9)
    assert got.carrier == pytest.approx(0.9, abs=1e-9)
    assert any("flat envelope" in w for w in report.warnings)


def test_moderate_noise(ecg, ecg_signal):
    report = estimate_exp_am(add_noise(ecg_signal, 40, 0), EstimationConfig(model_order=4))
    assert report.nmse <= 1e-2


class TestErrors:
    def test_zero_signal(self):
        with pytest.raises(SegmentationError):
            estimate_exp_am(ComplexSignal(np.zeros(64), 32))

    def test_too_short(self):
        with pytest.raises(PreconditionError):
            estimate_exp_am(ComplexSignal(np.ones(8), 4))

    def test_bad_known_xi(self, ecg_signal):
        with pytest.raises(PreconditionError):
            estimate_exp_am(ecg_signal, known_xi=-1.0)
