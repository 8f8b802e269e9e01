import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rabibloch.observables import ObservableSeries
from rabibloch.spectra import (SpectralLine, find_peaks, label_peaks, power_spectrum)


def series(fn, n=4000, dt=0.1):
    t = np.arange(n) * dt
    return ObservableSeries("x", 0, t, fn(t))


def test_single_sinusoid_peak():
    spec = power_spectrum(series(lambda t: np.cos(0.5 * t)))
    assert abs(spec.omegas[np.argmax(spec.magnitudes)] - 0.5) <= spec.bin_width
    assert spec.omegas.size == spec.n_fft // 2 + 1
    assert spec.omegas[-1] == pytest.approx(np.pi / 0.1)


def test_constant_series_has_no_content():
    spec = power_spectrum(series(lambda t: 3.0 + 0 * t))
    assert np.max(spec.magnitudes) < 1e-12
    assert find_peaks(spec) == []


def test_two_tone_ratio_and_positions():
    spec = power_spectrum(series(lambda t: np.cos(0.04 * t) + 0.5 * np.cos(0.8 * t), n=20000))
    peaks = find_peaks(spec)
    assert len(peaks) == 2
    assert peaks[0].omega_peak == pytest.approx(0.04, abs=spec.bin_width / 2)
    assert peaks[1].omega_peak == pytest.approx(0.8, abs=spec.bin_width / 2)
    assert peaks[0].magnitude / peaks[1].magnitude == pytest.approx(2.0, rel=0.1)


@pytest.mark.parametrize("omega", [0.3137, 0.71, 1.9])
def test_interpolated_peak_within_a_tenth_of_a_bin(omega):
    spec = power_spectrum(series(lambda t: np.sin(omega * t + 0.4)), zero_pad_factor=4)
    assert abs(find_peaks(spec)[0].omega_peak - omega) < 0.1 * spec.bin_width


def test_bin_centred_tone_lands_on_its_bin():
    n, dt = 1000, 0.1
    k = 37
    omega = 2 * np.pi * k / (4 * n * dt)
    spec = power_spectrum(series(lambda t: np.real(np.exp(1j * omega * t)), n, dt))
    assert np.argmax(spec.magnitudes) == k


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 10))
def test_power_scales_quadratically(amp):
    base = series(lambda t: np.cos(0.7 * t) + 0.2 * np.sin(2.1 * t))
    scaled = ObservableSeries("x", 0, base.times, amp * base.values)
    p0 = np.sum(power_spectrum(base).magnitudes ** 2)
    p1 = np.sum(power_spectrum(scaled).magnitudes ** 2)
    assert p1 == pytest.approx(amp**2 * p0, rel=1e-9)


def test_input_checks():
    with pytest.raises(ValueError, match="16"):
        power_spectrum((np.arange(10.0), np.zeros(10)))
    t = np.arange(100.0)
    t[50] += 0.01
    with pytest.raises(ValueError, match="uniform"):
        power_spectrum((t, np.zeros(100)))
    with pytest.raises(ValueError):
        power_spectrum((np.arange(100.0), np.zeros(100)), window="kaiser")
    spec = power_spectrum(series(np.cos))
    with pytest.raises(ValueError):
        find_peaks(spec, rel_threshold=1.5)


def test_rect_window():
    spec = power_spectrum(series(lambda t: np.cos(0.5 * t)), window="rect")
    assert spec.window == "rect"
    assert spec.resolution == pytest.approx(2 * np.pi / 400)


def line(w):
    return SpectralLine(w, 1.0)


def test_label_bloch_line():
    [got] = label_peaks([line(0.04)], 1.0, 0.04, 0.945)
    assert got.label == (0, 1, 0)
    assert got.residual == pytest.approx(0.0, abs=1e-15)


def test_label_tie_prefers_no_rabi_term():
    [got] = label_peaks([line(1.5)], 1.0, 0.5, 0.5)
    assert got.label == (1, 1, 0)


def test_label_mean_rabi_line():
    [got] = label_peaks([line(0.945)], 1.0, 0.04, 0.945)
    assert got.label == (0, 0, 1)


def test_label_withheld_beyond_tolerance():
    [got] = label_peaks([line(0.3)], 1.0, 0.5, 0.0, m_max=0, n_max=1, tol=0.05)
    assert got.label is None
    assert got.residual == pytest.approx(0.2)


def test_zero_omega_bar_forces_p_zero():
    got = label_peaks([line(0.95), line(1.04)], 1.0, 0.04, 0.0)
    assert all(g.label[2] == 0 for g in got if g.label)


def test_every_fig3_comb_member_labels_itself():
    from rabibloch import ChainParams
    from rabibloch.floquet import predicted_lines

    omega_bar = 0.9432374678
    members = predicted_lines(ChainParams(), omega_bar, 2, 8)
    got = label_peaks([line(m.freq) for m in members], 1.0, 0.04, omega_bar, 2, 8, tol=0.01)
    assert [g.label for g in got] == [(m.m, m.n, m.p) for m in members]


def test_labelling_is_deterministic():
    peaks = [line(w) for w in np.linspace(0.01, 2.5, 40)]
    a = label_peaks(peaks, 1.0, 0.5, 0.5)
    b = label_peaks(peaks, 1.0, 0.5, 0.5)
    assert a == b
