import math

import numpy as np
import pytest
from scipy import stats

from fransonsim.source import (C_LIGHT, JointSpectrum, PairBatch, Polarization, SourceConfig, Splitting,
                               coherence_times, make_rng, omega_to_wavelength, sample_pair, sample_pairs,
                               wavelength_to_omega)

LAB = JointSpectrum.from_lab_parameters()


def test_degenerate_centre_is_810nm():
    assert omega_to_wavelength(LAB.signal_center_freq) == pytest.approx(810.0, rel=1e-12)
    assert omega_to_wavelength(LAB.idler_center_freq) == pytest.approx(810.0, rel=1e-12)
    assert LAB.signal_center_freq + LAB.idler_center_freq == pytest.approx(LAB.pump_center_freq, rel=1e-15)


def test_wavelength_roundtrip():
    assert omega_to_wavelength(wavelength_to_omega(405.0)) == pytest.approx(405.0, rel=1e-14)


def test_coherence_times_lab_values():
    tau_s, tau_p = coherence_times(LAB)
    lam = 810e-9
    assert tau_s == pytest.approx(lam ** 2 / (C_LIGHT * 3.1e-9), rel=1e-9)
    assert tau_s == pytest.approx(0.7e-12, rel=0.02)
    assert tau_p == pytest.approx(25.0 / C_LIGHT, rel=1e-12)
    assert tau_p == pytest.approx(83e-9, rel=0.01)
    assert 5e4 < tau_p / tau_s < 5e5


def test_zero_bandwidth_rejected():
    with pytest.raises(ValueError):
        JointSpectrum(LAB.pump_center_freq, 0.0, LAB.signal_center_freq, 1e12)
    with pytest.raises(ValueError):
        JointSpectrum(LAB.pump_center_freq, 1e6, LAB.signal_center_freq, -1.0)


def test_wide_filter_shrinks_tau_single():
    taus = [coherence_times(JointSpectrum(LAB.pump_center_freq, 1e7, LAB.signal_center_freq, bw))[0]
            for bw in (1e12, 1e14, 1e16)]
    assert taus[0] > taus[1] > taus[2]
    assert taus[2] < 1e-15


def test_amplitude_exchange_symmetry():
    ws = LAB.signal_center_freq + np.linspace(-3, 3, 7) * LAB.difference_bandwidth
    wi = LAB.idler_center_freq - np.linspace(-2, 4, 7) * LAB.difference_bandwidth / 3
    np.testing.assert_allclose(LAB.intensity(ws, wi), LAB.intensity(wi, ws), rtol=1e-12)


def test_pair_rate_must_be_positive():
    with pytest.raises(ValueError):
        SourceConfig(0.0, LAB)


def test_sum_and_difference_statistics():
    cfg = SourceConfig(1e6, LAB)
    p = sample_pairs(cfg, make_rng(1), n=200_000)
    s = p.signal_freq + p.idler_freq
    d = p.signal_freq - p.idler_freq
    se = LAB.pump_linewidth / math.sqrt(len(p))
    # float64 resolution at 4.6e15 rad/s is ~1 rad/s; the linewidth is ~12 rad/s
    assert abs(s.mean() - LAB.pump_center_freq) < 5 * se + 2.0
    assert np.std(d) == pytest.approx(LAB.difference_bandwidth, rel=0.01)


def test_exchange_symmetric_marginals():
    cfg = SourceConfig(1e6, LAB)
    p = sample_pairs(cfg, make_rng(2), n=50_000)
    res = stats.ks_2samp(p.signal_freq - LAB.signal_center_freq, p.idler_freq - LAB.idler_center_freq)
    assert res.pvalue > 1e-3


def test_frequency_locked_limit():
    spec = JointSpectrum(LAB.pump_center_freq, 1e-30, LAB.signal_center_freq, LAB.difference_bandwidth)
    p = sample_pairs(SourceConfig(1e6, spec), make_rng(3), n=1000)
    np.testing.assert_allclose(p.signal_freq + p.idler_freq, LAB.pump_center_freq, rtol=1e-15)


def test_empirical_coherence_time():
    # |<exp(i dw tau)>| of a Gaussian line of std sigma_- / 2 falls to e^-1/2 at tau_single
    p = sample_pairs(SourceConfig(1e6, LAB), make_rng(4), n=1_000_000)
    dw = p.signal_freq - LAB.signal_center_freq
    tau_s, _ = coherence_times(LAB)
    g = abs(np.mean(np.exp(1j * dw * tau_s)))
    assert g == pytest.approx(math.exp(-0.5), abs=0.005)
    lam = 810e-9
    assert tau_s == pytest.approx(lam ** 2 / (C_LIGHT * 3.1e-9), rel=1e-6)


def test_poisson_emission_times():
    cfg = SourceConfig(1e5, LAB)
    p = sample_pairs(cfg, make_rng(5), duration=2.0)
    counts = np.histogram(p.emission_time, bins=2000, range=(0, 2.0))[0]
    assert counts.var() / counts.mean() == pytest.approx(1.0, abs=0.1)
    assert np.all(np.diff(p.emission_time) >= 0)
    q = sample_pairs(cfg, make_rng(6), n=100_000)
    gaps = np.diff(q.emission_time)
    assert gaps.mean() == pytest.approx(1e-5, rel=0.02)
    assert stats.kstest(gaps, "expon", args=(0, 1e-5)).pvalue > 1e-3


def test_polarisations():
    a = sample_pairs(SourceConfig(1e5, LAB, Splitting.TYPE_I_PROBABILISTIC), make_rng(7), n=100)
    b = sample_pairs(SourceConfig(1e5, LAB, Splitting.TYPE_II_DETERMINISTIC), make_rng(7), n=100)
    assert np.all(a.signal_pol == a.idler_pol)
    assert np.all(b.signal_pol != b.idler_pol)
    one = sample_pair(SourceConfig(1e5, LAB, Splitting.TYPE_II_DETERMINISTIC), make_rng(8))
    assert {one.signal_pol, one.idler_pol} == {Polarization.H, Polarization.V}


def test_seeded_streams_repeat():
    cfg = SourceConfig(1e6, LAB)
    a = sample_pairs(cfg, make_rng(9, 1, 2), n=1000)
    b = sample_pairs(cfg, make_rng(9, 1, 2), n=1000)
    c = sample_pairs(cfg, make_rng(9, 1, 3), n=1000)
    assert np.array_equal(a.signal_freq, b.signal_freq) and np.array_equal(a.emission_time, b.emission_time)
    assert not np.array_equal(a.signal_freq, c.signal_freq)


def test_single_pair_follows_previous_time():
    p = sample_pair(SourceConfig(1e6, LAB), make_rng(10), previous_time=1.0)
    assert p.emission_time > 1.0


def test_batch_indexing():
    p = sample_pairs(SourceConfig(1e6, LAB), make_rng(11), n=10)
    assert isinstance(p[3:5], PairBatch) and len(p[3:5]) == 2
    assert p[2].signal_freq == p.signal_freq[2]
    with pytest.raises(ValueError):
        sample_pairs(SourceConfig(1e6, LAB), make_rng(11))
