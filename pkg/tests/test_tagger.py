import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fransonsim import tagger
from fransonsim.interferometer import InterferometerConfig, OutcomeBatch, PathOutcome, Path, traverse_batch
from fransonsim.source import JointSpectrum, SourceConfig, make_rng, sample_pairs
from fransonsim.tagger import (CoincidenceHistogram, DetectorSpec, TagStream, apply_dead_time, build_histogram,
                               detect, detect_batch, integrate_window, read_tags, write_tags)

IDEAL = DetectorSpec(efficiency=1.0, jitter_std=0.0, dead_time=0.0, dark_rate=0.0)
LAB = JointSpectrum.from_lab_parameters()


def brute_histogram(a, b, bw, max_lag):
    half = (max_lag + bw // 2) // bw
    counts = np.zeros(2 * half + 1, np.int64)
    for ta in a:
        for tb in b:
            lag = tb - ta
            if abs(lag) <= max_lag:
                counts[(lag + bw // 2) // bw + half] += 1
    return counts


def random_stream(rng, n, span):
    ch = rng.integers(0, 2, n)
    t = np.sort(rng.integers(0, span, n))
    return TagStream(ch, t)


def outcome_batch(ta, tb):
    n = len(ta)
    return OutcomeBatch(np.zeros(n, np.int8), np.asarray(ta, float), np.asarray(tb, float),
                        np.full(n, np.nan), np.zeros(n, np.int8), np.full(n, np.nan), np.zeros(n, bool))


def test_detector_validation():
    with pytest.raises(ValueError):
        DetectorSpec(efficiency=1.2)
    with pytest.raises(ValueError):
        DetectorSpec(dark_rate=-1)


def test_ideal_detector_quantises_exactly():
    t = np.array([1e-9, 5.001e-9, 7.3e-9])
    s = detect_batch(outcome_batch(t, t + 2e-9), IDEAL, IDEAL, make_rng(1))
    np.testing.assert_array_equal(s.channel_ticks(0), np.rint(t / 4e-12).astype(np.int64))
    np.testing.assert_array_equal(s.channel_ticks(1), np.rint((t + 2e-9) / 4e-12).astype(np.int64))
    one = detect(PathOutcome(Path.SS, 4e-9, 8e-9, 0.0, False), IDEAL, IDEAL, make_rng(2))
    assert [(r.channel, r.timestamp_ticks) for r in one] == [(0, 1000), (1, 2000)]
    assert detect(None, IDEAL, IDEAL, make_rng(3)) == []


def test_dead_time_drops_close_tag():
    assert list(apply_dead_time(np.array([100, 101]), 8e-12)) == [100]
    assert list(apply_dead_time(np.array([100, 102, 103]), 8e-12)) == [100, 102]
    # non-paralysable: a dropped tag does not extend the dead window
    assert list(apply_dead_time(np.array([0, 3, 5, 6]), 20e-12)) == [0, 5]


def test_efficiency_product_rule():
    n = 400_000
    t = np.arange(n) * 1e-6
    spec = DetectorSpec(efficiency=0.65, jitter_std=0.0, dead_time=0.0, dark_rate=0.0)
    s = detect_batch(outcome_batch(t, t), spec, spec, make_rng(4))
    both = np.intersect1d(s.channel_ticks(0), s.channel_ticks(1)).size / n
    assert abs(both - 0.65 ** 2) < 5 * math.sqrt(0.4225 * 0.5775 / n)


def test_jitter_width():
    t = np.arange(200_000) * 1e-6
    spec = DetectorSpec(efficiency=1.0, jitter_std=350e-12, dead_time=0.0, dark_rate=0.0)
    s = detect_batch(outcome_batch(t, t), spec, IDEAL, make_rng(5))
    lag = (np.sort(s.channel_ticks(0)) - np.rint(t / 4e-12).astype(np.int64)) * 4e-12
    assert lag.std() == pytest.approx(350e-12, rel=0.02)


@pytest.mark.parametrize("seed", range(25))
def test_sweep_equals_brute_force(seed):
    rng = np.random.default_rng(seed)
    s = random_stream(rng, int(rng.integers(0, 600)), int(rng.integers(10, 50_000)))
    bw = int(rng.integers(1, 40))
    lag = int(rng.integers(0, 3000))
    h = build_histogram(s, bw, lag)
    np.testing.assert_array_equal(h.counts, brute_histogram(s.channel_ticks(0), s.channel_ticks(1), bw, lag))


@settings(max_examples=40, deadline=None)
@given(a=st.lists(st.integers(0, 5000), max_size=60), b=st.lists(st.integers(0, 5000), max_size=60),
       bw=st.integers(1, 50), lag=st.integers(0, 2000))
def test_sweep_equals_brute_force_property(a, b, bw, lag):
    a, b = np.sort(np.array(a, np.int64)), np.sort(np.array(b, np.int64))
    h = build_histogram(TagStream.from_channels(a, b), bw, lag)
    np.testing.assert_array_equal(h.counts, brute_histogram(a, b, bw, lag))
    assert h.total() <= a.size * b.size


def test_empty_stream():
    h = build_histogram(TagStream.empty(), 1, 100)
    assert h.total() == 0 and h.counts.size == 201


def test_unsorted_stream_rejected():
    with pytest.raises(ValueError):
        build_histogram(TagStream.from_channels([5, 1], [2]), 1, 10)


def test_window_operations():
    counts = np.zeros(1001, np.int64)
    # synthetic peaks at -2 ns, 0 and +2 ns (500 ticks)
    counts[500 - 500] = 7
    counts[500] = 11
    counts[500 + 500] = 13
    counts[500 + 80] = 3
    h = CoincidenceHistogram(1, 500, counts)
    assert integrate_window(h, 0, 500) == h.total()
    assert integrate_window(h, 0, 85) == 14  # 680 ps window excludes side peaks
    assert integrate_window(h, 0, 0) == 11
    with pytest.raises(ValueError):
        integrate_window(h, 450, 85)
    assert tagger.window_ticks(680e-12) == 85


def test_probabilistic_run_has_three_peak_groups():
    cfg = InterferometerConfig(arm_transmission=1.0)
    pairs = sample_pairs(SourceConfig(2e5, LAB), make_rng(6), duration=0.5)
    out = traverse_batch(cfg, LAB, pairs, make_rng(7))
    det = DetectorSpec(efficiency=1.0, jitter_std=100e-12, dead_time=0.0, dark_rate=0.0)
    s = detect_batch(out, det, det, make_rng(8))
    h = build_histogram(s, 25, 1000)
    c = h.centers * 4e-12
    groups = [h.counts[np.abs(c - x) < 0.5e-9].sum() for x in (-2e-9, 0.0, 2e-9)]
    assert all(g > 0 for g in groups)
    assert h.counts[(np.abs(c) > 0.8e-9) & (np.abs(c) < 1.2e-9)].sum() < 0.01 * sum(groups)


def test_deterministic_run_single_peak():
    from fransonsim.source import Splitting
    cfg = InterferometerConfig(arm_transmission=1.0, splitting=Splitting.TYPE_II_DETERMINISTIC)
    pairs = sample_pairs(SourceConfig(2e4, LAB, Splitting.TYPE_II_DETERMINISTIC), make_rng(9), duration=2.0)
    out = traverse_batch(cfg, LAB, pairs, make_rng(10))
    det = DetectorSpec(efficiency=1.0, jitter_std=100e-12, dead_time=0.0, dark_rate=0.0)
    h = build_histogram(detect_batch(out, det, det, make_rng(11)), 25, 1000)
    c = h.centers * 4e-12
    centre = h.counts[np.abs(c) < 0.5e-9].sum()
    side = h.counts[np.abs(np.abs(c) - 2e-9) < 0.5e-9].sum()
    assert centre > 300
    assert side < 0.005 * centre  # only inter-pair accidentals remain


def test_dark_counts_flat_background():
    dur = 20.0
    spec = DetectorSpec(efficiency=1.0, jitter_std=0.0, dead_time=0.0, dark_rate=2e4)
    s = detect_batch(outcome_batch([], []), spec, spec, make_rng(12), duration=dur)
    bw = 250
    h = build_histogram(s, bw, 100_000)
    expect = 2e4 * 2e4 * bw * 4e-12 * dur
    inner = h.counts[1:-1]
    assert inner.mean() == pytest.approx(expect, rel=0.05)
    assert inner.var() / inner.mean() == pytest.approx(1.0, abs=0.25)


def test_background_and_offset():
    spec = DetectorSpec(efficiency=1.0, jitter_std=0.0, dead_time=0.0, dark_rate=0.0)
    s = detect_batch(outcome_batch([1e-9], [1e-9]), spec, spec, make_rng(13), offset_ticks=10,
                     background=(np.array([2e-9]), np.array([])))
    assert list(s.channel_ticks(0)) == [260, 510]
    assert list(s.channel_ticks(1)) == [260]


def test_poisson_times():
    t = tagger.poisson_times(1e4, 10.0, make_rng(14))
    assert np.all(np.diff(t) >= 0) and t[0] >= 0 and t[-1] < 10.0
    assert t.size == pytest.approx(1e5, rel=0.02)
    assert tagger.poisson_times(0.0, 1.0, make_rng(15)).size == 0


def test_tag_file_roundtrip(tmp_path):
    rng = np.random.default_rng(3)
    s = random_stream(rng, 5000, 10 ** 12)
    p = tmp_path / "x.tags"
    write_tags(p, s)
    raw = p.read_bytes()
    assert raw[:8] == b"FRTAGS01"
    assert int.from_bytes(raw[8:12], "little") == 4000
    assert len(raw) == 12 + 9 * 5000
    # first record: channel byte then little-endian u64 ticks
    assert raw[12] == s.channel[0]
    assert int.from_bytes(raw[13:21], "little") == s.ticks[0]
    back = read_tags(p)
    assert back == s
    assert np.array_equal(back.channel, s.channel) and np.array_equal(back.ticks, s.ticks)


def test_tag_file_rejects_bad_header(tmp_path):
    p = tmp_path / "bad.tags"
    p.write_bytes(b"NOTATAGFILE!")
    with pytest.raises(ValueError):
        read_tags(p)
    p.write_bytes(b"FRTAGS01" + (1000).to_bytes(4, "little"))
    with pytest.raises(ValueError):
        read_tags(p)


def test_merged_order_and_records():
    s = TagStream.from_channels([5, 9], [5, 7])
    assert list(s.ticks) == [5, 5, 7, 9] and list(s.channel) == [0, 1, 1, 0]
    assert s.records()[1].channel == 1 and len(s) == 4 and s.counts() == (2, 2)


def test_histogram_csv(tmp_path):
    h = build_histogram(TagStream.from_channels([0], [3]), 2, 4)
    p = tmp_path / "h.csv"
    h.to_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0] == "lag_ticks,count"
    assert "4,1" in lines
    assert h.bins == {4: 1}


def test_throughput_smoke():
    import time
    rng = np.random.default_rng(0)
    n = 2_000_000
    a = np.sort(rng.integers(0, n * 25_000, n // 2))
    b = np.sort(rng.integers(0, n * 25_000, n // 2))
    s = TagStream.from_channels(a, b)
    build_histogram(s, 1, 2500)
    t = time.perf_counter()
    build_histogram(s, 1, 2500)
    assert time.perf_counter() - t < 1.0
