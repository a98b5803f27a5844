"""Detectors, time-tag streams and coincidence histograms.

All timestamps are integer ticks of 4 ps. Detection applies efficiency,
Gaussian jitter, quantisation, dark counts and a non-paralysable dead time,
in that order. Histograms are built with a two-pointer sweep (numba).
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numba
import numpy as np

TICK_S = 4e-12
TICK_FS = 4000
CHANNEL_A, CHANNEL_B = 0, 1
MAGIC = b"FRTAGS01"
RECORD_DTYPE = np.dtype([("channel", "u1"), ("ticks", "<u8")])  # packed, 9 bytes


@dataclass(frozen=True)
class DetectorSpec:
    efficiency: float = 0.65
    jitter_std: float = 350e-12
    dead_time: float = 22e-9
    dark_rate: float = 100.0

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError("efficiency must lie in [0, 1]")
        if min(self.jitter_std, self.dead_time, self.dark_rate) < 0:
            raise ValueError("jitter, dead time and dark rate must be >= 0")


@dataclass(frozen=True)
class TagRecord:
    channel: int
    timestamp_ticks: int


class TagStream:
    """Two-channel stream. Holds the per-channel sorted tick arrays; the
    merged (ticks, channel)-ordered view is built on demand."""

    def __init__(self, channel, ticks):
        channel = np.asarray(channel, dtype=np.uint8)
        ticks = np.asarray(ticks, dtype=np.int64)
        self.a = ticks[channel == CHANNEL_A]
        self.b = ticks[channel == CHANNEL_B]
        self._merged = None

    @classmethod
    def from_channels(cls, ticks_a, ticks_b) -> "TagStream":
        out = cls.__new__(cls)
        out.a = np.asarray(ticks_a, np.int64)
        out.b = np.asarray(ticks_b, np.int64)
        out._merged = None
        return out

    @classmethod
    def empty(cls) -> "TagStream":
        return cls.from_channels(np.zeros(0, np.int64), np.zeros(0, np.int64))

    def _merge(self):
        if self._merged is None:
            ticks = np.concatenate([self.a, self.b])
            ch = np.concatenate([np.zeros(self.a.size, np.uint8), np.ones(self.b.size, np.uint8)])
            order = np.argsort(ticks, kind="stable")  # ties keep A before B
            self._merged = (ch[order], ticks[order])
        return self._merged

    @property
    def channel(self) -> np.ndarray:
        return self._merge()[0]

    @property
    def ticks(self) -> np.ndarray:
        return self._merge()[1]

    def __len__(self):
        return self.a.size + self.b.size

    def channel_ticks(self, ch: int) -> np.ndarray:
        return self.a if ch == CHANNEL_A else self.b

    def counts(self) -> tuple[int, int]:
        return int(self.a.size), int(self.b.size)

    def records(self):
        return [TagRecord(int(c), int(t)) for c, t in zip(self.channel, self.ticks)]

    def __eq__(self, other):
        return (isinstance(other, TagStream) and np.array_equal(self.a, other.a)
                and np.array_equal(self.b, other.b))


def to_ticks(t_seconds) -> np.ndarray:
    return np.rint(np.asarray(t_seconds, dtype=float) / TICK_S).astype(np.int64)


@numba.njit(cache=True)
def _dead_time_mask(ticks, dead_ticks):
    keep = np.ones(ticks.size, np.bool_)
    if dead_ticks <= 0:
        return keep
    last = np.int64(0)
    have = False
    for k in range(ticks.size):
        if have and ticks[k] - last < dead_ticks:
            keep[k] = False
        else:
            last = ticks[k]
            have = True
    return keep


def apply_dead_time(ticks: np.ndarray, dead_time: float) -> np.ndarray:
    """Drop tags within ``dead_time`` of the previous recorded tag (sorted input)."""
    return ticks[_dead_time_mask(np.asarray(ticks, np.int64), int(round(dead_time / TICK_S)))]


def dark_counts(spec: DetectorSpec, duration: float, rng: np.random.Generator) -> np.ndarray:
    n = rng.poisson(spec.dark_rate * duration) if spec.dark_rate > 0 else 0
    return rng.uniform(0.0, duration, size=n)


def poisson_times(rate: float, duration: float, rng: np.random.Generator) -> np.ndarray:
    """Sorted arrival times of a homogeneous Poisson process on [0, duration)."""
    n = rng.poisson(rate * duration) if rate > 0 and duration > 0 else 0
    if n == 0:
        return np.zeros(0)
    gaps = rng.exponential(1.0, size=n + 1)
    t = np.cumsum(gaps)
    return t[:-1] * (duration / t[-1])  # uniform order statistics


def _channel_ticks(arrivals, spec: DetectorSpec, rng, duration, offset_ticks, background=None):
    arrivals = np.asarray(arrivals, float)
    if spec.efficiency < 1.0:
        arrivals = arrivals[rng.random(arrivals.size) < spec.efficiency]
    if spec.jitter_std > 0:
        arrivals = arrivals + spec.jitter_std * rng.standard_normal(arrivals.size)
    ticks = np.maximum(to_ticks(arrivals), 0)
    extra = []
    if duration is not None:
        extra.append(dark_counts(spec, duration, rng))
    if background is not None:
        extra.append(np.asarray(background, float))
    if extra:
        ticks = np.concatenate([ticks, np.maximum(to_ticks(np.concatenate(extra)), 0)])
    ticks = np.sort(ticks, kind="stable") + offset_ticks
    return apply_dead_time(ticks, spec.dead_time)


def detect_batch(outcomes, spec_a: DetectorSpec, spec_b: DetectorSpec, rng: np.random.Generator,
                 duration: float | None = None, offset_ticks: int = 0,
                 background=None) -> TagStream:
    """Turn interferometer outcomes into a tag stream.

    With ``duration`` given, dark counts are added uniformly over
    ``[0, duration)``. ``background`` is an optional pair of already-detected
    arrival-time arrays (A, B), e.g. photons whose partner was lost, that
    skip efficiency and jitter. ``offset_ticks`` shifts the whole block onto
    the run's virtual clock.
    """
    bg_a, bg_b = (None, None) if background is None else background
    ta = _channel_ticks(outcomes.arrivals(CHANNEL_A), spec_a, rng, duration, offset_ticks, bg_a)
    tb = _channel_ticks(outcomes.arrivals(CHANNEL_B), spec_b, rng, duration, offset_ticks, bg_b)
    return TagStream.from_channels(ta, tb)


def detect(outcome, spec_a: DetectorSpec, spec_b: DetectorSpec, rng: np.random.Generator) -> list[TagRecord]:
    """Zero, one or two tags for a single :class:`PathOutcome` (no darks)."""
    if outcome is None:
        return []
    times = {CHANNEL_A: [], CHANNEL_B: []}
    if outcome.detector_a_time is not None:
        times[CHANNEL_A].append(outcome.detector_a_time)
    if outcome.detector_b_time is not None:
        times[CHANNEL_B].append(outcome.detector_b_time)
    if outcome.extra_time is not None:
        # same-detector events land on whichever channel is populated
        times[CHANNEL_A if outcome.detector_a_time is not None else CHANNEL_B].append(outcome.extra_time)
    out = []
    for ch, spec in ((CHANNEL_A, spec_a), (CHANNEL_B, spec_b)):
        ticks = _channel_ticks(times[ch], spec, rng, None, 0)
        out.extend(TagRecord(ch, int(t)) for t in ticks)
    return sorted(out, key=lambda r: (r.timestamp_ticks, r.channel))


# ---------------------------------------------------------------- histograms

@dataclass
class CoincidenceHistogram:
    """Counts of t_B - t_A, binned around centres ``k * bin_width_ticks``."""

    bin_width_ticks: int
    max_lag_ticks: int
    counts: np.ndarray
    window_center: int = 0
    window_halfwidth: int = 0

    @property
    def centers(self) -> np.ndarray:
        half = (len(self.counts) - 1) // 2
        return (np.arange(len(self.counts)) - half) * self.bin_width_ticks

    @property
    def bins(self) -> dict[int, int]:
        return {int(c): int(n) for c, n in zip(self.centers, self.counts) if n}

    def total(self) -> int:
        return int(self.counts.sum())

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("lag_ticks,count\n")
            for c, n in zip(self.centers, self.counts):
                fh.write(f"{c},{n}\n")


@numba.njit(cache=True)
def _sweep(a, b, max_lag, bw, half):
    counts = np.zeros(2 * half + 1, np.int64)
    lo = 0
    nb = b.size
    for i in range(a.size):
        ta = a[i]
        while lo < nb and b[lo] < ta - max_lag:
            lo += 1
        k = lo
        while k < nb and b[k] <= ta + max_lag:
            lag = b[k] - ta
            counts[(lag + bw // 2) // bw + half] += 1
            k += 1
    return counts


def _half_bins(max_lag_ticks, bin_width_ticks):
    return (max_lag_ticks + bin_width_ticks // 2) // bin_width_ticks


def _check_sorted(x):
    if x.size > 1 and np.any(np.diff(x) < 0):
        raise ValueError("tag stream is not time-sorted per channel")


def build_histogram(stream: TagStream, bin_width_ticks: int = 1, max_lag_ticks: int = 2500,
                    ticks_a=None, ticks_b=None) -> CoincidenceHistogram:
    """Histogram all A-B pairings with ``|t_B - t_A| <= max_lag_ticks``.

    Linear in stream length plus number of pairings. Pre-split channel
    arrays may be passed to skip the split.
    """
    if bin_width_ticks < 1 or max_lag_ticks < 0:
        raise ValueError("bin width must be >= 1 and max lag >= 0")
    a = stream.channel_ticks(CHANNEL_A) if ticks_a is None else np.asarray(ticks_a, np.int64)
    b = stream.channel_ticks(CHANNEL_B) if ticks_b is None else np.asarray(ticks_b, np.int64)
    _check_sorted(a)
    _check_sorted(b)
    half = _half_bins(max_lag_ticks, bin_width_ticks)
    counts = _sweep(a, b, np.int64(max_lag_ticks), np.int64(bin_width_ticks), np.int64(half))
    return CoincidenceHistogram(bin_width_ticks, max_lag_ticks, counts)


def integrate_window(h: CoincidenceHistogram, center_ticks: int = 0, halfwidth_ticks: int = 85) -> int:
    """Sum of bins whose centres lie in ``[center - halfwidth, center + halfwidth]``."""
    if halfwidth_ticks < 0:
        raise ValueError("halfwidth must be >= 0")
    c = h.centers
    if center_ticks - halfwidth_ticks < c[0] or center_ticks + halfwidth_ticks > c[-1]:
        raise ValueError("window outside histogram range")
    sel = np.abs(c - center_ticks) <= halfwidth_ticks
    return int(h.counts[sel].sum())


def window_ticks(width_s: float) -> int:
    """Half-width in ticks of a full coincidence window of ``width_s`` seconds."""
    return int(round(width_s / TICK_S / 2))


# ---------------------------------------------------------------- file I/O

def write_tags(path, stream: TagStream):
    rec = np.empty(len(stream), dtype=RECORD_DTYPE)
    rec["channel"] = stream.channel
    rec["ticks"] = stream.ticks.astype(np.uint64)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", TICK_FS))
        fh.write(rec.tobytes())


def read_tags(path) -> TagStream:
    with open(path, "rb") as fh:
        head = fh.read(12)
        if len(head) < 12 or head[:8] != MAGIC:
            raise ValueError(f"{path}: not a tag file")
        (tick_fs,) = struct.unpack("<I", head[8:])
        if tick_fs != TICK_FS:
            raise ValueError(f"{path}: unsupported tick size {tick_fs} fs")
        rec = np.frombuffer(fh.read(), dtype=RECORD_DTYPE)
    return TagStream(rec["channel"].copy(), rec["ticks"].astype(np.int64))
