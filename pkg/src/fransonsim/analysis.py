"""Fringe scans, local-extrema contrast and entanglement-witness decisions."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

CHSH_THRESHOLD = 1.0 / math.sqrt(2.0)
CHAINED_THRESHOLD = 0.946

# how far (in steps) beyond or inside the boundary an edge turning point may sit
ENDPOINT_REACH = 3.0
EDGE_VERTEX_SLACK = 1.5

SCAN_COLUMNS = ("phase_rad", "window_count", "singles_a", "singles_b", "integration_s")


class NoFringeError(ValueError):
    """Raised when a scan has no usable max/min structure."""

    def __init__(self, message="no fringe detected"):
        super().__init__(message)


@dataclass
class FringeScan:
    phase: np.ndarray
    window_count: np.ndarray
    singles_a: np.ndarray
    singles_b: np.ndarray
    integration_time: np.ndarray

    def __post_init__(self):
        self.phase = np.asarray(self.phase, dtype=float)
        n = self.phase.size
        self.window_count = np.asarray(self.window_count, dtype=np.int64)
        self.singles_a = np.asarray(self.singles_a, dtype=np.int64)
        self.singles_b = np.asarray(self.singles_b, dtype=np.int64)
        self.integration_time = np.broadcast_to(np.asarray(self.integration_time, float), (n,)).copy()
        if n < 8:
            raise ValueError("a fringe scan needs at least 8 steps")
        if any(len(x) != n for x in (self.window_count, self.singles_a, self.singles_b)):
            raise ValueError("scan columns differ in length")
        d = np.diff(self.phase)
        if not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("phase settings must be strictly monotone")
        if min(self.window_count.min(), self.singles_a.min(), self.singles_b.min()) < 0:
            raise ValueError("counts must be >= 0")

    def __len__(self):
        return self.phase.size

    def scaled(self, factor: float) -> "FringeScan":
        """Counts multiplied by ``factor`` (rounded), for rate-invariance checks."""
        r = lambda x: np.rint(x * factor).astype(np.int64)  # noqa: E731
        return FringeScan(self.phase, r(self.window_count), r(self.singles_a), r(self.singles_b),
                          self.integration_time * factor)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SCAN_COLUMNS)
            for row in zip(self.phase, self.window_count, self.singles_a, self.singles_b,
                           self.integration_time):
                w.writerow([repr(float(row[0])), int(row[1]), int(row[2]), int(row[3]), repr(float(row[4]))])

    @classmethod
    def from_csv(cls, path) -> "FringeScan":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        col = lambda k, t: np.array([t(r[k]) for r in rows])  # noqa: E731
        return cls(col("phase_rad", float), col("window_count", int), col("singles_a", int),
                   col("singles_b", int), col("integration_s", float))


@dataclass
class Extrema:
    indices: list
    is_max: list

    def __len__(self):
        return len(self.indices)


@dataclass
class ContrastResult:
    contrast: float
    uncertainty: float
    local_contrasts: list = field(default_factory=list)
    local_uncertainties: list = field(default_factory=list)
    extrema_indices: list = field(default_factory=list)
    # plain quadrature of local sigmas divided by count; ignores shared extrema
    quadrature_uncertainty: float = float("nan")
    # scan-to-scan standard error, only set by combine_scans
    scatter: float = float("nan")
    n_scans: int = 1

    def __str__(self):
        return format_percent(self.contrast, self.uncertainty)


def smooth(y, halfwidth: int):
    """Centred moving average; the window shrinks at the edges."""
    y = np.asarray(y, dtype=float)
    if halfwidth <= 0:
        return y.copy()
    k = np.ones(2 * halfwidth + 1)
    return np.convolve(y, k, mode="same") / np.convolve(np.ones_like(y), k, mode="same")


def _zigzag(s, delta):
    """Alternating interior extrema whose swing exceeds ``delta``."""
    n = s.size
    # direction of the first significant move
    k = 1
    while k < n and abs(s[k] - s[0]) <= delta:
        k += 1
    if k == n:
        return [], []
    idx, kind = [], []
    # a turn before the first move counts only if it is confirmed on both sides
    if s[k] > s[0]:
        j = int(np.argmin(s[:k + 1]))
        if 0 < j and s[0] - s[j] > delta:
            idx.append(j)
            kind.append(False)
        look_max, pos = True, k
    else:
        j = int(np.argmax(s[:k + 1]))
        if 0 < j and s[j] - s[0] > delta:
            idx.append(j)
            kind.append(True)
        look_max, pos = False, k
    for i in range(k, n):
        if look_max:
            if s[i] > s[pos]:
                pos = i
            elif s[i] < s[pos] - delta:
                idx.append(pos)
                kind.append(True)
                look_max, pos = False, i
        else:
            if s[i] < s[pos]:
                pos = i
            elif s[i] > s[pos] + delta:
                idx.append(pos)
                kind.append(False)
                look_max, pos = True, i
    return idx, kind


def _endpoint_kind(y, at_start: bool, width: int, reach: float = ENDPOINT_REACH):
    """'max'/'min' (True/False) if a local quadratic puts the turning point
    within ``reach`` steps of the boundary, else None."""
    seg = np.asarray(y[:width] if at_start else y[-width:][::-1], dtype=float)
    if seg.size < 3:
        return None
    x = np.arange(seg.size, dtype=float)
    a, b, _ = np.polyfit(x, seg, 2)
    if a == 0:
        return None
    vertex = -b / (2 * a)
    if abs(vertex) > reach:
        return None
    if a < 0 and seg[0] >= seg[min(int(reach) + 1, seg.size - 1)]:
        return True
    if a > 0 and seg[0] <= seg[min(int(reach) + 1, seg.size - 1)]:
        return False
    return None


def find_extrema(scan, smoothing_halfwidth: int = 3, min_swing=None) -> Extrema:
    """Alternating maxima/minima of the smoothed window counts.

    ``min_swing`` is the hysteresis a turn must exceed to count (default:
    a quarter of the smoothed range or three times the smoothed shot noise,
    whichever is larger). Endpoints are kept only when the fringe visibly
    turns there.
    """
    y = np.asarray(scan.window_count if isinstance(scan, FringeScan) else scan, dtype=float)
    s = smooth(y, smoothing_halfwidth)
    noise = math.sqrt(max(float(np.mean(s)), 1.0) / (2 * smoothing_halfwidth + 1))
    if min_swing is None:
        min_swing = max(0.25 * float(s.max() - s.min()), 3.0 * noise)
    idx, kind = _zigzag(s, min_swing)
    if not idx:
        raise NoFringeError()
    width = max(2 * smoothing_halfwidth + 3, 5)
    span = float(s.max() - s.min())

    def level_ok(end, is_max):
        # an endpoint extremum must reach the level of the interior ones,
        # within the shot noise of a one-sided average
        ref = [s[i] for i, k in zip(idx, kind) if k == is_max]
        if not ref:
            return True
        level = min(ref) if is_max else max(ref)
        tol = 3.0 * math.sqrt(max(level, 1.0) / (smoothing_halfwidth + 1)) + 0.02 * span
        return s[end] >= level - tol if is_max else s[end] <= level + tol

    near = int(ENDPOINT_REACH) + 1

    def edge_pos(lo, hi, is_max):
        part = s[lo:hi]
        return lo + int(np.argmax(part) if is_max else np.argmin(part))

    def turned(pos, edge, is_max):
        # the sequence has come back from pos by more than the smoothed noise
        d = s[pos] - s[edge] if is_max else s[edge] - s[pos]
        return d > 3.0 * noise

    # head: an edge extremum, else a turn before the first confirmed one
    want = not kind[0]
    head = _endpoint_kind(y, True, width)
    pos = None
    if head is not None and head == want:
        pos = edge_pos(0, near, head)
    else:
        cand = edge_pos(0, idx[0], want)
        if 0 < cand and turned(cand, 0, want):
            pos = cand
    if pos is not None and pos < idx[0] and level_ok(pos, want):
        idx.insert(0, pos)
        kind.insert(0, want)
    # tail, mirrored
    want = not kind[-1]
    tail = _endpoint_kind(y, False, width)
    pos = None
    if tail is not None and tail == want:
        pos = edge_pos(y.size - near, y.size, tail)
    else:
        cand = edge_pos(idx[-1] + 1, y.size, want)
        if cand < y.size - 1 and turned(cand, y.size - 1, want):
            pos = cand
    if pos is not None and pos > idx[-1] and level_ok(pos, want):
        idx.append(pos)
        kind.append(want)
    if not (any(kind) and not all(kind)):
        raise NoFringeError()
    pos, inside = refine_positions(y, idx, kind)
    # an end extremum whose fitted vertex lies beyond the scan never turned
    for end in (-1, 0):
        if len(pos) > 2 and not inside[end]:
            del pos[end], kind[end], inside[end]
    if not (any(kind) and not all(kind)):
        raise NoFringeError()
    return Extrema(pos, kind)


def refine_positions(y, idx, kind):
    """Move each extremum to the vertex of a quadratic fitted to the raw
    counts within a third of the distance to its neighbours.

    The smoothed argmax wanders by several steps on a flat top; the fit
    pins it down, and since it spans many points the raw count read there
    is almost independent of the choice.
    """
    y = np.asarray(y, dtype=float)
    out, inside = [], []
    for n, (i, is_max) in enumerate(zip(idx, kind)):
        gaps = [abs(i - idx[m]) for m in (n - 1, n + 1) if 0 <= m < len(idx)]
        w = max(min(gaps) // 3, 0)
        lo, hi = max(i - w, 0), min(i + w, y.size - 1)
        if w < 3 or hi - lo < 4:
            out.append(i)
            inside.append(True)
            continue
        x = np.arange(lo, hi + 1, dtype=float) - i
        a, b, _ = np.polyfit(x, y[lo:hi + 1], 2)
        if (a < 0) != is_max or a == 0:
            out.append(i)
            inside.append(True)
            continue
        vertex = i - b / (2 * a)
        out.append(int(np.clip(round(vertex), lo, hi)))
        # a one-sided fit over a cosine top lands about a step outside the true vertex
        inside.append(-EDGE_VERTEX_SLACK <= vertex <= y.size - 1 + EDGE_VERTEX_SLACK)
    return out, inside


def local_contrast(big, small):
    """(M - m) / (M + m) with the Poisson one-sigma error."""
    big, small = float(big), float(small)
    tot = big + small
    if tot <= 0:
        raise ValueError("M + m must be > 0")
    c = (big - small) / tot
    sigma = 2.0 / tot ** 2 * math.sqrt(small ** 2 * big + big ** 2 * small)
    return c, sigma


def contrast(scan: FringeScan, smoothing_halfwidth: int = 3, extrema: Extrema | None = None) -> ContrastResult:
    """Average of local contrasts between neighbouring extrema.

    M and m are the raw counts at the located indices; the error of the
    mean is propagated from the Poisson variance of every distinct count,
    so neighbouring contrasts that share an extremum are handled correctly.
    """
    ext = find_extrema(scan, smoothing_halfwidth) if extrema is None else extrema
    y = scan.window_count
    local_c, local_s = [], []
    grad = {}
    pairs = list(zip(ext.indices[:-1], ext.indices[1:], ext.is_max[:-1]))
    for i, j, first_is_max in pairs:
        imax, imin = (i, j) if first_is_max else (j, i)
        big, small = float(y[imax]), float(y[imin])
        c, s = local_contrast(big, small)
        local_c.append(c)
        local_s.append(s)
        tot2 = (big + small) ** 2
        grad[imax] = grad.get(imax, 0.0) + 2.0 * small / tot2
        grad[imin] = grad.get(imin, 0.0) - 2.0 * big / tot2
    n = len(local_c)
    mean = float(np.mean(local_c))
    var = sum((g / n) ** 2 * float(y[k]) for k, g in grad.items())
    return ContrastResult(mean, math.sqrt(var), local_c, local_s, list(ext.indices),
                          quadrature_uncertainty=math.sqrt(sum(s * s for s in local_s)) / n)


def combine_scans(results) -> ContrastResult:
    """Mean contrast over scans; sigma = sqrt(sum sigma_i**2) / n."""
    results = list(results)
    if not results:
        raise ValueError("no scans to combine")
    n = len(results)
    c = np.array([r.contrast for r in results])
    sig = math.sqrt(sum(r.uncertainty ** 2 for r in results)) / n
    quad = math.sqrt(sum(r.quadrature_uncertainty ** 2 for r in results)) / n
    scatter = float(np.std(c, ddof=1) / math.sqrt(n)) if n > 1 else float("nan")
    return ContrastResult(float(c.mean()), sig,
                          [x for r in results for x in r.local_contrasts],
                          [x for r in results for x in r.local_uncertainties],
                          [x for r in results for x in r.extrema_indices],
                          quadrature_uncertainty=quad, scatter=scatter, n_scans=n)


def format_percent(value: float, sigma: float) -> str:
    """Percent with one-digit parenthetical uncertainty: 0.951, 0.005 -> '95.1(5)'."""
    v, s = 100.0 * value, 100.0 * sigma
    if not (s > 0 and math.isfinite(s)):
        return f"{v:.1f}"
    exp = math.floor(math.log10(s))
    s_round = round(s, -exp)
    exp = math.floor(math.log10(s_round))  # 0.96 rounds up to 1
    decimals = max(-exp, 0)
    digit = int(round(s_round / 10.0 ** exp)) * (10 ** max(exp, 0))
    return f"{v:.{decimals}f}({digit})"


def singles_modulation(singles) -> float:
    s = np.asarray(singles, dtype=float)
    m = s.mean()
    return float((s.max() - s.min()) / m) if m > 0 else float("inf")


@dataclass(frozen=True)
class WitnessVerdict:
    chsh_witnessed: bool
    chained_witnessed: bool
    singles_flat: bool
    notes: str = ""
    chsh_point: bool = False
    chained_point: bool = False


def witness(result: ContrastResult, scan=None, singles_tolerance: float = 0.05) -> WitnessVerdict:
    """Conservative (contrast - 1 sigma) decision against the 1/sqrt(2) and
    chained-inequality thresholds, plus the point-estimate decision.

    ``scan`` may be one FringeScan or a list; singles are flat when the
    peak-to-peak modulation over the mean is within ``singles_tolerance``
    on both channels of every scan.
    """
    low = result.contrast - result.uncertainty
    chsh = low > CHSH_THRESHOLD
    chained = low > CHAINED_THRESHOLD
    scans = [] if scan is None else ([scan] if isinstance(scan, FringeScan) else list(scan))
    mods = [max(singles_modulation(s.singles_a), singles_modulation(s.singles_b)) for s in scans]
    flat = bool(scans) and max(mods) <= singles_tolerance
    notes = [f"contrast {format_percent(result.contrast, result.uncertainty)}%"]
    if mods:
        notes.append(f"max singles modulation {max(mods):.3f}")
    else:
        notes.append("singles not checked")
    return WitnessVerdict(chsh, chained, flat, "; ".join(notes),
                          result.contrast > CHSH_THRESHOLD, result.contrast > CHAINED_THRESHOLD)


def efficiency_visibility_bound(det_efficiency: float) -> float:
    """Visibility needed to violate CHSH at overall detection efficiency mu."""
    if det_efficiency <= 0:
        raise ValueError("efficiency must be > 0")
    return (2.0 / det_efficiency - 1.0) / math.sqrt(2.0)


def required_efficiency(visibility: float = 1.0) -> float:
    """Inverse of :func:`efficiency_visibility_bound`."""
    return 2.0 / (math.sqrt(2.0) * visibility + 1.0)


def cosine_fit_contrast(scan: FringeScan, cycles_guess: float | None = None) -> tuple[float, float]:
    """Diagnostic only: visibility from a least-squares cosine fit.

    Returns ``(visibility, sigma)``. Drifting fringes bias this estimator,
    which is why :func:`contrast` is the primary one.
    """
    from scipy.optimize import curve_fit

    x = np.arange(len(scan), dtype=float)
    y = scan.window_count.astype(float)
    if cycles_guess is None:
        spec = np.abs(np.fft.rfft(y - y.mean()))
        cycles_guess = max(int(np.argmax(spec[1:]) + 1), 1)
    k0 = 2 * np.pi * cycles_guess / len(x)

    def model(x, a, v, k, p):
        return a * (1 + v * np.cos(k * x + p))

    best = None
    for p0 in np.linspace(0, 2 * np.pi, 8, endpoint=False):
        try:
            popt, pcov = curve_fit(model, x, y, p0=[y.mean(), 0.9, k0, p0],
                                   sigma=np.sqrt(np.maximum(y, 1.0)), maxfev=5000)
        except RuntimeError:
            continue
        r = np.sum((model(x, *popt) - y) ** 2 / np.maximum(y, 1.0))
        if best is None or r < best[0]:
            best = (r, popt, pcov)
    if best is None:
        raise NoFringeError("cosine fit failed")
    _, popt, pcov = best
    return abs(float(popt[1])), float(math.sqrt(max(pcov[1, 1], 0.0)))
