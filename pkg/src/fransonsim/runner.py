"""End-to-end runs: scenario files, the 3-scan schedule, artifacts and report rows.

A scenario is a YAML document (``schema_version: 1``). Each phase step
simulates ``integration_s`` of virtual time. Pairs whose two photons both
reach the analysis optics go through the full medium, interferometer and
detector models; photons whose partner was lost earlier (coupling, detector
efficiency) are drawn directly as a Poisson background per channel, which
is the same process in distribution and keeps a step near 10^6 tags cheap.
"""
from __future__ import annotations

import copy
import csv
import io
import json
import math
import os
from dataclasses import dataclass, field, replace
from importlib import resources

import numpy as np
import yaml
from scipy.special import erf

from . import analysis, tagger
from .interferometer import (InterferometerConfig, PhaseDriftModel, analytic_visibility,
                             misalignment_leak, regime_check, traverse_batch)
from .medium import MediumSpec, load_presets, mean_transmission, survives
from .source import JointSpectrum, SourceConfig, Splitting, make_rng, sample_pairs

SCHEMA_VERSION = 1
DRIFT_GRID_S = 1.0
REPORT_COLUMNS = ("sample", "thickness_um", "singles_a_1e4", "singles_b_1e4", "max_coinc",
                  "int_time", "contrast", "contrast_value", "sigma", "quadrature_sigma",
                  "scatter", "chsh_witnessed", "chained_witnessed", "singles_flat", "status", "notes")

_SPLITTING = {"type_i": Splitting.TYPE_I_PROBABILISTIC, "type_ii": Splitting.TYPE_II_DETERMINISTIC}


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class ScanPlan:
    steps: int = 180
    phase_range: tuple = (0.0, math.pi / 2)
    # (scanned arm, held setting of the other arm), applied in order
    scans: tuple = (("A", 0.0), ("A", math.pi / 2), ("B", math.pi / 2))
    integration_time_per_step: float = 10.0
    # optical phase per unit of waveplate setting
    phase_gain: float = 6.0

    def __post_init__(self):
        if self.steps < 8:
            raise ScenarioError("steps must be >= 8")
        if not self.integration_time_per_step > 0:
            raise ScenarioError("integration time must be > 0")
        if not self.phase_range[1] > self.phase_range[0]:
            raise ScenarioError("phase_range must be increasing")
        for arm, _ in self.scans:
            if arm not in ("A", "B"):
                raise ScenarioError(f"scanned arm must be A or B, got {arm!r}")

    def settings(self) -> np.ndarray:
        return np.linspace(self.phase_range[0], self.phase_range[1], self.steps)


@dataclass(frozen=True)
class Outputs:
    tags: bool = False
    histograms: bool = False


@dataclass(frozen=True)
class Scenario:
    name: str
    source: SourceConfig
    medium: MediumSpec | None
    interferometer: InterferometerConfig
    detectors: tuple
    scan: ScanPlan = field(default_factory=ScanPlan)
    outputs: Outputs = field(default_factory=Outputs)
    seed: int = 0
    extra_loss: tuple = (1.0, 1.0)
    window_s: float = 680e-12
    max_lag_ticks: int = 1000
    feasibility_floor: float = 0.7  # predicted max coincidences per second
    smoothing_halfwidth: int = 3
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if any(not 0.0 <= x <= 1.0 for x in self.extra_loss):
            raise ScenarioError("extra_loss factors must lie in [0, 1]")
        if len(self.detectors) != 2:
            raise ScenarioError("need exactly two detectors")

    @property
    def thickness_um(self) -> float:
        return 0.0 if self.medium is None else self.medium.thickness * 1e4

    @property
    def sample_name(self) -> str:
        return "No Sample" if self.medium is None else self.medium.name


# ---------------------------------------------------------------- loading

def _get(d, key, default=None, required=False):
    if d is None or key not in d:
        if required:
            raise ScenarioError(f"missing key {key!r}")
        return default
    return d[key]


def scenario_from_dict(raw: dict) -> Scenario:
    if _get(raw, "schema_version") != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported schema_version {raw.get('schema_version')!r}")
    src = _get(raw, "source", required=True)
    sp = _get(src, "spectrum", {}) or {}
    spectrum = JointSpectrum.from_lab_parameters(
        pump_wavelength_nm=float(_get(sp, "pump_wavelength_nm", 405.0)),
        coherence_length_m=float(_get(sp, "coherence_length_m", 25.0)),
        filter_width_nm=float(_get(sp, "filter_width_nm", 3.1)))
    split_key = str(_get(src, "splitting", "type_i")).lower()
    if split_key not in _SPLITTING:
        raise ScenarioError(f"splitting must be one of {sorted(_SPLITTING)}")
    splitting = _SPLITTING[split_key]
    seed = int(_get(raw, "seed", 0))
    source = SourceConfig(float(_get(src, "pair_rate", required=True)), spectrum, splitting, seed)

    med = _get(raw, "medium")
    medium = None
    if med:
        if "preset" in med:
            presets = load_presets()
            if med["preset"] not in presets:
                raise ScenarioError(f"unknown medium preset {med['preset']!r}")
            base = presets[med["preset"]].spec
        else:
            base = MediumSpec(name=str(_get(med, "name", "sample")),
                              reduced_scattering=float(_get(med, "reduced_scattering", required=True)),
                              absorption=float(_get(med, "absorption", 0.0)),
                              anisotropy=float(_get(med, "anisotropy", 0.0)),
                              scatter_power=float(_get(med, "scatter_power", 0.0)),
                              reference_wavelength=float(_get(med, "reference_wavelength", 800.0)))
        medium = base.with_thickness(float(_get(med, "thickness_um", 0.0)) * 1e-4)

    it = _get(raw, "interferometer", {}) or {}
    dr = _get(it, "drift", {}) or {}
    interf = InterferometerConfig(
        delay_a=float(_get(it, "delay_a_ns", 2.0)) * 1e-9,
        delay_b=float(_get(it, "delay_b_ns", 2.0)) * 1e-9,
        waveplate_misalignment=float(_get(it, "waveplate_misalignment", 0.0)),
        splitting=splitting,
        drift=PhaseDriftModel(float(_get(dr, "random_walk_std", 0.0)),
                              float(_get(dr, "correlation_time", 60.0))),
        envelope=float(_get(it, "envelope", 1.0)),
        arm_transmission=float(_get(it, "arm_transmission", 0.65)))

    det = _get(raw, "detectors", {}) or {}

    def detector(d):
        d = d or {}
        return tagger.DetectorSpec(efficiency=float(_get(d, "efficiency", 0.65)),
                                   jitter_std=float(_get(d, "jitter_ps", 350.0)) * 1e-12,
                                   dead_time=float(_get(d, "dead_time_ns", 22.0)) * 1e-9,
                                   dark_rate=float(_get(d, "dark_rate", 100.0)))

    sc = _get(raw, "scan", {}) or {}
    scans = _get(sc, "schedule")
    plan = ScanPlan(steps=int(_get(sc, "steps", 180)),
                    phase_range=tuple(float(x) for x in _get(sc, "phase_range", (0.0, math.pi / 2))),
                    scans=ScanPlan.scans if scans is None else tuple((str(a), float(h)) for a, h in scans),
                    integration_time_per_step=float(_get(sc, "integration_s", 10.0)),
                    phase_gain=float(_get(sc, "phase_gain", 6.0)))
    out = _get(raw, "outputs", {}) or {}
    coup = _get(raw, "coupling", {}) or {}
    an = _get(raw, "analysis", {}) or {}
    return Scenario(
        name=str(_get(raw, "name", "scenario")), source=source, medium=medium,
        interferometer=interf, detectors=(detector(_get(det, "a")), detector(_get(det, "b"))),
        scan=plan, outputs=Outputs(bool(_get(out, "tags", False)), bool(_get(out, "histograms", False))),
        seed=seed,
        extra_loss=(float(_get(coup, "extra_loss_a", 1.0)), float(_get(coup, "extra_loss_b", 1.0))),
        window_s=float(_get(an, "window_ps", 680.0)) * 1e-12,
        max_lag_ticks=int(_get(an, "max_lag_ticks", 1000)),
        feasibility_floor=float(_get(an, "feasibility_floor", 0.7)),
        smoothing_halfwidth=int(_get(an, "smoothing_halfwidth", 3)),
        raw=copy.deepcopy(raw))


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ScenarioError(f"{path}: not a scenario document")
    return scenario_from_dict(raw)


def preset_names() -> list[str]:
    d = resources.files("fransonsim").joinpath("data/scenarios")
    return sorted(p.name[:-5] for p in d.iterdir() if p.name.endswith(".yaml"))


def load_preset(name: str) -> Scenario:
    text = resources.files("fransonsim").joinpath(f"data/scenarios/{name}.yaml").read_text()
    return scenario_from_dict(yaml.safe_load(text))


def override(s: Scenario, *, seed=None, steps=None, integration=None, thickness_um=None,
             tags=None) -> Scenario:
    """Copy of ``s`` with CLI-style overrides applied through the raw document."""
    raw = copy.deepcopy(s.raw)
    if seed is not None:
        raw["seed"] = int(seed)
    if steps is not None:
        raw.setdefault("scan", {})["steps"] = int(steps)
    if integration is not None:
        raw.setdefault("scan", {})["integration_s"] = float(integration)
    if tags is not None:
        raw.setdefault("outputs", {})["tags"] = bool(tags)
    if thickness_um is not None:
        if thickness_um == 0:
            raw["medium"] = None
        elif not raw.get("medium"):
            raise ScenarioError("scenario has no medium to set a thickness on")
        else:
            raw["medium"]["thickness_um"] = float(thickness_um)
    return scenario_from_dict(raw)


# ---------------------------------------------------------------- rates

def _photon_sigma(spec: JointSpectrum) -> float:
    return 0.5 * math.hypot(spec.pump_linewidth, spec.difference_bandwidth)


def arm_transmission(s: Scenario) -> tuple[float, float]:
    """Mean medium transmission seen by the signal (A) and idler (B) photon."""
    if s.medium is None or s.medium.thickness == 0:
        return 1.0, 1.0
    spec = s.source.spectrum
    sig = _photon_sigma(spec)
    return (mean_transmission(s.medium, spec.signal_center_freq, sig),
            mean_transmission(s.medium, spec.idler_center_freq, sig))


def coupling(s: Scenario) -> tuple[float, float]:
    """Medium-independent detection probability per photon, arm A and B."""
    a = s.interferometer.arm_transmission
    return (s.extra_loss[0] * a * s.detectors[0].efficiency,
            s.extra_loss[1] * a * s.detectors[1].efficiency)


def window_fraction(s: Scenario) -> float:
    """Fraction of a jittered SS/LL peak inside the coincidence window."""
    j = math.hypot(s.detectors[0].jitter_std, s.detectors[1].jitter_std)
    half = (tagger.window_ticks(s.window_s) + 0.5) * tagger.TICK_S
    return 1.0 if j == 0 else float(erf(half / (j * math.sqrt(2.0))))


@dataclass(frozen=True)
class RatePrediction:
    singles_a: float
    singles_b: float
    max_coinc: float
    visibility: float


def predict_rates(s: Scenario) -> RatePrediction:
    """Expected detected singles and peak window rate (no dead time, no drift)."""
    R = s.source.pair_rate
    ca, cb = coupling(s)
    ta, tb = arm_transmission(s)
    v, _ = analytic_visibility(s.interferometer, s.source.spectrum)
    sa = 0.5 * R * ca * ta + s.detectors[0].dark_rate
    sb = 0.5 * R * cb * tb + s.detectors[1].dark_rate
    # SS + LL carry half of the pairs; erasure passes (1 + V)/4 of them at the peak
    coinc = R * ca * cb * ta * tb * 0.5 * 0.25 * (1.0 + v) * window_fraction(s)
    acc = sa * sb * (2 * tagger.window_ticks(s.window_s) + 1) * tagger.TICK_S
    return RatePrediction(sa, sb, coinc + acc, v)


def expected_contrast(s: Scenario) -> float:
    """Window-level fringe visibility the estimator should recover.

    The pair visibility is diluted by the flat accidental floor
    ``S_A S_B tau_w`` that sits under the SS/LL window.
    """
    p = predict_rates(s)
    acc = p.singles_a * p.singles_b * (2 * tagger.window_ticks(s.window_s) + 1) * tagger.TICK_S
    true_peak = p.max_coinc - acc
    if true_peak <= 0:
        return 0.0
    mean = true_peak / (1.0 + p.visibility)
    return p.visibility * mean / (mean + acc)


def fit_pair_rate(singles_a, singles_b, max_coinc, s: Scenario) -> float:
    """Pair rate that reproduces a measured (singles, peak coincidence) triple.

    Singles are corrected for dead time and darks first.
    """
    sa = _true_singles(singles_a, s.detectors[0]) - s.detectors[0].dark_rate
    sb = _true_singles(singles_b, s.detectors[1]) - s.detectors[1].dark_rate
    v, _ = analytic_visibility(s.interferometer, s.source.spectrum)
    acc = singles_a * singles_b * (2 * tagger.window_ticks(s.window_s) + 1) * tagger.TICK_S
    return sa * sb * (1.0 + v) * window_fraction(s) / (2.0 * (max_coinc - acc))


def _true_singles(observed, det):
    return observed / (1.0 - observed * det.dead_time)


def fit_extra_loss(singles_a, singles_b, s: Scenario) -> tuple[float, float]:
    """Per-arm coupling factors that reproduce measured singles rates."""
    ta, tb = arm_transmission(s)
    out = []
    for obs, det, t in ((singles_a, s.detectors[0], ta), (singles_b, s.detectors[1], tb)):
        q = 2.0 * (_true_singles(obs, det) - det.dark_rate) / (s.source.pair_rate * t)
        x = q / (s.interferometer.arm_transmission * det.efficiency)
        if not 0 < x <= 1:
            raise ScenarioError(f"singles rate {obs} not reachable with this pair rate")
        out.append(x)
    return tuple(out)


# ---------------------------------------------------------------- one step

@dataclass
class StepResult:
    window_count: int
    singles_a: int
    singles_b: int
    stream: tagger.TagStream
    histogram: tagger.CoincidenceHistogram


def _drift_grid(s: Scenario, total_time: float):
    drift = s.interferometer.drift
    if not drift.enabled:
        return None
    grid = np.arange(0.0, total_time + 2 * DRIFT_GRID_S, DRIFT_GRID_S)
    values = drift.sample(grid, make_rng(s.seed, 2))
    return grid, values


def window_center_ticks(cfg: InterferometerConfig) -> int:
    """SS sits at lag 0, LL at dt_B - dt_A; the window is centred between."""
    return int(round((cfg.delay_b - cfg.delay_a) / 2 / tagger.TICK_S))


def simulate_step(s: Scenario, phase_a: float, phase_b: float, t0: float, rng: np.random.Generator,
                  drift_grid=None) -> StepResult:
    """Simulate ``integration_time_per_step`` seconds starting at virtual time ``t0``."""
    dur = s.scan.integration_time_per_step
    cfg = replace(s.interferometer, phase_a=phase_a, phase_b=phase_b, arm_transmission=1.0)
    ca, cb = coupling(s)
    R = s.source.pair_rate
    ta, tb = arm_transmission(s)
    leak = misalignment_leak(cfg)

    pairs = sample_pairs(s.source, rng, duration=dur, rate=R * ca * cb)
    if s.medium is not None and s.medium.thickness > 0:
        code = survives(s.medium, pairs, rng)
        sig, idl = (code & 1).astype(bool), (code & 2).astype(bool)
    else:
        sig = idl = None
    drift = 0.0
    if drift_grid is not None:
        drift = np.interp(t0 + pairs.emission_time, *drift_grid)
    out = traverse_batch(cfg, s.source.spectrum, pairs, rng, drift=drift,
                         signal_present=sig, idler_present=idl)

    # photons whose partner never made it to the analysis optics
    lone_a = R * ca * (1.0 - cb) * ta * 0.5 * (1.0 - 0.5 * leak)
    lone_b = R * cb * (1.0 - ca) * tb * 0.5
    bg = (tagger.poisson_times(lone_a, dur, rng), tagger.poisson_times(lone_b, dur, rng))

    ideal = [replace(d, efficiency=1.0) for d in s.detectors]
    stream = tagger.detect_batch(out, ideal[0], ideal[1], rng, duration=dur,
                                 offset_ticks=int(tagger.to_ticks(t0)), background=bg)
    return _analyze_stream(s, stream)


def _analyze_stream(s: Scenario, stream: tagger.TagStream) -> StepResult:
    h = tagger.build_histogram(stream, 1, s.max_lag_ticks)
    c = window_center_ticks(s.interferometer)
    hw = tagger.window_ticks(s.window_s)
    h.window_center, h.window_halfwidth = c, hw
    na, nb = stream.counts()
    return StepResult(tagger.integrate_window(h, c, hw), na, nb, stream, h)


# ---------------------------------------------------------------- full run

@dataclass
class RunResult:
    scenario: Scenario
    scans: list
    contrast: analysis.ContrastResult | None
    verdict: analysis.WitnessVerdict | None
    status: str
    notes: list
    report: dict
    out_dir: str | None = None


def _step_phases(s: Scenario, scan_index: int):
    arm, hold = s.scan.scans[scan_index]
    g = s.scan.phase_gain
    for setting in s.scan.settings():
        pa, pb = (setting, hold) if arm == "A" else (hold, setting)
        yield setting, g * pa, g * pb


def _step_time(s: Scenario, j: int, k: int) -> float:
    return (j * s.scan.steps + k) * s.scan.integration_time_per_step


def run_scenario(s: Scenario, out_dir=None) -> RunResult:
    """Run the full scan schedule and, with ``out_dir``, write all artifacts."""
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        if s.outputs.tags:
            os.makedirs(os.path.join(out_dir, "tags"), exist_ok=True)
        if s.outputs.histograms:
            os.makedirs(os.path.join(out_dir, "histograms"), exist_ok=True)
    total = len(s.scan.scans) * s.scan.steps * s.scan.integration_time_per_step
    grid = _drift_grid(s, total)
    scans, files = [], []
    for j in range(len(s.scan.scans)):
        wc, sa, sb, settings = [], [], [], []
        for k, (setting, pa, pb) in enumerate(_step_phases(s, j)):
            r = simulate_step(s, pa, pb, _step_time(s, j, k), make_rng(s.seed, 1, j, k), grid)
            wc.append(r.window_count)
            sa.append(r.singles_a)
            sb.append(r.singles_b)
            settings.append(setting)
            if out_dir is not None:
                stem = f"scan{j}_step{k:03d}"
                entry = {"scan": j, "step": k, "setting": setting}
                if s.outputs.tags:
                    entry["tags"] = f"tags/{stem}.tags"
                    tagger.write_tags(os.path.join(out_dir, entry["tags"]), r.stream)
                if s.outputs.histograms:
                    entry["histogram"] = f"histograms/{stem}.csv"
                    r.histogram.to_csv(os.path.join(out_dir, entry["histogram"]))
                files.append(entry)
        scans.append(analysis.FringeScan(settings, wc, sa, sb, s.scan.integration_time_per_step))
    result = finish_run(s, scans)
    if out_dir is not None:
        write_artifacts(result, out_dir, files)
    return result


def effective_halfwidth(s: Scenario) -> int:
    """Smoothing halfwidth capped at an eighth of a fringe so coarse scans keep their fringes."""
    lo, hi = s.scan.phase_range
    fringes = abs(hi - lo) * s.scan.phase_gain / (2 * math.pi)
    per_fringe = s.scan.steps / max(fringes, 1e-9)
    return int(min(s.smoothing_halfwidth, max(0, per_fringe // 8)))


def finish_run(s: Scenario, scans: list) -> RunResult:
    """Contrast, witness, feasibility and report row from finished scans."""
    notes = list(regime_check(s.interferometer, s.source.spectrum).messages)
    pred = predict_rates(s)
    status = "ok"
    res = verdict = None
    try:
        res = analysis.combine_scans(analysis.contrast(sc, effective_halfwidth(s)) for sc in scans)
        verdict = analysis.witness(res, scans)
    except analysis.NoFringeError as exc:
        status = str(exc)
    if pred.max_coinc < s.feasibility_floor:
        # a run with nothing at all predicted is reported as fringe-less instead
        if pred.max_coinc > 0 or status == "ok":
            status = "insufficient signal"
        notes.append(f"predicted peak coincidences {pred.max_coinc:.3g}/s below floor "
                     f"{s.feasibility_floor:g}/s")
    report = report_row(s, scans, res, verdict, status, notes)
    return RunResult(s, scans, res, verdict, status, notes, report)


def report_row(s: Scenario, scans, res, verdict, status, notes) -> dict:
    t = s.scan.integration_time_per_step
    n_steps = sum(len(sc) for sc in scans)
    sa = sum(int(sc.singles_a.sum()) for sc in scans) / (n_steps * t)
    sb = sum(int(sc.singles_b.sum()) for sc in scans) / (n_steps * t)
    mc = max(int(sc.window_count.max()) for sc in scans) / t
    nan = float("nan")
    return {
        "sample": s.sample_name,
        "thickness_um": round(s.thickness_um, 6),
        "singles_a_1e4": sa / 1e4,
        "singles_b_1e4": sb / 1e4,
        "max_coinc": mc,
        "int_time": t,
        "contrast": "" if res is None else analysis.format_percent(res.contrast, res.uncertainty),
        "contrast_value": nan if res is None else res.contrast,
        "sigma": nan if res is None else res.uncertainty,
        "quadrature_sigma": nan if res is None else res.quadrature_uncertainty,
        "scatter": nan if res is None else res.scatter,
        "chsh_witnessed": bool(verdict and verdict.chsh_witnessed and status == "ok"),
        "chained_witnessed": bool(verdict and verdict.chained_witnessed and status == "ok"),
        "singles_flat": bool(verdict and verdict.singles_flat),
        "status": status,
        "notes": "; ".join(notes),
    }


# ---------------------------------------------------------------- artifacts

def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_report(rows, fmt="csv") -> str:
    rows = list(rows)
    if fmt == "json-lines":
        return "".join(json.dumps({k: r[k] for k in REPORT_COLUMNS}, allow_nan=True) + "\n" for r in rows)
    if fmt != "csv":
        raise ValueError(f"unknown report format {fmt!r}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[k]) for k in REPORT_COLUMNS])
    return buf.getvalue()


def write_artifacts(result: RunResult, out_dir, files=()):
    s = result.scenario
    for j, sc in enumerate(result.scans):
        sc.to_csv(os.path.join(out_dir, f"fringe_scan{j}.csv"))
    with open(os.path.join(out_dir, "scenario.yaml"), "w") as fh:
        yaml.safe_dump(s.raw, fh, sort_keys=True)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "name": s.name,
        "seed": s.seed,
        "steps": s.scan.steps,
        "n_scans": len(result.scans),
        "integration_s": s.scan.integration_time_per_step,
        "status": result.status,
        "files": list(files),
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(out_dir, "report.csv"), "w") as fh:
        fh.write(format_report([result.report], "csv"))
    with open(os.path.join(out_dir, "report.jsonl"), "w") as fh:
        fh.write(format_report([result.report], "json-lines"))


def _scenario_of_run(run_dir) -> Scenario:
    return load_scenario(os.path.join(run_dir, "scenario.yaml"))


def report_from_run(run_dir) -> RunResult:
    """Recompute the report from a run directory's fringe CSVs."""
    s = _scenario_of_run(run_dir)
    with open(os.path.join(run_dir, "manifest.json")) as fh:
        n = json.load(fh)["n_scans"]
    scans = [analysis.FringeScan.from_csv(os.path.join(run_dir, f"fringe_scan{j}.csv")) for j in range(n)]
    return finish_run(s, scans)


def analyze_tags(paths, scenario: Scenario | None = None) -> RunResult:
    """Rebuild scans from persisted tag files and re-run the analysis.

    Files are placed by the ``manifest.json`` of their run directory, whose
    ``scenario.yaml`` also supplies the window and integration settings
    unless ``scenario`` is given.
    """
    paths = [os.path.abspath(p) for p in paths]
    if not paths:
        raise ValueError("no tag files given")
    run_dir = os.path.dirname(os.path.dirname(paths[0]))
    s = scenario or _scenario_of_run(run_dir)
    with open(os.path.join(run_dir, "manifest.json")) as fh:
        entries = {os.path.join(run_dir, e["tags"]): e for e in json.load(fh)["files"] if "tags" in e}
    by_scan = {}
    for p in paths:
        if p not in entries:
            raise ValueError(f"{p} is not listed in {run_dir}/manifest.json")
        e = entries[p]
        r = _analyze_stream(s, tagger.read_tags(p))
        by_scan.setdefault(e["scan"], []).append((e["step"], e["setting"], r))
    scans = []
    for j in sorted(by_scan):
        rows = sorted(by_scan[j], key=lambda x: x[0])
        scans.append(analysis.FringeScan([x[1] for x in rows], [x[2].window_count for x in rows],
                                         [x[2].singles_a for x in rows], [x[2].singles_b for x in rows],
                                         s.scan.integration_time_per_step))
    return finish_run(s, scans)


# ---------------------------------------------------------------- sweeps

SWEEP_COLUMNS = ("thickness_um", "contrast", "sigma", "witnessed", "status", "max_coinc")


def sweep_thickness(base: Scenario, thicknesses, out_dir=None) -> list[dict]:
    """One run per thickness (micrometres) with all other physics fixed."""
    rows = []
    for z in thicknesses:
        s = override(base, thickness_um=float(z))
        sub = None if out_dir is None else os.path.join(out_dir, f"z{float(z):g}um")
        r = run_scenario(s, sub)
        rows.append({
            "thickness_um": float(z),
            "contrast": float("nan") if r.contrast is None else r.contrast.contrast,
            "sigma": float("nan") if r.contrast is None else r.contrast.uncertainty,
            "witnessed": r.report["chsh_witnessed"],
            "status": r.status,
            "max_coinc": r.report["max_coinc"],
        })
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "sweep.csv"), "w") as fh:
            fh.write(format_sweep(rows))
    return rows


def format_sweep(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[k]) for k in SWEEP_COLUMNS])
    return buf.getvalue()
