"""Hugging Franson interferometer: path choice, two-photon phase, erasure.

Each photon independently takes the short (S) or long (L) arm. SS and LL
are indistinguishable and interfere; SL and LS are distinguishable. At the
which-path-erasing polarizers the joint outcome of an interfering pair is

    P(both pass) = P(neither) = (1 + V cos phi) / 4
    P(A only)    = P(B only)  = (1 - V cos phi) / 4

so each detector's marginal stays at 1/2 whatever the phase, while the
coincidence probability follows the two-photon fringe.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .source import JointSpectrum, PairBatch, PhotonPair, Splitting, coherence_times

TWO_PI = 2.0 * np.pi


class Path(enum.IntEnum):
    SS = 0
    SL = 1
    LS = 2
    LL = 3


class IntegrationError(RuntimeError):
    def __init__(self, message, error_estimate):
        super().__init__(f"{message} (error estimate {error_estimate:.3g})")
        self.error_estimate = error_estimate


@dataclass(frozen=True)
class PhaseDriftModel:
    """Ornstein-Uhlenbeck phase noise added to phi_A + phi_B.

    ``random_walk_std`` is the diffusion strength in rad/sqrt(s); for
    times short against ``correlation_time`` the phase wanders like a random
    walk, beyond it the spread saturates at ``random_walk_std * sqrt(tc / 2)``.
    ``correlation_time = inf`` gives a pure random walk.
    """

    random_walk_std: float = 0.0
    correlation_time: float = 60.0

    def __post_init__(self):
        if self.random_walk_std < 0 or self.correlation_time < 0:
            raise ValueError("drift parameters must be >= 0")

    @property
    def enabled(self) -> bool:
        return self.random_walk_std > 0 and self.correlation_time > 0

    def sample(self, times, rng: np.random.Generator) -> np.ndarray:
        """Exact OU path at sorted ``times`` (seconds), starting from 0 at t=0."""
        times = np.asarray(times, dtype=float)
        if not self.enabled or times.size == 0:
            return np.zeros_like(times)
        dt = np.diff(np.concatenate([[0.0], times]))
        if np.any(dt < 0):
            raise ValueError("drift times must be non-decreasing")
        xi = rng.standard_normal(times.size)
        if math.isinf(self.correlation_time):
            return np.cumsum(self.random_walk_std * np.sqrt(dt) * xi)
        tc = self.correlation_time
        decay = np.exp(-dt / tc)
        kick = self.random_walk_std * np.sqrt(tc / 2.0 * (1.0 - decay ** 2)) * xi
        out = np.empty_like(times)
        x = 0.0
        for k in range(times.size):
            x = x * decay[k] + kick[k]
            out[k] = x
        return out


@dataclass(frozen=True)
class InterferometerConfig:
    delay_a: float = 2e-9
    delay_b: float = 2e-9
    phase_a: float = 0.0
    phase_b: float = 0.0
    waveplate_misalignment: float = 0.0
    splitting: Splitting = Splitting.TYPE_I_PROBABILISTIC
    drift: PhaseDriftModel = field(default_factory=PhaseDriftModel)
    envelope: float = 1.0  # extra single-event visibility factor (mode mismatch etc.)
    arm_transmission: float = 0.65  # fibre coupling inside each arm

    def __post_init__(self):
        if not (self.delay_a > 0 and self.delay_b > 0):
            raise ValueError("delays must be > 0")
        if not 0.0 <= self.envelope <= 1.0:
            raise ValueError("envelope must lie in [0, 1]")
        if not 0.0 <= self.arm_transmission <= 1.0:
            raise ValueError("arm_transmission must lie in [0, 1]")
        if not 0.0 <= self.waveplate_misalignment <= np.pi / 2:
            raise ValueError("waveplate_misalignment must lie in [0, pi/2]")

    def with_phases(self, phase_a=None, phase_b=None) -> "InterferometerConfig":
        from dataclasses import replace
        return replace(self, phase_a=self.phase_a if phase_a is None else phase_a,
                       phase_b=self.phase_b if phase_b is None else phase_b)


@dataclass(frozen=True)
class PathOutcome:
    path_label: Path
    detector_a_time: float | None
    detector_b_time: float | None
    joint_phase: float | None
    same_detector: bool
    # second photon when both land on one detector (hugging SL/LS)
    extra_time: float | None = None


@dataclass
class OutcomeBatch:
    """Vectorised outcomes. NaN marks 'no photon at this detector'."""

    path: np.ndarray
    time_a: np.ndarray
    time_b: np.ndarray
    extra_time: np.ndarray
    extra_channel: np.ndarray  # 0 = A, 1 = B; meaningful where extra_time is finite
    joint_phase: np.ndarray
    same_detector: np.ndarray

    def __len__(self):
        return len(self.path)

    @property
    def coincident(self) -> np.ndarray:
        return np.isfinite(self.time_a) & np.isfinite(self.time_b)

    def arrivals(self, channel: int) -> np.ndarray:
        main = self.time_a if channel == 0 else self.time_b
        extra = self.extra_time[(self.extra_channel == channel) & np.isfinite(self.extra_time)]
        return np.concatenate([main[np.isfinite(main)], extra])

    def __getitem__(self, k) -> PathOutcome:
        def opt(x):
            return None if not np.isfinite(x) else float(x)
        return PathOutcome(Path(int(self.path[k])), opt(self.time_a[k]), opt(self.time_b[k]),
                           opt(self.joint_phase[k]), bool(self.same_detector[k]),
                           opt(self.extra_time[k]))


def carrier_phase(cfg: InterferometerConfig, spec: JointSpectrum) -> float:
    """Two-photon phase for a pair sitting exactly at the centre frequencies,
    waveplate offsets included, reduced to [0, 2pi)."""
    base = (math.fmod(spec.signal_center_freq * cfg.delay_a, TWO_PI)
            + math.fmod(spec.idler_center_freq * cfg.delay_b, TWO_PI))
    return (base + cfg.phase_a + cfg.phase_b) % TWO_PI


def pair_phase(cfg: InterferometerConfig, spec: JointSpectrum, signal_freq, idler_freq, drift=0.0):
    """Two-photon phase w_s dt_A + w_i dt_B + phi_A + phi_B + drift.

    The large carrier part is reduced exactly once and the per-pair
    frequency offsets are added on top, which keeps float64 precision.
    """
    ds = np.asarray(signal_freq) - spec.signal_center_freq
    di = np.asarray(idler_freq) - spec.idler_center_freq
    return carrier_phase(cfg, spec) + ds * cfg.delay_a + di * cfg.delay_b + drift


def misalignment_leak(cfg: InterferometerConfig) -> float:
    """Fraction of long-arm-A light rotated out of the detected polarisation."""
    return math.sin(cfg.waveplate_misalignment) ** 2 * (1.0 - math.cos(cfg.phase_a)) / 2.0


def traverse_batch(cfg: InterferometerConfig, spec: JointSpectrum, pairs: PairBatch,
                   rng: np.random.Generator, drift=0.0,
                   signal_present=None, idler_present=None) -> OutcomeBatch:
    """Propagate a block of pairs (signal -> arm A, idler -> arm B).

    ``signal_present`` / ``idler_present`` mark photons that survived the
    medium; a pair with one photon missing behaves as two lone photons.
    ``drift`` is a scalar or per-pair phase added to the two-photon phase.
    """
    n = len(pairs)
    sig = np.ones(n, bool) if signal_present is None else np.asarray(signal_present, bool).copy()
    idl = np.ones(n, bool) if idler_present is None else np.asarray(idler_present, bool).copy()

    # per-arm coupling and waveplate leak are independent per photon
    sig &= rng.random(n) < cfg.arm_transmission
    idl &= rng.random(n) < cfg.arm_transmission
    long_a = rng.random(n) < 0.5
    long_b = rng.random(n) < 0.5
    leak = misalignment_leak(cfg)
    if leak > 0:
        sig &= ~(long_a & (rng.random(n) < leak))

    path = (long_a.astype(np.int8) * 2 + long_b.astype(np.int8))  # SS=0 SL=1 LS=2 LL=3
    t0 = pairs.emission_time
    ta = t0 + np.where(long_a, cfg.delay_a, 0.0)
    tb = t0 + np.where(long_b, cfg.delay_b, 0.0)

    both = sig & idl
    interfering = both & ((path == Path.SS) | (path == Path.LL))
    phase = np.full(n, np.nan)
    phase[interfering] = pair_phase(cfg, spec, pairs.signal_freq[interfering],
                                     pairs.idler_freq[interfering],
                                     drift if np.ndim(drift) == 0 else np.asarray(drift)[interfering])

    u = rng.random(n)
    pass_a = u < 0.5
    pass_b = rng.random(n) < 0.5
    if interfering.any():
        p_both = 0.25 * (1.0 + cfg.envelope * np.cos(phase[interfering]))
        # u in [0,p): both, [p,2p): neither, [2p,1/2+p): A only, rest: B only
        ui = u[interfering]
        pass_a[interfering] = (ui < p_both) | ((ui >= 2 * p_both) & (ui < 0.5 + p_both))
        pass_b[interfering] = (ui < p_both) | (ui >= 0.5 + p_both)
    pass_a &= sig
    pass_b &= idl

    time_a = np.where(pass_a, ta, np.nan)
    time_b = np.where(pass_b, tb, np.nan)
    extra_time = np.full(n, np.nan)
    extra_channel = np.zeros(n, np.int8)
    same = np.zeros(n, bool)
    if cfg.splitting is Splitting.TYPE_II_DETERMINISTIC:
        # hugging geometry: a long arm crosses over to the other detector
        sl = path == Path.SL  # idler takes long B, which ends on detector A
        ls = path == Path.LS  # signal takes long A, which ends on detector B
        same = (sl | ls) & both
        extra_time[sl] = time_b[sl]
        extra_channel[sl] = 0
        time_b[sl] = np.nan
        extra_time[ls] = time_a[ls]
        extra_channel[ls] = 1
        time_a[ls] = np.nan
    return OutcomeBatch(path, time_a, time_b, extra_time, extra_channel, phase, same)


def traverse(cfg: InterferometerConfig, spec: JointSpectrum, pair: PhotonPair,
             wall_time: float, rng: np.random.Generator, drift_phase=0.0) -> PathOutcome | None:
    """Single-pair version of :func:`traverse_batch`; ``None`` if no detector fires."""
    batch = PairBatch(np.array([pair.emission_time]), np.array([pair.signal_freq]),
                      np.array([pair.idler_freq]), np.array([pair.signal_pol]),
                      np.array([pair.idler_pol]))
    out = traverse_batch(cfg, spec, batch, rng, drift=drift_phase)[0]
    if out.detector_a_time is None and out.detector_b_time is None and out.extra_time is None:
        return None
    return out


def _gaussian_characteristic(a: float, tol=1e-7) -> complex:
    """Integrate the unit normal density against exp(i a u) by quadrature.

    The density is even so the sine part vanishes and only
    ``2 * int_0^inf pdf(u) cos(a u) du`` is evaluated: plain adaptive
    quadrature for slow oscillation, the Fourier-cosine routine otherwise.
    """
    a = abs(a)
    if a == 0.0:
        return 1.0 + 0.0j
    pdf = lambda u: math.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi)  # noqa: E731
    if a < 2.0:
        res = integrate.quad(lambda u: pdf(u) * math.cos(a * u), 0.0, np.inf,
                             full_output=1, epsabs=1e-13)
    else:
        res = integrate.quad(pdf, 0.0, np.inf, weight="cos", wvar=a,
                             full_output=1, limlst=200, epsabs=1e-13)
    val, err = 2.0 * res[0], 2.0 * res[1]
    if len(res) > 3 and err > tol:  # quad attaches a message only on trouble
        raise IntegrationError("coincidence integral did not converge", err)
    if err > tol:
        raise IntegrationError("coincidence integral did not converge", err)
    return complex(val, 0.0)


def analytic_visibility(cfg: InterferometerConfig, spec: JointSpectrum) -> tuple[float, float]:
    """Fringe visibility and phase from the coincidence integral over the JSA.

    The integral separates in sum and difference frequency; each factor is
    the integral of a unit Gaussian against a cosine, evaluated by
    quadrature.
    """
    t_sum = 0.5 * (cfg.delay_a + cfg.delay_b)
    t_diff = 0.5 * (cfg.delay_a - cfg.delay_b)
    k = (_gaussian_characteristic(spec.pump_linewidth * t_sum)
         * _gaussian_characteristic(spec.difference_bandwidth * t_diff))
    v = cfg.envelope * abs(k)
    phi = (carrier_phase(cfg, spec) + np.angle(k)) % TWO_PI
    return float(v), float(phi)


def analytic_coincidence_rate(cfg: InterferometerConfig, spec: JointSpectrum, drift=0.0) -> float:
    """Normalised SS/LL coincidence factor (1 + V cos Phi) / 2, in [0, 1]."""
    v, phi = analytic_visibility(cfg, spec)
    return 0.5 * (1.0 + v * math.cos(phi + drift))


@dataclass(frozen=True)
class RegimeReport:
    ratio_single: float  # min(dt) / tau_single, want >= 10
    ratio_pump: float  # max(dt) / tau_pump, want <= 0.1
    verdict: str
    messages: tuple = ()


def regime_check(cfg: InterferometerConfig, spec: JointSpectrum,
                 single_threshold=10.0, pump_threshold=0.1) -> RegimeReport:
    tau_s, tau_p = coherence_times(spec)
    r_single = min(cfg.delay_a, cfg.delay_b) / tau_s
    r_pump = max(cfg.delay_a, cfg.delay_b) / tau_p
    msgs = []
    if r_single < single_threshold:
        msgs.append(f"delay only {r_single:.3g} x tau_single: single-photon interference expected")
    if r_pump > pump_threshold:
        msgs.append(f"delay is {r_pump:.3g} x tau_pump: pump coherence exhausted")
    return RegimeReport(r_single, r_pump, "warn" if msgs else "pass", tuple(msgs))
