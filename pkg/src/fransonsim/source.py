"""CW-pumped SPDC pair source with a Gaussian joint spectrum.

Conventions used throughout the package:

* frequencies are angular (rad/s);
* every spectral width is a standard deviation;
* a coherence time is the reciprocal of the angular-frequency std dev of
  the field it describes, so ``tau_pump = 1 / pump_linewidth`` and
  ``tau_single = 1 / sigma_single``. Since ``w_s = (S + D) / 2`` the single
  photon std dev is ``difference_bandwidth / 2`` (pump term neglected),
  hence ``tau_single = 2 / difference_bandwidth``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

C_LIGHT = 299_792_458.0  # m/s


class Splitting(enum.Enum):
    TYPE_I_PROBABILISTIC = "type_i_probabilistic"
    TYPE_II_DETERMINISTIC = "type_ii_deterministic"


class Polarization(enum.IntEnum):
    H = 0
    V = 1


def wavelength_to_omega(wavelength_nm):
    return 2.0 * np.pi * C_LIGHT / (np.asarray(wavelength_nm, dtype=float) * 1e-9)


def omega_to_wavelength(omega):
    """Vacuum wavelength in nm for angular frequency ``omega``."""
    return 2.0 * np.pi * C_LIGHT / np.asarray(omega, dtype=float) * 1e9


@dataclass(frozen=True)
class JointSpectrum:
    """Separable Gaussian in sum (S) and difference (D) frequency."""

    pump_center_freq: float
    pump_linewidth: float
    signal_center_freq: float
    difference_bandwidth: float

    def __post_init__(self):
        if not (self.pump_linewidth > 0 and self.difference_bandwidth > 0):
            raise ValueError("non-physical spectrum: bandwidths must be > 0")
        if self.pump_center_freq <= 0:
            raise ValueError("pump_center_freq must be > 0")

    @property
    def idler_center_freq(self) -> float:
        return self.pump_center_freq - self.signal_center_freq

    @classmethod
    def from_lab_parameters(cls, pump_wavelength_nm=405.0, coherence_length_m=25.0,
                            filter_width_nm=3.1, signal_wavelength_nm=None):
        """Build a spectrum from pump wavelength, pump coherence length and
        bandpass filter width.

        The filter sets the single-photon coherence time as
        ``lambda**2 / (c * dlambda)``; the pump coherence time is ``L / c``.
        """
        wp = float(wavelength_to_omega(pump_wavelength_nm))
        if signal_wavelength_nm is None:
            ws = wp / 2.0
            lam_s = 2.0 * pump_wavelength_nm
        else:
            ws = float(wavelength_to_omega(signal_wavelength_nm))
            lam_s = signal_wavelength_nm
        tau_single = (lam_s * 1e-9) ** 2 / (C_LIGHT * filter_width_nm * 1e-9)
        tau_pump = coherence_length_m / C_LIGHT
        return cls(pump_center_freq=wp, pump_linewidth=1.0 / tau_pump,
                   signal_center_freq=ws, difference_bandwidth=2.0 / tau_single)

    def intensity(self, omega_s, omega_i):
        """|f(w_s, w_i)|**2, normalised to unit integral over the plane."""
        s = np.asarray(omega_s) + np.asarray(omega_i)
        d = np.asarray(omega_s) - np.asarray(omega_i)
        d0 = self.signal_center_freq - self.idler_center_freq
        sp, sd = self.pump_linewidth, self.difference_bandwidth
        # Jacobian of (w_s, w_i) -> (S, D) is 2
        return 2.0 * (np.exp(-0.5 * ((s - self.pump_center_freq) / sp) ** 2)
                      * np.exp(-0.5 * ((d - d0) / sd) ** 2)
                      / (2.0 * np.pi * sp * sd))


def coherence_times(spec: JointSpectrum) -> tuple[float, float]:
    """Return ``(tau_single, tau_pump)`` in seconds."""
    if not (spec.pump_linewidth > 0 and spec.difference_bandwidth > 0):
        raise ValueError("non-physical spectrum: zero bandwidth")
    return 2.0 / spec.difference_bandwidth, 1.0 / spec.pump_linewidth


@dataclass(frozen=True)
class SourceConfig:
    pair_rate: float
    spectrum: JointSpectrum
    splitting: Splitting = Splitting.TYPE_I_PROBABILISTIC
    rng_seed: int = 0

    def __post_init__(self):
        if not self.pair_rate > 0:
            raise ValueError("pair_rate must be > 0")


@dataclass(frozen=True)
class PhotonPair:
    emission_time: float
    signal_freq: float
    idler_freq: float
    signal_pol: Polarization
    idler_pol: Polarization


@dataclass
class PairBatch:
    """Column-oriented block of pairs, the form used by the vectorised pipeline."""

    emission_time: np.ndarray
    signal_freq: np.ndarray
    idler_freq: np.ndarray
    signal_pol: np.ndarray
    idler_pol: np.ndarray

    def __len__(self):
        return len(self.emission_time)

    def __getitem__(self, idx):
        if isinstance(idx, (int, np.integer)):
            return PhotonPair(float(self.emission_time[idx]), float(self.signal_freq[idx]),
                              float(self.idler_freq[idx]), Polarization(int(self.signal_pol[idx])),
                              Polarization(int(self.idler_pol[idx])))
        return PairBatch(self.emission_time[idx], self.signal_freq[idx], self.idler_freq[idx],
                         self.signal_pol[idx], self.idler_pol[idx])


def make_rng(seed, *keys) -> np.random.Generator:
    """Independent generator for ``(seed, *keys)``; equal keys give equal streams."""
    return np.random.default_rng([int(seed), *(int(k) for k in keys)])


def _frequencies(spec: JointSpectrum, n, rng):
    s = spec.pump_center_freq + spec.pump_linewidth * rng.standard_normal(n)
    d = (spec.signal_center_freq - spec.idler_center_freq
         + spec.difference_bandwidth * rng.standard_normal(n))
    return 0.5 * (s + d), 0.5 * (s - d)


def _polarizations(splitting: Splitting, n):
    sig = np.full(n, Polarization.H, dtype=np.int8)
    idl = np.full(n, Polarization.H if splitting is Splitting.TYPE_I_PROBABILISTIC
                  else Polarization.V, dtype=np.int8)
    return sig, idl


def sample_pair(cfg: SourceConfig, rng: np.random.Generator, previous_time=0.0) -> PhotonPair:
    """Draw the next pair of the Poisson emission process after ``previous_time``."""
    t = previous_time + rng.exponential(1.0 / cfg.pair_rate)
    ws, wi = _frequencies(cfg.spectrum, 1, rng)
    sp, ip = _polarizations(cfg.splitting, 1)
    return PhotonPair(float(t), float(ws[0]), float(wi[0]),
                      Polarization(int(sp[0])), Polarization(int(ip[0])))


def sample_pairs(cfg: SourceConfig, rng: np.random.Generator, n=None, duration=None,
                 start_time=0.0, rate=None) -> PairBatch:
    """Sample a block of pairs.

    Give either ``n`` (a fixed count with exponential spacing) or ``duration``
    (Poisson count over ``[start_time, start_time + duration)``). ``rate``
    overrides ``cfg.pair_rate``, which is how thinned sub-processes are drawn.
    """
    rate = cfg.pair_rate if rate is None else rate
    if (n is None) == (duration is None):
        raise ValueError("give exactly one of n or duration")
    if n is not None:
        times = start_time + np.cumsum(rng.exponential(1.0 / rate, size=n))
    else:
        n = rng.poisson(rate * duration) if rate > 0 else 0
        times = start_time + np.sort(rng.uniform(0.0, duration, size=n))
    ws, wi = _frequencies(cfg.spectrum, n, rng)
    sp, ip = _polarizations(cfg.splitting, n)
    return PairBatch(times, ws, wi, sp, ip)
