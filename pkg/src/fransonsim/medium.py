"""Ballistic transmission of photon pairs through a turbid slab.

Scattered photons are treated as lost: only the unscattered fraction
``exp(-(mu_s' + mu_a) z)`` is collected downstream.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
import yaml

from .source import PairBatch, PhotonPair, omega_to_wavelength


class Survival(enum.IntEnum):
    NEITHER = 0
    SIGNAL_ONLY = 1
    IDLER_ONLY = 2
    BOTH = 3


@dataclass(frozen=True)
class MediumSpec:
    """Slab description. Coefficients in 1/cm, thickness in cm."""

    name: str
    reduced_scattering: float
    absorption: float = 0.0
    anisotropy: float = 0.0
    scatter_power: float = 0.0
    reference_wavelength: float = 800.0
    thickness: float = 0.0

    def __post_init__(self):
        if self.reduced_scattering < 0 or self.absorption < 0 or self.thickness < 0:
            raise ValueError("coefficients and thickness must be >= 0")
        if not 0.0 <= self.anisotropy < 1.0:
            raise ValueError("anisotropy g must lie in [0, 1)")
        if self.reference_wavelength <= 0:
            raise ValueError("reference_wavelength must be > 0")

    @property
    def scattering(self) -> float:
        """Unreduced scattering coefficient mu = mu' / (1 - g)."""
        return self.reduced_scattering / (1.0 - self.anisotropy)

    def attenuation(self, wavelength_nm=None):
        """Total ballistic attenuation mu_t(lambda) in 1/cm."""
        lam = self.reference_wavelength if wavelength_nm is None else np.asarray(wavelength_nm, float)
        return self.reduced_scattering * (lam / self.reference_wavelength) ** (-self.scatter_power) + self.absorption

    def with_thickness(self, thickness_cm) -> "MediumSpec":
        return MediumSpec(self.name, self.reduced_scattering, self.absorption, self.anisotropy,
                          self.scatter_power, self.reference_wavelength, float(thickness_cm))


def single_photon_transmission(spec: MediumSpec, wavelength):
    """Ballistic transmission probability at ``wavelength`` (nm); vectorised."""
    wavelength = np.asarray(wavelength, dtype=float)
    if np.any(wavelength <= 0):
        raise ValueError("wavelength must be > 0")
    t = np.exp(-spec.attenuation(wavelength) * spec.thickness)
    return float(t) if t.ndim == 0 else t


def pair_transmission(spec: MediumSpec, pair):
    """Probability that both photons of ``pair`` cross the slab."""
    ts = single_photon_transmission(spec, omega_to_wavelength(pair.signal_freq))
    ti = single_photon_transmission(spec, omega_to_wavelength(pair.idler_freq))
    return ts * ti


def mean_transmission(spec: MediumSpec, center_omega: float, sigma_omega: float, order: int = 40) -> float:
    """Transmission averaged over a Gaussian photon spectrum (Gauss-Hermite)."""
    x, w = np.polynomial.hermite_e.hermegauss(order)
    omega = center_omega + sigma_omega * x
    return float(np.sum(w * single_photon_transmission(spec, omega_to_wavelength(omega))) / np.sum(w))


def survives(spec: MediumSpec, pair, rng: np.random.Generator):
    """Independent Bernoulli survival of each photon.

    Returns a :class:`Survival` for a single pair, or an int8 array of
    Survival codes for a :class:`PairBatch`.
    """
    ts = single_photon_transmission(spec, omega_to_wavelength(pair.signal_freq))
    ti = single_photon_transmission(spec, omega_to_wavelength(pair.idler_freq))
    n = None if isinstance(pair, PhotonPair) else len(pair)
    sig = rng.random(n) < ts
    idl = rng.random(n) < ti
    code = np.asarray(sig, dtype=np.int8) + 2 * np.asarray(idl, dtype=np.int8)
    if n is None:
        return Survival(int(code))
    return code


@dataclass(frozen=True)
class MediumPreset:
    spec: MediumSpec
    thicknesses_um: list = field(default_factory=list)
    note: str = ""


def load_presets(path=None) -> dict[str, MediumPreset]:
    """Read the shipped (or a user) medium preset file."""
    if path is None:
        text = resources.files("fransonsim").joinpath("data/media.yaml").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    raw = yaml.safe_load(text)
    out = {}
    for key, rec in raw["media"].items():
        spec = MediumSpec(
            name=rec.get("name", key),
            reduced_scattering=float(rec["reduced_scattering"]),
            absorption=float(rec.get("absorption", 0.0)),
            anisotropy=float(rec.get("anisotropy", 0.0)),
            scatter_power=float(rec.get("scatter_power", 0.0)),
            reference_wavelength=float(rec.get("reference_wavelength", 800.0)),
        )
        out[key] = MediumPreset(spec, [float(t) for t in rec.get("thicknesses_um", [])],
                                rec.get("note", ""))
    return out
