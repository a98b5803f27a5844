"""Monte Carlo model of a Franson interferometer probing photon pairs
transmitted through scattering media, with time-tag analysis."""
from .analysis import (CHAINED_THRESHOLD, CHSH_THRESHOLD, ContrastResult, FringeScan, NoFringeError,
                       WitnessVerdict, combine_scans, contrast, efficiency_visibility_bound,
                       find_extrema, required_efficiency, witness)
from .interferometer import (InterferometerConfig, IntegrationError, Path, PhaseDriftModel,
                             analytic_coincidence_rate, analytic_visibility, regime_check,
                             traverse, traverse_batch)
from .medium import MediumSpec, Survival, load_presets, pair_transmission, single_photon_transmission, survives
from .runner import (Scenario, ScanPlan, load_preset, load_scenario, preset_names, run_scenario,
                     sweep_thickness)
from .source import JointSpectrum, PhotonPair, SourceConfig, Splitting, coherence_times, sample_pair, sample_pairs
from .tagger import (CoincidenceHistogram, DetectorSpec, TagRecord, TagStream, build_histogram, detect,
                     detect_batch, integrate_window, read_tags, write_tags)

__version__ = "0.1.0"
