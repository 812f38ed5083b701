"""Geometry-based phase and sampling-time calibration for multi-antenna
OFDM channel measurements."""

__version__ = "0.1.0"

from .config import (ArrayGeometry, ImpairmentProfile, RadioConfig,
                     TransmitPhases, TransmitterTrack)
from .channel import (build_ideal_tensor, ideal_coefficient, impairment_gain,
                      impairment_gain_matrix, subcarrier_wavelength,
                      synthesize_measurements)
from .solvers import (GainPhaseEstimate, SolverConfig, coordinate_descent,
                      eigenvector_estimate, estimate_gain_phase,
                      normalize_global_phase, principal_eigpair, residual_norm,
                      sample_autocorrelation, update_g_block, update_s_block)
from .offsets import (AntennaOffsetEstimate, apply_calibration,
                      estimate_phase_offset, estimate_time_offset,
                      extract_offsets, kay_frequency, kay_weights)
from .metrics import (AgreementSeries, ResidualTrace, SweepResult, add_noise,
                      cosine_similarity_db, residual_trace, snr_sweep,
                      starting_phase_agreement)
from .io import (CalibrationRecord, DatasetBundle, file_digest,
                 import_positions, read_bundle, read_calibration, write_bundle,
                 write_calibration)
from .scenarios import (DEFAULT_CONFIG, SCENARIOS, distributed_arrays,
                        grid_array, make_bundle, scenario_geometry)
from .estimators import GainPhaseCalibrator

__all__ = [
    "__version__",
    "ArrayGeometry", "ImpairmentProfile", "RadioConfig", "TransmitPhases",
    "TransmitterTrack",
    "build_ideal_tensor", "ideal_coefficient", "impairment_gain",
    "impairment_gain_matrix", "subcarrier_wavelength", "synthesize_measurements",
    "GainPhaseEstimate", "SolverConfig", "coordinate_descent",
    "eigenvector_estimate", "estimate_gain_phase", "normalize_global_phase",
    "principal_eigpair", "residual_norm", "sample_autocorrelation",
    "update_g_block", "update_s_block",
    "AntennaOffsetEstimate", "apply_calibration", "estimate_phase_offset",
    "estimate_time_offset", "extract_offsets", "kay_frequency", "kay_weights",
    "AgreementSeries", "ResidualTrace", "SweepResult", "add_noise",
    "cosine_similarity_db", "residual_trace", "snr_sweep",
    "starting_phase_agreement",
    "CalibrationRecord", "DatasetBundle", "file_digest", "import_positions",
    "read_bundle", "read_calibration", "write_bundle", "write_calibration",
    "DEFAULT_CONFIG", "SCENARIOS", "distributed_arrays", "grid_array",
    "make_bundle", "scenario_geometry",
    "GainPhaseCalibrator",
]
