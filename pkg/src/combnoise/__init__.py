"""Quantum noise floors of frequency-comb measurements.

Closed-form shot-noise and squeezed/EPR noise floors for optical frequency
division and dual-comb spectroscopy, validated against an independent
covariance-matrix quadratic-form oracle and a Monte-Carlo time-domain
engine.
"""

__version__ = "1.0.0"

from .envelope import (CombEnvelope, PhasedEnvelope, envelope_from_json,
                       envelope_to_json, make_envelope, raw_envelope,
                       rms_modal_bandwidth, solve_shape_param)
from .errors import CombNoiseError, ContractError, DomainError, NumericError
from .report import NoiseReport
from .states import (CovarianceModel, QuantumSpec, add_classical_noise,
                     build_covariance, quadratic_form_variance)
from .ofd import (OfdWeights, amplitude_noise_psd, classical_transfer, cw_pair,
                  eta_enhancement, general_phase_estimator_weights, ofd_weights,
                  phase_noise_psd, suppression_ratio)
from .dcs import (DcsSetup, SampleResponse, advantage_curve, localized_absorber,
                  photocurrent_psd, sql_psd, transmittance_snr,
                  transmittance_variance, transparent_sample)
from .stochastic import (TraceConfig, estimate_psd, mean_photocurrent,
                         sample_photocurrent, si_cyclo_preset, variance_trace)

__all__ = [
    "__version__",
    "CombEnvelope", "PhasedEnvelope", "make_envelope", "raw_envelope",
    "rms_modal_bandwidth", "solve_shape_param", "envelope_to_json",
    "envelope_from_json",
    "CombNoiseError", "DomainError", "ContractError", "NumericError",
    "NoiseReport",
    "QuantumSpec", "CovarianceModel", "build_covariance",
    "quadratic_form_variance", "add_classical_noise",
    "OfdWeights", "ofd_weights", "general_phase_estimator_weights",
    "phase_noise_psd", "amplitude_noise_psd", "suppression_ratio",
    "eta_enhancement", "classical_transfer", "cw_pair",
    "DcsSetup", "SampleResponse", "transparent_sample", "localized_absorber",
    "photocurrent_psd", "sql_psd", "transmittance_snr", "transmittance_variance",
    "advantage_curve",
    "TraceConfig", "variance_trace", "mean_photocurrent", "sample_photocurrent",
    "estimate_psd", "si_cyclo_preset",
]
