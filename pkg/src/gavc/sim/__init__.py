"""Monte Carlo simulation of rotated codebooks, the dirty-paper encoder and the broadcast code."""

from .broadcast import (
    BroadcastReport,
    SuperpositionCode,
    build_superposition_code,
    competitor_error_probability,
    householder_embed,
    householder_project,
    run_broadcast_trials,
    superposition_encode,
)
from .dpc import DpcEncoderConfig, bin_rate_threshold, build_dpc_code, dpc_encode, encoder_failure_trials
from .estimate import ErrorEstimate, from_counts, wilson_interval
from .jammers import (
    JAMMERS,
    FixedVector,
    GaussianNoise,
    JammerStrategy,
    NoJammer,
    OrthogonalNoise,
    SphereUniform,
    SymmetrizeCodeword,
    check_power,
    symmetrize_attack,
)
from .trials import (
    TrialReport,
    build_code,
    is_nonincreasing,
    key_size_sweep,
    min_distance_decode,
    pairwise_min_distance,
    run_trials,
)

__all__ = [
    "BroadcastReport", "SuperpositionCode", "build_superposition_code", "householder_embed",
    "householder_project", "run_broadcast_trials", "superposition_encode", "competitor_error_probability",
    "DpcEncoderConfig", "bin_rate_threshold", "build_dpc_code", "dpc_encode", "encoder_failure_trials",
    "ErrorEstimate", "from_counts", "wilson_interval",
    "JAMMERS", "FixedVector", "GaussianNoise", "JammerStrategy", "NoJammer", "OrthogonalNoise",
    "SphereUniform", "SymmetrizeCodeword", "check_power", "symmetrize_attack",
    "TrialReport", "build_code", "is_nonincreasing", "key_size_sweep", "min_distance_decode", "pairwise_min_distance", "run_trials",
]
