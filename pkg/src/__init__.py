"""This package computes achievable rate regions of the two-user Gaussian compound MAC
with common message under intersymbol interference."""

from .channel_model import (
    LINKS,
    ChannelSpec,
    ImpulseResponse,
    LinkName,
    NoiseModel,
    linear_output,
    noise_psd,
    transfer_function,
    validate_spec,
)
from .errors import CmaccError, DomainError, NumericError
from .optimizer import (
    BoundarySample,
    OptimizerConfig,
    WaterfillResult,
    exhaustive_weighted,
    optimize_weighted,
    project_power,
    trace_boundary,
    waterfill_single_user,
)
from .oracle import (
    CirculantMatrix,
    JointInputModel,
    build_channel_matrices,
    gaussian_mi_terms,
    psd_check,
)
from .rate_region import (
    Allocation,
    RateBounds,
    RatePoint,
    RegionConstraints,
    SpectralProfile,
    StrongInterferenceVerdict,
    is_achievable,
    max_weighted_rate,
    rate_terms_discrete,
    rate_terms_integral,
    region_constraints,
    region_vertices,
    sicc_region_constraints,
    strong_interference_check,
)
from .spectral import (
    SubchannelSet,
    circular_convolve,
    circular_output,
    decompose,
    dft,
    extend_impulse_response,
    idft,
    periodize_autocorrelation,
)

__all__ = [
    "LINKS",
    "ChannelSpec",
    "ImpulseResponse",
    "LinkName",
    "NoiseModel",
    "linear_output",
    "noise_psd",
    "transfer_function",
    "validate_spec",
    "CmaccError",
    "DomainError",
    "NumericError",
    "BoundarySample",
    "OptimizerConfig",
    "WaterfillResult",
    "exhaustive_weighted",
    "optimize_weighted",
    "project_power",
    "trace_boundary",
    "waterfill_single_user",
    "CirculantMatrix",
    "JointInputModel",
    "build_channel_matrices",
    "gaussian_mi_terms",
    "psd_check",
    "Allocation",
    "RateBounds",
    "RatePoint",
    "RegionConstraints",
    "SpectralProfile",
    "StrongInterferenceVerdict",
    "is_achievable",
    "max_weighted_rate",
    "rate_terms_discrete",
    "rate_terms_integral",
    "region_constraints",
    "region_vertices",
    "sicc_region_constraints",
    "strong_interference_check",
    "SubchannelSet",
    "circular_convolve",
    "circular_output",
    "decompose",
    "dft",
    "extend_impulse_response",
    "idft",
    "periodize_autocorrelation",
]
