"""
Spectral Miner - Signal Processing

Spectral primitives, the generalized Gaussian filter bank and the
differentiable feature modules.
"""

from dsp.spectral import (
    n_bins,
    bin_frequencies,
    one_sided_weights,
    standardize_array,
    standardize_trial,
    restandardize,
    rfft,
    irfft,
    analytic_signal,
    spectral_energy,
)
from dsp.filterbank import (
    GROUP_DELAY_S,
    FilterBank,
    alpha_from_fwhm,
    filter_response,
    filter_response_grad,
    init_bank,
    apply_filterbank,
    layout_for,
    validate_layout,
)
from dsp.features import (
    FeatureResult,
    feature_dim,
    count_parameters,
    feature_index_map,
    band_magnitude,
    correlation_features,
    plv_features,
    plv_direct_oracle,
)

__all__ = [
    # Spectral
    "n_bins",
    "bin_frequencies",
    "one_sided_weights",
    "standardize_array",
    "standardize_trial",
    "restandardize",
    "rfft",
    "irfft",
    "analytic_signal",
    "spectral_energy",
    # Filter bank
    "GROUP_DELAY_S",
    "FilterBank",
    "alpha_from_fwhm",
    "filter_response",
    "filter_response_grad",
    "init_bank",
    "apply_filterbank",
    "layout_for",
    "validate_layout",
    # Features
    "FeatureResult",
    "feature_dim",
    "count_parameters",
    "feature_index_map",
    "band_magnitude",
    "correlation_features",
    "plv_features",
    "plv_direct_oracle",
]
