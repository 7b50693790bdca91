"""Fault diagnosis workbench for rotating machinery.

Synthetic vibration generation, spectral preprocessing, time-series
augmentation, a small from-scratch 1D CNN and Grad-CAM explanations.
"""

from ._faultdx import (
    __version__,
    amplitude_shift,
    compute_q_aug,
    diagnose,
    explain,
    fft_magnitude,
    gaussian_noise,
    gen_baseline_surrogate,
    gen_condition,
    label_names,
    masking_noise,
    preprocess,
    signal_translation,
    time_stretch,
    train_model,
)

__all__ = [
    "__version__",
    "amplitude_shift",
    "compute_q_aug",
    "diagnose",
    "explain",
    "fft_magnitude",
    "gaussian_noise",
    "gen_baseline_surrogate",
    "gen_condition",
    "label_names",
    "masking_noise",
    "preprocess",
    "signal_translation",
    "time_stretch",
    "train_model",
]
