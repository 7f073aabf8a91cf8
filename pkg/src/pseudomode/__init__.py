"""Smoothed Hamming (pseudo-mode) losses, optimizers and location estimates."""

__version__ = "0.1.0"

from .estimator import (
    EstimateReport,
    PseudoModeEstimator,
    baselines,
    estimate,
    grid_oracle,
    normalize,
    pseudo_mode,
)
from .losses import (
    ExtendedLoss,
    GeneralizedHuberLoss,
    PiecewiseLoss,
    PseudoHuberLoss,
    Region,
    SmoothedHammingLoss,
)
from .objective import Objective, SampleSet

__all__ = [
    "EstimateReport",
    "ExtendedLoss",
    "GeneralizedHuberLoss",
    "Objective",
    "PiecewiseLoss",
    "PseudoHuberLoss",
    "PseudoModeEstimator",
    "Region",
    "SampleSet",
    "SmoothedHammingLoss",
    "baselines",
    "estimate",
    "grid_oracle",
    "normalize",
    "pseudo_mode",
]
