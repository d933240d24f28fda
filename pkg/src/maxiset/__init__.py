"""Penalized wavelet model selection and its maxisets in the Gaussian white noise model."""

from .coeffs import IndexSet, WaveletCoeffs
from .gwn import Observation, estimate_An_prob, kraft_sum, observe
from .model_collections import CollectionSpec, ModelSpec, PenaltyRule, select_model

__all__ = [
    "CollectionSpec",
    "IndexSet",
    "ModelSpec",
    "Observation",
    "PenaltyRule",
    "WaveletCoeffs",
    "estimate_An_prob",
    "kraft_sum",
    "observe",
    "select_model",
]
__version__ = "0.1.0"
