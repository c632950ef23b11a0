"""
Objetivo de preentrenamiento: máscaras, objetivos HOG y pérdida LocalMIM.
"""

from .hog import SupervisionTarget, build_targets, hog_features
from .loss import LossResult, local_mim_loss
from .masking import MaskBatch, MaskPlan, batch_seed, sample_mask

__all__ = [
    "MaskPlan",
    "MaskBatch",
    "sample_mask",
    "batch_seed",
    "SupervisionTarget",
    "hog_features",
    "build_targets",
    "LossResult",
    "local_mim_loss",
]
