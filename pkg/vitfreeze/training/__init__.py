"""
Entrenamiento: AdamW, modelo de costo, preparación de batches y ciclo principal.
"""

from vitfreeze.training.cost import (
    CostMeter,
    CostProfile,
    predict_speedup,
    project_gpu_hours,
    speedup_report,
)
from vitfreeze.training.optimizer import OptimizerState, adamw_step
from vitfreeze.training.prefetch import BatchPrefetcher, PreparedBatch, prepare_batch
from vitfreeze.training.trainer import Trainer, compare_with_baseline, effective_lr, run_baseline, train

__all__ = [
    "OptimizerState",
    "adamw_step",
    "CostProfile",
    "CostMeter",
    "predict_speedup",
    "project_gpu_hours",
    "speedup_report",
    "BatchPrefetcher",
    "PreparedBatch",
    "prepare_batch",
    "Trainer",
    "train",
    "compare_with_baseline",
    "run_baseline",
    "effective_lr",
]
