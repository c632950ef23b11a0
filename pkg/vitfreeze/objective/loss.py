"""
Pérdida LocalMIM multi-escala.

L = Σ_l w_l · Σ_i m_i^l · ½‖y_i^l − ŷ_i^l‖² / Σ_i m_i^l

El log-likelihood gaussiano de varianza unitaria se reduce a este error
cuadrático; la constante aditiva se descarta. Cada escala se normaliza por
su número de posiciones enmascaradas.
"""

from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Protocol

import numpy as np

from vitfreeze.autograd import ops
from vitfreeze.autograd.tensor import Tensor
from vitfreeze.objective.hog import SupervisionTarget
from vitfreeze.utils.errors import DimensionError


class HasScaleMasks(Protocol):
    scale_masks: Dict[int, np.ndarray]


@dataclass
class LossResult:
    """
    Attributes:
        total: Pérdida escalar
        terms: tap → término ya ponderado
        complete: True si no quedan escalas vivas (el entrenamiento terminó)
    """

    total: Tensor
    terms: Dict[int, Tensor] = field(default_factory=dict)
    complete: bool = False

    def term_values(self) -> Dict[int, float]:
        return {tap: float(t.data) for tap, t in self.terms.items()}


def scale_term(prediction: Tensor, target: np.ndarray, mask: np.ndarray) -> Tensor:
    """Término de una escala: ½ Σ m‖y − ŷ‖² / Σ m (0 si no hay posiciones enmascaradas)."""
    if prediction.shape != target.shape:
        raise DimensionError(f"predicción {prediction.shape} y objetivo {target.shape} no coinciden")
    weights = np.asarray(mask, dtype=prediction.dtype)[..., None, :, :]
    denom = float(weights.sum())
    diff = ops.sub(prediction, target.astype(prediction.dtype, copy=False))
    weighted = ops.sum(ops.mul(ops.mul(diff, diff), weights))
    return ops.scale(weighted, 0.5 / denom if denom > 0 else 0.0)


def local_mim_loss(
    predictions: Mapping[int, Tensor],
    targets: SupervisionTarget,
    masks: HasScaleMasks,
    weights: Optional[Mapping[int, float]] = None,
) -> LossResult:
    """
    Suma ponderada de los términos de las cabezas vivas.

    Args:
        predictions: tap → predicción [..., bins, s, s]; las cabezas podadas no aparecen
        targets: Mapas HOG por escala
        masks: Objeto con ``scale_masks`` (MaskPlan o MaskBatch)
        weights: tap → w_l (1 por defecto)

    Returns:
        LossResult: Con ``complete=True`` y pérdida 0 si no hay predicciones
    """
    if not predictions:
        return LossResult(total=Tensor(np.float64(0.0)), complete=True)

    terms: Dict[int, Tensor] = {}
    total: Optional[Tensor] = None
    for tap in sorted(predictions):
        pred = predictions[tap]
        s = pred.shape[-1]
        term = scale_term(pred, targets.maps[s], masks.scale_masks[s])
        w = 1.0 if weights is None else float(weights.get(tap, 1.0))
        if w != 1.0:
            term = ops.scale(term, w)
        terms[tap] = term
        total = term if total is None else ops.add(total, term)
    assert total is not None
    return LossResult(total=total, terms=terms)
