"""
Esquemas Pydantic de salida: reporte de entrenamiento y de speedup.
"""

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


# ============================================
# EVENTOS
# ============================================
class FreezeEvent(BaseModel):
    """Capa congelada al terminar la iteración ``step``."""

    layer: int
    step: int


class PruneEvent(BaseModel):
    """Decodificador (identificado por su tap) retirado al terminar ``step``."""

    head: int
    step: int


# ============================================
# REPORTE DE ENTRENAMIENTO
# ============================================
class TrainReport(BaseModel):
    """
    Resultado de train().

    Las trazas por paso (tiempo, prefijo congelado, cabezas vivas) se
    serializan aparte en trace.csv; el JSON lleva pérdida, eventos y razones.
    """

    loss_trace: List[float] = Field(default_factory=list)
    freeze_events: List[FreezeEvent] = Field(default_factory=list)
    prune_events: List[PruneEvent] = Field(default_factory=list)
    predicted_work_ratio: float = 1.0
    measured_time_ratio: Optional[float] = Field(
        None,
        description="Media (no mediana) del tiempo por iteración congelando contra la línea base; "
        "la media reproduce la razón de tiempo total que predice el modelo de costo",
    )
    steps_run: int = 0
    aborted: bool = False
    diagnostics: Optional[Dict[str, Any]] = None

    # trazas auxiliares (no van al JSON)
    iter_ms: List[float] = Field(default_factory=list, exclude=True)
    frozen_prefix_trace: List[int] = Field(default_factory=list, exclude=True)
    alive_heads_trace: List[int] = Field(default_factory=list, exclude=True)


# ============================================
# REPORTE DE SPEEDUP
# ============================================
class SpeedupReport(BaseModel):
    """
    Predicción del modelo de costo junto a la medición de referencia
    publicada para ViT-B (0.48 → 0.42 horas GPU por época).
    """

    predicted_work_ratio: float
    predicted_reduction: float
    predicted_work_ratio_without_pruning: float
    reference_baseline_hours: float = 0.48
    reference_frozen_hours: float = 0.42
    reference_reduction: float = 0.125
    projected_hours: float
    gap: float = Field(..., description="predicted_reduction - reference_reduction")
    measured_time_ratio: Optional[float] = Field(
        None,
        description="Media (no mediana) del tiempo por iteración congelando contra la línea base; "
        "la media reproduce la razón de tiempo total que predice el modelo de costo",
    )
