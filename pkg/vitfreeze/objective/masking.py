"""
Muestreo de máscaras de parches y su proyección a cada escala de supervisión.
"""

from dataclasses import dataclass, field
from typing import Dict, Sequence

import numpy as np

from vitfreeze.utils.errors import ConfigError, ContractError


def masked_count(num_patches: int, ratio: float) -> int:
    """M = round(r·N), redondeando .5 hacia arriba."""
    return int(np.floor(ratio * num_patches + 0.5))


def scale_mask(patch_mask: np.ndarray, scale: int) -> np.ndarray:
    """
    Lleva una máscara de parches [..., g, g] a la escala ``scale``.

    En escalas iguales o más finas que la rejilla cada parche difunde su
    valor 0/1 a las posiciones que cubre. En escalas más gruesas cada región
    toma la fracción de sus parches enmascarados.
    """
    g = patch_mask.shape[-1]
    m = patch_mask.astype(np.float64)
    if scale >= g:
        k = scale // g
        return np.repeat(np.repeat(m, k, axis=-2), k, axis=-1)
    k = g // scale
    lead = m.shape[:-2]
    return m.reshape(lead + (scale, k, scale, k)).mean(axis=(-3, -1))


# ============================================
# PLAN DE MÁSCARA (una imagen)
# ============================================
@dataclass(frozen=True)
class MaskPlan:
    """
    Máscara de una imagen.

    Attributes:
        num_patches: N
        masked_indices: Parches ocultos (ordenados), tamaño M
        visible_indices: Parches visibles (ordenados), tamaño N - M
        scale_masks: escala → pesos [s, s] (1 = enmascarado)
        rng_seed: Semilla que generó el plan
    """

    num_patches: int
    masked_indices: np.ndarray
    visible_indices: np.ndarray
    rng_seed: int
    scale_masks: Dict[int, np.ndarray] = field(default_factory=dict)

    def patch_mask(self) -> np.ndarray:
        m = np.zeros(self.num_patches, dtype=bool)
        m[self.masked_indices] = True
        return m


def sample_mask(
    rng_seed: int,
    num_patches: int,
    ratio: float,
    scales: Sequence[int] = (),
) -> MaskPlan:
    """
    Subconjunto uniforme sin reemplazo de tamaño round(r·N).

    Args:
        rng_seed: Semilla (mismo valor → mismo plan)
        num_patches: N (debe ser un cuadrado para proyectar a escalas)
        ratio: r en (0, 1)
        scales: Escalas de supervisión a precalcular

    Raises:
        ConfigError: Si r no está en (0, 1) o no quedan parches visibles
        ContractError: Si N < 2
    """
    if not 0.0 < ratio < 1.0:
        raise ConfigError(f"mask_ratio debe estar en (0, 1), recibido {ratio}")
    if num_patches < 2:
        raise ContractError(f"se necesitan al menos 2 parches, recibido N={num_patches}")
    m = masked_count(num_patches, ratio)
    if m >= num_patches:
        raise ConfigError(f"mask_ratio={ratio} no deja parches visibles con N={num_patches}")

    rng = np.random.default_rng(rng_seed)
    order = rng.permutation(num_patches)
    masked = np.sort(order[:m])
    visible = np.sort(order[m:])

    plan = MaskPlan(num_patches, masked, visible, rng_seed)
    if scales:
        g = int(round(np.sqrt(num_patches)))
        grid = plan.patch_mask().reshape(g, g)
        for s in scales:
            plan.scale_masks[s] = scale_mask(grid, s)
    return plan


# ============================================
# BATCH DE MÁSCARAS
# ============================================
@dataclass(frozen=True)
class MaskBatch:
    """Planes apilados de un batch (todos con el mismo M)."""

    visible: np.ndarray
    masked: np.ndarray
    scale_masks: Dict[int, np.ndarray]

    @property
    def batch_size(self) -> int:
        return int(self.visible.shape[0])

    @property
    def num_patches(self) -> int:
        return int(self.visible.shape[1] + self.masked.shape[1])

    @classmethod
    def from_plans(cls, plans: Sequence[MaskPlan]) -> "MaskBatch":
        if not plans:
            raise ContractError("MaskBatch necesita al menos un plan")
        scales = plans[0].scale_masks.keys()
        return cls(
            visible=np.stack([p.visible_indices for p in plans]),
            masked=np.stack([p.masked_indices for p in plans]),
            scale_masks={s: np.stack([p.scale_masks[s] for p in plans]) for s in scales},
        )


def batch_seed(seed: int, step: int, item: int) -> int:
    """Semilla derivada para la máscara de la imagen ``item`` del paso ``step``."""
    return int(np.random.SeedSequence([seed, step, item]).generate_state(1)[0])
