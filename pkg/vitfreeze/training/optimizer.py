"""
AdamW con learning rate por grupo de parámetros.

Los grupos son las capas congelables del encoder y los decodificadores;
el trainer inyecta en cada paso el learning rate de cada grupo.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np

from vitfreeze.autograd.tensor import Tensor
from vitfreeze.utils.errors import ContractError

Groups = Sequence[Tuple[str, Mapping[str, Tensor]]]


@dataclass
class Moments:
    m: np.ndarray
    v: np.ndarray
    step: int = 0


@dataclass
class OptimizerState:
    """
    Estado de AdamW.

    Attributes:
        betas: (β1, β2)
        eps: Épsilon del denominador
        weight_decay: Decaimiento desacoplado (sólo parámetros de rango ≥ 2)
        moments: node_id → momentos; sólo existen para parámetros entrenables
    """

    betas: Tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-8
    weight_decay: float = 0.05
    moments: Dict[int, Moments] = field(default_factory=dict)

    def discard(self, params: Iterable[Tensor]) -> None:
        """Elimina los momentos de parámetros que ya no se entrenan."""
        for p in params:
            self.moments.pop(p.node_id, None)

    def __len__(self) -> int:
        return len(self.moments)


def adamw_step(
    groups: Groups,
    grads: Mapping[int, Tensor],
    lrs: Mapping[str, float],
    state: OptimizerState,
) -> List[str]:
    """
    Un paso de AdamW.

    El decaimiento desacoplado se aplica sólo a parámetros de rango ≥ 2
    (matrices y kernels); sesgos, ganancias de LayerNorm y el mask token no
    decaen, a diferencia de AdamW aplicado a todos los tensores.

    Args:
        groups: (grupo, nombre → parámetro) de los grupos entrenables
        grads: node_id → gradiente (salida de backward)
        lrs: grupo → learning rate de este paso
        state: Estado a actualizar

    Returns:
        list: Nombres de los parámetros actualizados

    Raises:
        ContractError: Si hay gradiente para un parámetro no entrenable
    """
    trainable = {p.node_id for _, params in groups for p in params.values() if p.requires_grad}
    stray = [nid for nid in grads if nid not in trainable]
    if stray:
        raise ContractError(f"gradiente para {len(stray)} parámetro(s) no entrenable(s)")

    b1, b2 = state.betas
    updated: List[str] = []
    for group, params in groups:
        lr = float(lrs[group])
        for name, p in params.items():
            if not p.requires_grad:
                continue
            g = grads.get(p.node_id)
            if g is None:
                continue
            gd = g.data.astype(p.dtype, copy=False)
            mom = state.moments.get(p.node_id)
            if mom is None:
                mom = Moments(np.zeros_like(p.data), np.zeros_like(p.data))
                state.moments[p.node_id] = mom
            mom.step += 1
            mom.m = b1 * mom.m + (1.0 - b1) * gd
            mom.v = b2 * mom.v + (1.0 - b2) * gd * gd
            m_hat = mom.m / (1.0 - b1**mom.step)
            v_hat = mom.v / (1.0 - b2**mom.step)

            data = p.data
            if state.weight_decay and p.ndim >= 2:
                data = data * (1.0 - lr * state.weight_decay)
            p.data = (data - lr * m_hat / (np.sqrt(v_hat) + state.eps)).astype(p.dtype, copy=False)
            updated.append(name)
    return updated
