"""
Capas congelables del encoder.

La capa 0 es el patch embedding (con el embedding posicional fijo) y las
capas 1..L son los bloques transformer. Congelar una capa pasa todos sus
parámetros, pesos y sesgos, a no entrenables a la vez.
"""

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from vitfreeze.autograd import ops
from vitfreeze.autograd.tensor import Tensor
from vitfreeze.models.layers import Block, Linear, Params
from vitfreeze.models.patches import sincos_2d


class PatchEmbedding:
    """
    Proyección lineal de parches a D más embedding posicional sin-cos fijo.
    Sólo recibe los parches visibles y sus índices.
    """

    def __init__(self, rng: np.random.Generator, patch_dim: int, embed_dim: int, grid: int, dtype: np.dtype):
        self.proj = Linear(rng, patch_dim, embed_dim, dtype)
        self.pos_embed = sincos_2d(embed_dim, grid).astype(dtype)

    def __call__(self, patches: Tensor, visible_index: np.ndarray) -> Tensor:
        return ops.add(self.proj(patches), self.pos_embed[visible_index])

    def parameters(self, prefix: Optional[str] = None) -> Params:
        params = {f"proj.{k}": v for k, v in self.proj.parameters().items()}
        if prefix:
            params = {f"{prefix}{k}": v for k, v in params.items()}
        return params

# ============================================
# CAPA CONGELABLE
# ============================================
@dataclass
class FreezableLayer:
    """
    Unidad de congelamiento.

    Attributes:
        index: 0 = patch embedding, 1..L = bloques
        module: PatchEmbedding o Block
        frozen: Monótono: una vez True no vuelve a False
        freeze_step: Iteración en que se congeló
    """

    index: int
    module: Union[PatchEmbedding, Block]
    frozen: bool = False
    freeze_step: Optional[int] = None

    @property
    def prefix(self) -> str:
        return f"encoder.layers.{self.index}."

    def parameters(self) -> Params:
        return self.module.parameters(self.prefix)

    def freeze(self, step: int) -> None:
        if self.frozen:
            return
        for p in self.parameters().values():
            p.requires_grad = False
        self.frozen = True
        self.freeze_step = step

    def __call__(self, x: Tensor, visible_index: np.ndarray) -> Tensor:
        if isinstance(self.module, PatchEmbedding):
            return self.module(x, visible_index)
        return self.module(x)
