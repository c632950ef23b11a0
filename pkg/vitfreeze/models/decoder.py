"""
Cabezas decodificadoras multi-escala.

Cada cabeza lee la salida de un bloque del encoder (tap), inserta el token
de máscara en las posiciones ocultas, corre un bloque transformer,
reensambla la rejilla de tokens y la lleva a su escala de supervisión con
una cadena de upsample2x / avgpool2x antes de proyectar a los bins del HOG.
"""

import math
from typing import List, Optional

import numpy as np

from vitfreeze.autograd import ops
from vitfreeze.autograd.tensor import Tensor
from vitfreeze.models.layers import Block, LayerNorm, Linear, Params
from vitfreeze.models.patches import sincos_2d
from vitfreeze.schemas.model import ModelConfig
from vitfreeze.utils.errors import ContractError


class DecoderHead:
    """
    Decodificador de un tap.

    Attributes:
        index: Posición de la cabeza en ``tap_layers``
        tap_index: Bloque del encoder que alimenta la cabeza
        scale: Lado del mapa de salida
        chain: Pasos "up" / "pool" (vacía = identidad)
        pruned: Monótono; una cabeza podada no vuelve
        pruned_step: Iteración en que se podó
    """

    def __init__(
        self,
        rng: np.random.Generator,
        config: ModelConfig,
        index: int,
        tap_index: int,
        scale: int,
        dtype: np.dtype,
    ):
        dd = config.decoder_dim
        self.index = index
        self.tap_index = tap_index
        self.scale = scale
        self.grid = config.grid
        self.num_patches = config.num_patches
        self.chain: List[str] = config.rescale_chain(scale)

        self.embed = Linear(rng, config.embed_dim, dd, dtype)
        self.mask_token = Tensor(rng.normal(0.0, 0.02, size=dd).astype(dtype), requires_grad=True)
        self.pos_embed = sincos_2d(dd, config.grid).astype(dtype)
        self.block = Block(
            rng,
            dd,
            config.decoder_heads,
            int(round(dd * config.mlp_ratio)),
            dtype,
            config.ln_eps,
            config.gelu_approximate,
        )
        self.norm = LayerNorm(dd, dtype, config.ln_eps)

        # Un kernel 2x2 por paso de upsample
        limit = math.sqrt(6.0 / (8 * dd))
        self.up_weights: List[Tensor] = []
        self.up_biases: List[Tensor] = []
        for step in self.chain:
            if step != "up":
                continue
            self.up_weights.append(
                Tensor(rng.uniform(-limit, limit, size=(dd, dd, 2, 2)).astype(dtype), requires_grad=True)
            )
            self.up_biases.append(Tensor(np.zeros(dd, dtype=dtype), requires_grad=True))

        self.proj = Linear(rng, dd, config.hog_bins, dtype)
        self.pruned = False
        self.pruned_step: Optional[int] = None

    @property
    def prefix(self) -> str:
        return f"decoders.{self.index}."

    def parameters(self) -> Params:
        params: Params = {}
        for key, p in self.embed.parameters().items():
            params[f"embed.{key}"] = p
        params["mask_token"] = self.mask_token
        for key, p in self.block.parameters().items():
            params[f"block.{key}"] = p
        for key, p in self.norm.parameters().items():
            params[f"norm.{key}"] = p
        for k, (w, b) in enumerate(zip(self.up_weights, self.up_biases)):
            params[f"up.{k}.weight"] = w
            params[f"up.{k}.bias"] = b
        for key, p in self.proj.parameters().items():
            params[f"proj.{key}"] = p
        return {f"{self.prefix}{k}": v for k, v in params.items()}

    def __call__(self, tap_activation: Tensor, visible_index: np.ndarray) -> Tensor:
        """
        Args:
            tap_activation: [B, V, D] tokens visibles del tap
            visible_index: [B, V]

        Returns:
            Tensor: Predicción [B, bins, s, s]

        Raises:
            ContractError: Si la cabeza ya fue podada
        """
        if self.pruned:
            raise ContractError(f"la cabeza del tap {self.tap_index} está podada")
        b = tap_activation.shape[0]
        g = self.grid
        x = self.embed(tap_activation)
        x = ops.merge_tokens(x, self.mask_token, visible_index, self.num_patches)
        x = ops.add(x, self.pos_embed)
        x = self.norm(self.block(x))
        # [B, N, Dd] → [B, Dd, g, g]
        x = ops.transpose(ops.reshape(x, (b, g, g, x.shape[-1])), (0, 3, 1, 2))

        up = 0
        for step in self.chain:
            if step == "up":
                x = ops.upsample2x(x, self.up_weights[up], self.up_biases[up])
                up += 1
            else:
                x = ops.avgpool2x(x)

        # proyección por posición: [B, s, s, Dd] → [B, s, s, bins] → [B, bins, s, s]
        x = self.proj(ops.transpose(x, (0, 2, 3, 1)))
        return ops.transpose(x, (0, 3, 1, 2))
