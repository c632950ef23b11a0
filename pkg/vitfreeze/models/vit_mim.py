"""
ViT con decodificadores LocalMIM y congelamiento progresivo.

El encoder tiene ``num_blocks + 1`` capas congelables: la capa 0 es el
patch embedding, las capas 1..L los bloques. Las capas congeladas forman
siempre un prefijo; se ejecutan en modo inferencia, sin grabar en la cinta.
"""

import logging
from typing import Dict, List, Optional, Protocol, Tuple, Union

import numpy as np

from vitfreeze.autograd.tensor import Tensor, no_grad
from vitfreeze.models.decoder import DecoderHead
from vitfreeze.models.encoder import FreezableLayer, PatchEmbedding
from vitfreeze.models.layers import Block, Params
from vitfreeze.models.patches import patchify
from vitfreeze.objective.hog import SupervisionTarget
from vitfreeze.objective.loss import LossResult, local_mim_loss
from vitfreeze.objective.masking import MaskBatch
from vitfreeze.schemas.model import ModelConfig
from vitfreeze.utils.errors import ContractError, DimensionError

logger = logging.getLogger(__name__)

DECODER_GROUP = "decoders"


class DiscardsState(Protocol):
    def discard(self, params: List[Tensor]) -> None: ...


def layer_group(index: int) -> str:
    return f"encoder.layers.{index}"


class ViTMIM:
    """
    Encoder ViT + cabezas decodificadoras por tap.

    Args:
        config: Forma del modelo
        seed: Semilla de inicialización
        dtype: np.float32 o np.float64
    """

    def __init__(self, config: ModelConfig, seed: int = 0, dtype: Union[str, np.dtype] = np.float32):
        self.config = config
        self.dtype = np.dtype(dtype)
        rng = np.random.default_rng(seed)

        layers: List[FreezableLayer] = [
            FreezableLayer(0, PatchEmbedding(rng, config.patch_dim, config.embed_dim, config.grid, self.dtype))
        ]
        for i in range(1, config.num_blocks + 1):
            block = Block(
                rng,
                config.embed_dim,
                config.num_heads,
                config.mlp_hidden,
                self.dtype,
                config.ln_eps,
                config.gelu_approximate,
            )
            layers.append(FreezableLayer(i, block))
        self.layers = layers

        self.heads: List[DecoderHead] = [
            DecoderHead(rng, config, k, tap, scale, self.dtype)
            for k, (tap, scale) in enumerate(zip(config.tap_layers, config.supervision_scales))
        ]

    # ============================================
    # ESTADO
    # ============================================
    @property
    def num_layers(self) -> int:
        return len(self.layers)

    @property
    def frozen_prefix(self) -> int:
        """Número de capas congeladas al inicio del encoder."""
        count = 0
        for layer in self.layers:
            if not layer.frozen:
                break
            count += 1
        return count

    def alive_heads(self) -> List[DecoderHead]:
        return [h for h in self.heads if not h.pruned]

    def parameters(self) -> Params:
        params: Params = {}
        for layer in self.layers:
            params.update(layer.parameters())
        for head in self.heads:
            params.update(head.parameters())
        return params

    def param_groups(self) -> List[Tuple[str, Params]]:
        """
        Grupos del optimizador: uno por capa congelable y uno para las
        cabezas vivas. Los grupos congelados o podados se omiten.
        """
        groups: List[Tuple[str, Params]] = [
            (layer_group(layer.index), layer.parameters()) for layer in self.layers if not layer.frozen
        ]
        decoders: Params = {}
        for head in self.alive_heads():
            decoders.update(head.parameters())
        if decoders:
            groups.append((DECODER_GROUP, decoders))
        return groups

    # ============================================
    # FORWARD
    # ============================================
    def encoder_forward(
        self,
        patches: Union[np.ndarray, Tensor],
        visible_index: np.ndarray,
        frozen_prefix: Optional[int] = None,
    ) -> Dict[int, Tensor]:
        """
        Corre el encoder sobre los parches visibles.

        Args:
            patches: Parches visibles crudos [B, V, P²·C]
            visible_index: Índices de esos parches [B, V]
            frozen_prefix: Capas a correr en modo inferencia (por defecto, las congeladas)

        Returns:
            dict: tap → activación [B, V, D] después del bloque ``tap``

        Raises:
            ContractError: Si frozen_prefix excede el número de capas
        """
        prefix = self.frozen_prefix if frozen_prefix is None else int(frozen_prefix)
        if not 0 <= prefix <= self.num_layers:
            raise ContractError(f"frozen_prefix={prefix} fuera de [0, {self.num_layers}]")
        x = patches if isinstance(patches, Tensor) else Tensor(np.asarray(patches, dtype=self.dtype))
        if x.ndim != 3 or x.shape[-1] != self.config.patch_dim:
            raise DimensionError(f"encoder_forward espera [B, V, {self.config.patch_dim}], recibido {x.shape}")

        taps = set(self.config.tap_layers)
        activations: Dict[int, Tensor] = {}
        for layer in self.layers:
            if layer.index < prefix:
                with no_grad():
                    x = layer(x, visible_index)
            else:
                x = layer(x, visible_index)
            if layer.index in taps:
                activations[layer.index] = x
        return activations

    def decoder_forward(self, head: DecoderHead, tap_activation: Tensor, masks: MaskBatch) -> Tensor:
        """Predicción de ``head`` a su escala: [B, bins, s, s]."""
        return head(tap_activation, masks.visible)

    def visible_patches(self, images: np.ndarray, masks: MaskBatch) -> np.ndarray:
        """Parches de las posiciones visibles: [B, V, P²·C]."""
        patches = patchify(np.asarray(images, dtype=self.dtype), self.config.patch_size)
        rows = np.arange(patches.shape[0])[:, None]
        return patches[rows, masks.visible]

    def predict(self, images: np.ndarray, masks: MaskBatch) -> Dict[int, Tensor]:
        """Predicciones de las cabezas vivas, tap → [B, bins, s, s]."""
        activations = self.encoder_forward(self.visible_patches(images, masks), masks.visible)
        return {
            head.tap_index: self.decoder_forward(head, activations[head.tap_index], masks)
            for head in self.alive_heads()
        }

    def forward_loss(
        self,
        images: np.ndarray,
        masks: MaskBatch,
        targets: SupervisionTarget,
        weights: Optional[Dict[int, float]] = None,
    ) -> LossResult:
        """Pérdida LocalMIM sobre las cabezas vivas."""
        if not self.alive_heads():
            return local_mim_loss({}, targets, masks)
        return local_mim_loss(self.predict(images, masks), targets, masks, weights)

    # ============================================
    # CONGELAMIENTO Y PODA
    # ============================================
    def freeze_layer(self, index: int, step: int, optimizer: Optional[DiscardsState] = None) -> None:
        """
        Congela la capa ``index`` y descarta su estado en el optimizador.

        Raises:
            ContractError: Si alguna capa anterior sigue entrenable o la capa ya estaba congelada
        """
        if not 0 <= index < self.num_layers:
            raise ContractError(f"capa {index} fuera de [0, {self.num_layers})")
        layer = self.layers[index]
        if layer.frozen:
            raise ContractError(f"la capa {index} ya está congelada")
        if self.frozen_prefix != index:
            raise ContractError(
                f"congelamiento fuera de orden: capa {index} con frozen_prefix={self.frozen_prefix}"
            )
        layer.freeze(step)
        if optimizer is not None:
            optimizer.discard(list(layer.parameters().values()))
        logger.info("Capa %d congelada en la iteración %d", index, step)

    def prune_decoder_if_dead(
        self,
        head: DecoderHead,
        step: Optional[int] = None,
        optimizer: Optional[DiscardsState] = None,
    ) -> bool:
        """
        Poda la cabeza cuando todas las capas 0..tap están congeladas.

        Returns:
            bool: Si la cabeza está podada después de la llamada
        """
        if head.pruned:
            return True
        if self.frozen_prefix < head.tap_index + 1:
            return False
        head.pruned = True
        head.pruned_step = step
        for p in head.parameters().values():
            p.requires_grad = False
        if optimizer is not None:
            optimizer.discard(list(head.parameters().values()))
        logger.info("Decodificador del tap %d podado en la iteración %s", head.tap_index, step)
        return True

