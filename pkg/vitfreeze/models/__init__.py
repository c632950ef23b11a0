"""
Modelo ViT con decodificadores multi-escala y capas congelables.
"""

from vitfreeze.models.checkpoint import load_checkpoint, read_checkpoint, save_checkpoint
from vitfreeze.models.decoder import DecoderHead
from vitfreeze.models.encoder import FreezableLayer, PatchEmbedding
from vitfreeze.models.layers import Attention, Block, LayerNorm, Linear
from vitfreeze.models.patches import patchify, sincos_2d, unpatchify
from vitfreeze.models.vit_mim import DECODER_GROUP, ViTMIM, layer_group

__all__ = [
    # Capas
    "Linear",
    "LayerNorm",
    "Attention",
    "Block",
    # Encoder / decoder
    "PatchEmbedding",
    "FreezableLayer",
    "DecoderHead",
    "ViTMIM",
    "DECODER_GROUP",
    "layer_group",
    # Parches
    "patchify",
    "unpatchify",
    "sincos_2d",
    # Checkpoint
    "save_checkpoint",
    "load_checkpoint",
    "read_checkpoint",
]
