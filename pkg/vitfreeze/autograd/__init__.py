"""
Librería mínima de tensores con diferenciación automática en modo reverso.
"""

from .ops import (
    add,
    avgpool2x,
    frozen_boundary,
    gather_tokens,
    gelu,
    layer_norm,
    matmul,
    mean,
    merge_tokens,
    mul,
    reshape,
    scale,
    softmax_last,
    sub,
    transpose,
    upsample2x,
)
from .tensor import Tape, Tensor, backward, no_grad, recording, set_debug

__all__ = [
    # Núcleo
    "Tensor",
    "Tape",
    "backward",
    "no_grad",
    "recording",
    "set_debug",

    # Operaciones
    "add",
    "sub",
    "mul",
    "scale",
    "mean",
    "reshape",
    "transpose",
    "matmul",
    "layer_norm",
    "softmax_last",
    "gelu",
    "upsample2x",
    "avgpool2x",
    "gather_tokens",
    "merge_tokens",
    "frozen_boundary",
]
