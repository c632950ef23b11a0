"""
Parches y embeddings posicionales.
"""

from typing import Union

import numpy as np

from vitfreeze.autograd.tensor import Tensor
from vitfreeze.utils.errors import DimensionError

ImageLike = Union[np.ndarray, Tensor]


def patchify(image: ImageLike, patch_size: int) -> ImageLike:
    """
    Divide una imagen en parches en orden raster.

    La fila k es el parche k aplanado en orden (fila, columna, canal), con
    el canal como índice más rápido. Acepta dimensiones de batch al inicio.

    Args:
        image: [..., C, H, W]
        patch_size: Lado P

    Returns:
        [..., N, P²·C] del mismo tipo que la entrada

    Raises:
        DimensionError: Si H o W no son divisibles por P
    """
    data = image.data if isinstance(image, Tensor) else np.asarray(image)
    *lead, c, h, w = data.shape
    p = patch_size
    if h % p or w % p:
        raise DimensionError(f"patchify: {h}x{w} no es divisible por P={p}")
    gh, gw = h // p, w // p
    x = data.reshape(tuple(lead) + (c, gh, p, gw, p))
    n = len(lead)
    # (..., gh, gw, py, px, c)
    x = x.transpose(tuple(range(n)) + (n + 1, n + 3, n + 2, n + 4, n))
    out = np.ascontiguousarray(x).reshape(tuple(lead) + (gh * gw, p * p * c))
    return Tensor(out) if isinstance(image, Tensor) else out


def unpatchify(patches: ImageLike, patch_size: int, channels: int, height: int, width: int) -> ImageLike:
    """Inversa exacta de patchify."""
    data = patches.data if isinstance(patches, Tensor) else np.asarray(patches)
    *lead, _, _ = data.shape
    p, c = patch_size, channels
    gh, gw = height // p, width // p
    n = len(lead)
    x = data.reshape(tuple(lead) + (gh, gw, p, p, c))
    # (..., c, gh, py, gw, px)
    x = x.transpose(tuple(range(n)) + (n + 4, n, n + 2, n + 1, n + 3))
    out = np.ascontiguousarray(x).reshape(tuple(lead) + (c, height, width))
    return Tensor(out) if isinstance(patches, Tensor) else out


# ============================================
# EMBEDDING POSICIONAL SIN-COS 2D (fijo)
# ============================================
def _sincos_1d(dim: int, positions: np.ndarray) -> np.ndarray:
    omega = 1.0 / 10000 ** (np.arange(dim // 2, dtype=np.float64) / (dim / 2.0))
    angles = np.outer(positions.reshape(-1), omega)
    return np.concatenate([np.sin(angles), np.cos(angles)], axis=1)


def sincos_2d(dim: int, grid: int) -> np.ndarray:
    """
    Tabla [grid², dim] en orden raster: la mitad para la fila, la mitad para la columna.
    """
    rows, cols = np.meshgrid(np.arange(grid, dtype=np.float64), np.arange(grid, dtype=np.float64), indexing="ij")
    return np.concatenate([_sincos_1d(dim // 2, rows), _sincos_1d(dim // 2, cols)], axis=1)
