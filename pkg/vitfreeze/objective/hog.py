"""
Descriptor HOG (histogram of oriented gradients) para los objetivos de reconstrucción.

Variante mínima: gradientes centrados [-1, 0, 1], bins sin signo sobre
[0, π) con interpolación lineal entre bins vecinos (el centro del bin k
está en k·π/bins), acumulación por celda y normalización L2 por celda.
"""

from dataclasses import dataclass
from typing import Dict, Sequence

import numpy as np

from vitfreeze.utils.errors import ConfigError, DimensionError

HOG_EPS = 1e-6


def image_gradients(images: np.ndarray):
    """
    Gradientes centrados por canal; el borde queda en cero.

    Returns:
        tuple: (gx, gy) con la forma de ``images`` [..., C, H, W]
    """
    x = np.asarray(images, dtype=np.float64)
    gx = np.zeros_like(x)
    gy = np.zeros_like(x)
    gx[..., :, 1:-1] = x[..., :, 2:] - x[..., :, :-2]
    gy[..., 1:-1, :] = x[..., 2:, :] - x[..., :-2, :]
    return gx, gy


def _bin_votes(gx: np.ndarray, gy: np.ndarray, num_bins: int) -> np.ndarray:
    """Votos por pixel [..., bins, H, W] repartidos entre los dos bins vecinos."""
    magnitude = np.hypot(gx, gy)
    theta = np.mod(np.arctan2(gy, gx), np.pi)
    pos = theta / (np.pi / num_bins)
    base = np.floor(pos)
    frac = pos - base
    lo = base.astype(np.int64) % num_bins
    hi = (lo + 1) % num_bins
    w_lo = magnitude * (1.0 - frac)
    w_hi = magnitude * frac

    votes = np.zeros(gx.shape[:-2] + (num_bins,) + gx.shape[-2:], dtype=np.float64)
    for b in range(num_bins):
        votes[..., b, :, :] = np.where(lo == b, w_lo, 0.0) + np.where(hi == b, w_hi, 0.0)
    return votes


def pixel_votes(images: np.ndarray, num_bins: int = 9, channel_rule: str = "max") -> np.ndarray:
    """
    Votos de orientación por pixel, ya reducidos sobre los canales.

    Args:
        images: [..., C, H, W]
        num_bins: Bins de orientación
        channel_rule: "max" (el canal de mayor magnitud decide) o "sum"

    Returns:
        np.ndarray: [..., bins, H, W]
    """
    gx, gy = image_gradients(images)
    if channel_rule == "max":
        magnitude = np.hypot(gx, gy)
        pick = np.argmax(magnitude, axis=-3)[..., None, :, :]
        gx = np.take_along_axis(gx, pick, axis=-3)[..., 0, :, :]
        gy = np.take_along_axis(gy, pick, axis=-3)[..., 0, :, :]
        return _bin_votes(gx, gy, num_bins)
    if channel_rule == "sum":
        return _bin_votes(gx, gy, num_bins).sum(axis=-4)
    raise ConfigError(f"channel_rule desconocida: {channel_rule!r}")


def pool_cells(votes: np.ndarray, cell_size: int) -> np.ndarray:
    """Suma los votos de cada celda: [..., bins, H, W] → [..., bins, H/c, W/c]."""
    *lead, bins, h, w = votes.shape
    if h % cell_size or w % cell_size:
        raise DimensionError(f"HOG: {h}x{w} no es divisible por cell_size={cell_size}")
    shape = tuple(lead) + (bins, h // cell_size, cell_size, w // cell_size, cell_size)
    return votes.reshape(shape).sum(axis=(-3, -1))


def normalize_cells(hist: np.ndarray, eps: float = HOG_EPS) -> np.ndarray:
    """Normalización L2 por celda: h / sqrt(‖h‖² + eps²)."""
    norm = np.sqrt((hist * hist).sum(axis=-3, keepdims=True) + eps * eps)
    return hist / norm


def hog_features(
    image: np.ndarray,
    cell_size: int,
    num_bins: int = 9,
    channel_rule: str = "max",
    normalize: bool = True,
) -> np.ndarray:
    """
    HOG de una imagen (o de un batch).

    Args:
        image: [..., C, H, W]
        cell_size: Lado de la celda en pixeles
        num_bins: Bins sin signo sobre [0, π)
        channel_rule: "max" o "sum"
        normalize: False retorna los histogramas crudos

    Returns:
        np.ndarray: [..., bins, H/cell, W/cell]

    Raises:
        DimensionError: Si H o W no son divisibles por cell_size
    """
    h, w = np.shape(image)[-2:]
    if h % cell_size or w % cell_size:
        raise DimensionError(f"HOG: {h}x{w} no es divisible por cell_size={cell_size}")
    hist = pool_cells(pixel_votes(image, num_bins, channel_rule), cell_size)
    return normalize_cells(hist) if normalize else hist


# ============================================
# OBJETIVOS MULTI-ESCALA
# ============================================
@dataclass(frozen=True)
class SupervisionTarget:
    """Mapas HOG por escala: escala → [..., bins, s, s]."""

    maps: Dict[int, np.ndarray]

    def scales(self):
        return sorted(self.maps)


def build_targets(
    images: np.ndarray,
    supervision_scales: Sequence[int],
    num_bins: int = 9,
    channel_rule: str = "max",
) -> SupervisionTarget:
    """
    Objetivos HOG para cada escala; la celda de la escala s mide H/s.

    Los votos por pixel se calculan una vez y se agrupan por escala.

    Raises:
        ConfigError: Si alguna escala no divide H
    """
    h = np.shape(images)[-1]
    for s in supervision_scales:
        if s <= 0 or h % s:
            raise ConfigError(f"escala de supervisión inválida {s} para imágenes de {h}px")
    votes = pixel_votes(images, num_bins, channel_rule)
    maps = {s: normalize_cells(pool_cells(votes, h // s)) for s in dict.fromkeys(supervision_scales)}
    return SupervisionTarget(maps)
