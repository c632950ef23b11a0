"""
Dataset sintético con estructura orientada.

Cada imagen mezcla un gradiente lineal, una rejilla de barras y algunas
manchas gaussianas con orientaciones y frecuencias aleatorias, así los
objetivos HOG nunca quedan degenerados.
"""

import numpy as np


def _synth_image(rng: np.random.Generator, h: int, w: int, c: int) -> np.ndarray:
    yy, xx = np.meshgrid(np.linspace(-1.0, 1.0, h), np.linspace(-1.0, 1.0, w), indexing="ij")
    layers = []

    # gradiente lineal
    theta = rng.uniform(0.0, np.pi)
    layers.append(np.cos(theta) * xx + np.sin(theta) * yy)

    # barras: seno orientado, a veces umbralizado
    phi = rng.uniform(0.0, np.pi)
    freq = rng.uniform(1.5, 6.0)
    wave = np.sin(np.pi * freq * (np.cos(phi) * xx + np.sin(phi) * yy) + rng.uniform(0.0, 2 * np.pi))
    if rng.random() < 0.5:
        wave = np.sign(wave)
    layers.append(wave)

    # manchas
    blobs = np.zeros_like(xx)
    for _ in range(rng.integers(1, 4)):
        cy, cx = rng.uniform(-0.8, 0.8, size=2)
        sigma = rng.uniform(0.1, 0.4)
        blobs += rng.choice([-1.0, 1.0]) * np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * sigma**2))
    layers.append(blobs)

    basis = np.stack(layers)
    mix = rng.uniform(0.2, 1.0, size=(c, len(layers)))
    img = np.tensordot(mix, basis, axes=([1], [0]))
    lo = img.min(axis=(1, 2), keepdims=True)
    hi = img.max(axis=(1, 2), keepdims=True)
    return (img - lo) / np.maximum(hi - lo, 1e-12)


def synth_dataset(seed: int, count: int, height: int, width: int, channels: int = 3) -> np.ndarray:
    """
    Genera ``count`` imágenes deterministas.

    Args:
        seed: Semilla (misma semilla → mismos bytes)
        count: Número de imágenes (≥ 1)
        height, width, channels: Forma de cada imagen

    Returns:
        np.ndarray: [count, C, H, W] en [0, 1], float64
    """
    if count < 1:
        raise ValueError("count debe ser al menos 1")
    images = np.empty((count, channels, height, width), dtype=np.float64)
    for k in range(count):
        rng = np.random.default_rng(np.random.SeedSequence([seed, k]))
        images[k] = _synth_image(rng, height, width, channels)
    return images
