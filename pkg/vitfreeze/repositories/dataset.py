"""
Selección del origen de imágenes según la sección ``data`` de la configuración.
"""

import logging

import numpy as np

from vitfreeze.repositories.ppm import load_images
from vitfreeze.repositories.synthetic import synth_dataset
from vitfreeze.schemas.run import RunConfig
from vitfreeze.utils.errors import ConfigError

logger = logging.getLogger(__name__)


def load_dataset(config: RunConfig, seed: int) -> np.ndarray:
    """
    Imágenes de la corrida: sintéticas o leídas de un directorio PPM.

    Raises:
        ConfigError: Si las imágenes no coinciden con image_size o channels del modelo
    """
    model = config.model
    size = model.image_size
    if config.data.source == "synthetic":
        images = synth_dataset(seed, config.data.count, size, size, model.channels)
        logger.info("Dataset sintético: %d imágenes %dx%d", len(images), size, size)
        return images

    images = load_images(config.data.directory)
    _, channels, h, w = images.shape
    if channels != model.channels:
        raise ConfigError(f"model.channels={model.channels} pero los PPM tienen {channels} canales")
    if (h, w) != (size, size):
        raise ConfigError(f"model.image_size={size} pero las imágenes miden {h}x{w}")
    return images
