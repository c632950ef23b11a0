"""
Acceso a datos: imágenes (sintéticas o PPM) y archivos de configuración.
"""

from vitfreeze.repositories.config_file import (
    load_preset,
    parse_config,
    write_resolved_config,
)
from vitfreeze.repositories.dataset import load_dataset
from vitfreeze.repositories.ppm import load_images, load_ppm, write_ppm
from vitfreeze.repositories.synthetic import synth_dataset

__all__ = [
    "parse_config",
    "load_preset",
    "write_resolved_config",
    "load_dataset",
    "synth_dataset",
    "load_images",
    "load_ppm",
    "write_ppm",
]
