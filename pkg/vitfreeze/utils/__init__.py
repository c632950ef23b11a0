"""
Utilidades transversales: errores, logging y archivos de salida.
"""

from vitfreeze.utils.errors import (
    CheckpointError,
    ConfigError,
    ContractError,
    DimensionError,
    ImageFormatError,
    OutputDirError,
    TrainingDiverged,
    VitFreezeError,
)
from vitfreeze.utils.logging import configure_logging

__all__ = [
    "VitFreezeError",
    "DimensionError",
    "ContractError",
    "ConfigError",
    "ImageFormatError",
    "CheckpointError",
    "OutputDirError",
    "TrainingDiverged",
    "configure_logging",
]
