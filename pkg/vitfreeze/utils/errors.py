"""
Errores de la aplicación.
Todos heredan de VitFreezeError para poder capturarlos en el CLI.
"""

from typing import Any, Dict, Optional


class VitFreezeError(Exception):
    """Error base de vitfreeze."""


class DimensionError(VitFreezeError, ValueError):
    """Formas incompatibles entre tensores o imágenes."""


class ContractError(VitFreezeError):
    """Se violó una precondición o un invariante."""


class ConfigError(VitFreezeError, ValueError):
    """Configuración inválida (clave desconocida, tipo o restricción)."""


class ImageFormatError(VitFreezeError, ValueError):
    """Archivo de imagen mal formado o formato no soportado."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class CheckpointError(VitFreezeError, ValueError):
    """Archivo de checkpoint corrupto o incompatible con el modelo."""


class OutputDirError(VitFreezeError, OSError):
    """El directorio de salida no se puede escribir."""


class TrainingDiverged(VitFreezeError):
    """
    La pérdida dejó de ser finita.

    Attributes:
        diagnostics: Paso, learning rates y términos de pérdida al abortar
    """

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
