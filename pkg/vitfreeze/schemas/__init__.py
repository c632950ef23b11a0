"""
Esquemas Pydantic de la aplicación.
Exporta todos los esquemas para facilitar importaciones.
"""

# Configuración
from .model import ModelConfig
from .schedule import ScheduleConfig
from .trainer import DataConfig, TrainerConfig
from .run import RunConfig, build_run_config

# Reportes
from .report import FreezeEvent, PruneEvent, SpeedupReport, TrainReport

__all__ = [
    # Configuración
    "ModelConfig",
    "ScheduleConfig",
    "TrainerConfig",
    "DataConfig",
    "RunConfig",
    "build_run_config",

    # Reportes
    "FreezeEvent",
    "PruneEvent",
    "TrainReport",
    "SpeedupReport",
]
