"""
Esquema Pydantic para RunConfig.
Agrupa las secciones model, schedule, trainer y data de una corrida.
"""

from typing import Any, Dict

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from vitfreeze.schemas.model import ModelConfig
from vitfreeze.schemas.schedule import ScheduleConfig
from vitfreeze.schemas.trainer import DataConfig, TrainerConfig
from vitfreeze.utils.errors import ConfigError


class RunConfig(BaseModel):
    """
    Configuración completa de una corrida.
    Las claves desconocidas se rechazan en todas las secciones.
    """

    model_config = ConfigDict(extra="forbid")

    model: ModelConfig = Field(default_factory=ModelConfig)
    schedule: ScheduleConfig = Field(default_factory=ScheduleConfig)
    trainer: TrainerConfig = Field(default_factory=TrainerConfig)
    data: DataConfig = Field(default_factory=DataConfig)
    output_dir: str = Field("runs/vitfreeze", description="Carpeta de reportes")

    @model_validator(mode="after")
    def completar_derivados(self) -> "RunConfig":
        """Deriva num_layers, total_steps e image_size y valida que coincidan."""
        layers = self.model.num_layers
        if self.schedule.num_layers is not None and self.schedule.num_layers != layers:
            raise ValueError(
                f"schedule.num_layers={self.schedule.num_layers} no coincide con "
                f"model.num_blocks + 1 = {layers}"
            )
        steps = self.trainer.steps
        if self.schedule.total_steps is not None and self.schedule.total_steps != steps:
            raise ValueError(
                f"schedule.total_steps={self.schedule.total_steps} no coincide con trainer.steps={steps}"
            )
        size = self.model.image_size
        if self.data.image_size is not None and self.data.image_size != size:
            raise ValueError(f"data.image_size={self.data.image_size} no coincide con model.image_size={size}")

        self.schedule = self.schedule.model_copy(update={"num_layers": layers, "total_steps": steps})
        self.data = self.data.model_copy(update={"image_size": size})
        return self


def build_run_config(document: Dict[str, Any]) -> RunConfig:
    """
    Valida un documento ya decodificado.

    Raises:
        ConfigError: Con cada clave fallida como ruta punteada y su restricción
    """
    try:
        return RunConfig.model_validate(document)
    except ValidationError as e:
        lines = []
        for err in e.errors():
            key = ".".join(str(p) for p in err["loc"]) or "<raíz>"
            lines.append(f"{key}: {err['msg']}")
        raise ConfigError("configuración inválida:\n  " + "\n  ".join(lines)) from e
