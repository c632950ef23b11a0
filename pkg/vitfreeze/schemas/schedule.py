"""
Esquema Pydantic para ScheduleConfig.
Parámetros del congelamiento progresivo y de las curvas de learning rate.
"""

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class ScheduleConfig(BaseModel):
    """
    Configuración del calendario de congelamiento.

    ``num_layers`` y ``total_steps`` se derivan del modelo y del trainer
    cuando no se indican (ver RunConfig).
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    num_layers: Optional[int] = Field(None, ge=2, description="Capas congelables (13 en ViT-B)")
    t0: float = Field(0.8, description="Fracción de entrenamiento en que se congela la primera capa")
    spacing: Literal["linear", "cubic"] = Field("cubic", description="Espaciado de los t_i")
    lr_scaling: Literal["scaled", "unscaled"] = Field(
        "scaled", description="scaled: alpha_i(0) = alpha / t_i"
    )
    base_lr: float = Field(0.015, gt=0, description="Learning rate base alpha (antes de la regla por batch)")
    warmup_fraction: float = Field(0.10, ge=0.0, lt=1.0, description="Fracción de calentamiento lineal")
    total_steps: Optional[int] = Field(None, ge=1, description="Iteraciones totales T")

    @field_validator("t0")
    @classmethod
    def validar_t0(cls, v: float) -> float:
        if not 0.0 < v <= 1.0:
            raise ValueError("t0 debe estar en (0, 1]")
        return v

    @property
    def first_freeze_time(self) -> float:
        """t_0 ya transformado por el espaciado (el menor de los t_i)."""
        return self.t0**3 if self.spacing == "cubic" else self.t0

    @model_validator(mode="after")
    def validar_warmup(self) -> "ScheduleConfig":
        if self.warmup_fraction >= self.first_freeze_time:
            raise ValueError(
                f"warmup_fraction={self.warmup_fraction} debe ser menor que el primer "
                f"tiempo de congelamiento {self.first_freeze_time:.4f}"
            )
        return self
