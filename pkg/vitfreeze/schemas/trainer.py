"""
Esquemas Pydantic para el entrenamiento y los datos.
"""

from typing import Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator


# ============================================
# ENTRENAMIENTO
# ============================================
class TrainerConfig(BaseModel):
    """Batch, pasos, semilla, precisión y constantes de AdamW."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    batch_size: int = Field(32, ge=1, description="Imágenes por iteración")
    steps: int = Field(500, ge=1, description="Iteraciones totales")
    seed: int = Field(0, ge=0, description="Semilla de datos, máscaras e inicialización")
    precision: Literal["float32", "float64"] = Field("float32", description="Precisión de entrenamiento")
    betas: Tuple[float, float] = Field((0.9, 0.999), description="Betas de AdamW")
    eps: float = Field(1e-8, gt=0, description="Épsilon de AdamW")
    weight_decay: float = Field(0.05, ge=0, description="Weight decay desacoplado")
    lr_reference_batch: int = Field(256, ge=1, description="lr = base_lr * batch / referencia")
    backward_factor: float = Field(2.0, gt=0, description="FLOPs backward / FLOPs forward por capa")
    warmup_discard: int = Field(10, ge=0, description="Muestras de tiempo descartadas al inicio")
    freeze: bool = Field(True, description="False = línea base sin congelamiento")
    prune_decoders: bool = Field(True, description="Quitar decodificadores cuyo encoder ya se congeló")
    record_timing: bool = Field(True, description="False escribe iter_ms=0 (reportes idénticos byte a byte)")

    @model_validator(mode="after")
    def validar_betas(self) -> "TrainerConfig":
        b1, b2 = self.betas
        if not (0.0 <= b1 < 1.0 and 0.0 <= b2 < 1.0):
            raise ValueError("betas deben estar en [0, 1)")
        return self


# ============================================
# DATOS
# ============================================
class DataConfig(BaseModel):
    """Origen de las imágenes."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    source: Literal["synthetic", "directory"] = Field("synthetic", description="synthetic o directory")
    directory: Optional[str] = Field(None, description="Carpeta con archivos PPM (P6)")
    count: int = Field(512, ge=1, description="Imágenes sintéticas a generar")
    image_size: Optional[int] = Field(None, gt=0, description="Se toma del modelo si se omite")

    @model_validator(mode="after")
    def validar_origen(self) -> "DataConfig":
        if self.source == "directory" and not self.directory:
            raise ValueError("source='directory' requiere directory")
        return self
