"""
Esquema Pydantic para ModelConfig.
Define la forma del ViT, las capas de toma (taps) y las escalas de supervisión.
"""

from typing import List, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


def _log2_exact(ratio: int) -> int:
    """Retorna k si ratio == 2**k, si no -1."""
    if ratio < 1 or ratio & (ratio - 1):
        return -1
    return ratio.bit_length() - 1


# ============================================
# CONFIGURACIÓN DEL MODELO
# ============================================
class ModelConfig(BaseModel):
    """
    Configuración del ViT con decodificadores multi-escala.
    Los valores por defecto corresponden al preset "vit-toy".
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    image_size: int = Field(64, gt=0, description="Alto = ancho de la imagen en pixeles")
    channels: int = Field(3, gt=0, description="Canales de color")
    patch_size: int = Field(8, gt=0, description="Lado del parche P")
    embed_dim: int = Field(64, gt=0, description="Dimensión D del encoder")
    num_blocks: int = Field(4, ge=1, description="Bloques transformer del encoder")
    num_heads: int = Field(4, ge=1, description="Cabezas de atención del encoder")
    mlp_ratio: float = Field(4.0, gt=0, description="Ancho del MLP relativo a D")
    tap_layers: List[int] = Field(
        default_factory=lambda: [1, 2, 3, 4],
        description="Bloques cuya salida alimenta un decodificador (I)",
    )
    supervision_scales: List[int] = Field(
        default_factory=lambda: [16, 8, 8, 4],
        description="Lado del mapa objetivo de cada decodificador",
    )
    decoder_dim: int = Field(32, gt=0, description="Dimensión de los decodificadores")
    decoder_heads: int = Field(4, ge=1, description="Cabezas de atención de los decodificadores")
    mask_ratio: float = Field(0.75, description="Fracción r de parches enmascarados")
    hog_bins: int = Field(9, ge=2, description="Bins de orientación del HOG")
    hog_channel_rule: Literal["max", "sum"] = Field(
        "max", description="Cómo combinar los canales de color en el HOG"
    )
    gelu_approximate: Literal["tanh", "none"] = Field(
        "tanh", description="GELU con tanh o exacta con erf"
    )
    ln_eps: float = Field(1e-6, gt=0, description="Épsilon de layer norm")

    @field_validator("mask_ratio")
    @classmethod
    def validar_mask_ratio(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError("mask_ratio debe estar en (0, 1)")
        return v

    @field_validator("tap_layers")
    @classmethod
    def validar_tap_layers(cls, v: List[int]) -> List[int]:
        if not v:
            raise ValueError("tap_layers no puede estar vacío")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("tap_layers debe ser estrictamente creciente")
        if v[0] < 1:
            raise ValueError("tap_layers usa índices de bloque desde 1")
        return v

    @model_validator(mode="after")
    def validar_geometria(self) -> "ModelConfig":
        """Valida divisibilidad, cabezas y que cada escala sea alcanzable."""
        if self.image_size % self.patch_size:
            raise ValueError("image_size debe ser divisible por patch_size")
        if self.embed_dim % self.num_heads:
            raise ValueError("embed_dim debe ser divisible por num_heads")
        if self.decoder_dim % self.decoder_heads:
            raise ValueError("decoder_dim debe ser divisible por decoder_heads")
        if self.embed_dim % 4 or self.decoder_dim % 4:
            raise ValueError("embed_dim y decoder_dim deben ser múltiplos de 4 (sin-cos 2D)")
        if len(self.tap_layers) != len(self.supervision_scales):
            raise ValueError("tap_layers y supervision_scales deben tener la misma longitud")
        if self.tap_layers[-1] > self.num_blocks:
            raise ValueError("tap_layers no puede exceder num_blocks")
        for scale in self.supervision_scales:
            if scale <= 0 or self.image_size % scale:
                raise ValueError(f"la escala {scale} debe dividir image_size={self.image_size}")
            self.rescale_chain(scale)
        return self

    # ============================================
    # PROPIEDADES DERIVADAS
    # ============================================
    @property
    def grid(self) -> int:
        """Lado de la rejilla de tokens H/P."""
        return self.image_size // self.patch_size

    @property
    def num_patches(self) -> int:
        """N = HW/P²."""
        return self.grid * self.grid

    @property
    def patch_dim(self) -> int:
        return self.patch_size * self.patch_size * self.channels

    @property
    def num_layers(self) -> int:
        """Capas congelables: patch embedding + bloques."""
        return self.num_blocks + 1

    @property
    def mlp_hidden(self) -> int:
        return int(round(self.embed_dim * self.mlp_ratio))

    def rescale_chain(self, scale: int) -> List[str]:
        """
        Pasos para llevar la rejilla de tokens a ``scale``.

        Returns:
            list: "up" (upsample2x) o "pool" (avgpool2x) repetidos; vacía si es identidad

        Raises:
            ValueError: Si la escala no se alcanza con pasos enteros de 2x
        """
        g = self.grid
        if scale >= g:
            steps = _log2_exact(scale // g) if scale % g == 0 else -1
            if steps < 0:
                raise ValueError(f"la escala {scale} no se alcanza desde la rejilla {g} con pasos 2x")
            return ["up"] * steps
        steps = _log2_exact(g // scale) if g % scale == 0 else -1
        if steps < 0:
            raise ValueError(f"la escala {scale} no se alcanza desde la rejilla {g} con pasos 2x")
        return ["pool"] * steps
