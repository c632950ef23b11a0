"""
Configuración del proceso leída de variables de entorno.
Soporta un archivo .env en el directorio de trabajo.
"""

from functools import lru_cache

from dotenv import load_dotenv
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


# ============================================
# CONFIGURACIÓN GENERAL
# ============================================
class Settings(BaseSettings):
    """
    Variables VITFREEZE_* del entorno.

    Attributes:
        threads: Workers para preparar el siguiente batch (0 = todo en el hilo principal)
        log_level: Nivel del logger raíz
        debug: Activa las verificaciones de NaN/Inf y de exclusión de gradientes
    """

    model_config = SettingsConfigDict(
        env_prefix="VITFREEZE_",
        extra="ignore",
    )

    threads: int = Field(0, ge=0, description="Workers de preparación de batches")
    log_level: str = Field("INFO", description="DEBUG, INFO, WARNING o ERROR")
    debug: bool = Field(False, description="Verificaciones extra en cada paso")

    @field_validator("log_level")
    @classmethod
    def validar_log_level(cls, v: str) -> str:
        v = v.upper()
        if v not in {"DEBUG", "INFO", "WARNING", "ERROR"}:
            raise ValueError("log_level debe ser DEBUG, INFO, WARNING o ERROR")
        return v


@lru_cache
def get_settings() -> Settings:
    """
    Retorna la configuración del proceso (leída una sola vez).

    Las variables de un .env en el directorio de trabajo se cargan al entorno
    sin pisar las que ya existen.
    """
    load_dotenv(".env", override=False, encoding="utf-8")
    return Settings()
