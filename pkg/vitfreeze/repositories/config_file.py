"""
Lectura de archivos de configuración JSON y de los presets del paquete.
"""

import copy
import json
import logging
from importlib import resources
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from vitfreeze.schemas.run import RunConfig, build_run_config
from vitfreeze.utils.errors import ConfigError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
PRESETS = ("vit-toy", "vit-b")
RESOLVED_CONFIG = "resolved_config.json"


def deep_merge(base: Mapping[str, Any], override: Mapping[str, Any]) -> Dict[str, Any]:
    """Mezcla recursiva; los valores de ``override`` ganan."""
    merged = copy.deepcopy(dict(base))
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _decode(text: str, origin: str) -> Dict[str, Any]:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{origin}: JSON inválido en la línea {e.lineno}: {e.msg}") from e
    if not isinstance(document, dict):
        raise ConfigError(f"{origin}: se esperaba un objeto JSON")
    return document


def load_preset(name: str) -> Dict[str, Any]:
    """
    Documento del preset ``name`` incluido en el paquete.

    Raises:
        ConfigError: Si el preset no existe
    """
    if name not in PRESETS:
        raise ConfigError(f"preset desconocido {name!r}; opciones: {', '.join(PRESETS)}")
    text = resources.files("vitfreeze.presets").joinpath(f"{name}.json").read_text(encoding="utf-8")
    return _decode(text, f"preset {name}")


def parse_config(
    path: Optional[PathLike] = None,
    preset: Optional[str] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> RunConfig:
    """
    Construye el RunConfig: preset (opcional) ← archivo ← overrides.

    Args:
        path: Archivo JSON (UTF-8) con las secciones model/schedule/trainer/data
        preset: "vit-toy" o "vit-b"
        overrides: Valores del CLI (por ejemplo la semilla o el directorio de salida)

    Raises:
        ConfigError: Archivo ilegible, JSON inválido, clave desconocida o restricción violada
    """
    document: Dict[str, Any] = load_preset(preset) if preset else {}
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            raise ConfigError(f"no se pudo leer {p}: {e}") from e
        document = deep_merge(document, _decode(text, str(p)))
    if overrides:
        document = deep_merge(document, overrides)
    config = build_run_config(document)
    logger.debug("Configuración resuelta: %s", config.model_dump(mode="json"))
    return config


def dump_config(config: RunConfig) -> str:
    return json.dumps(config.model_dump(mode="json"), indent=2, ensure_ascii=False) + "\n"


def write_resolved_config(config: RunConfig, outdir: PathLike) -> Path:
    """Escribe el eco de la configuración completa en ``outdir/resolved_config.json``."""
    target = Path(outdir) / RESOLVED_CONFIG
    target.write_text(dump_config(config), encoding="utf-8")
    return target
