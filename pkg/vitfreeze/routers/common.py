"""
Argumentos compartidos por todos los subcomandos.
"""

import argparse
from typing import Any, Dict

from vitfreeze.repositories.config_file import PRESETS, parse_config
from vitfreeze.schemas.run import RunConfig

BANNER = "=" * 60


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="Archivo JSON de configuración")
    parser.add_argument("--out", help="Directorio de salida (sobrescribe output_dir)")
    parser.add_argument("--seed", type=int, help="Semilla (sobrescribe trainer.seed)")
    parser.add_argument("--preset", choices=PRESETS, help="Configuración base incluida en el paquete")


def load_run_config(args: argparse.Namespace) -> RunConfig:
    """Preset ← archivo ← opciones del CLI."""
    overrides: Dict[str, Any] = {}
    if args.seed is not None:
        overrides["trainer"] = {"seed": args.seed}
    if args.out is not None:
        overrides["output_dir"] = args.out
    return parse_config(args.config, preset=args.preset, overrides=overrides)


def print_banner(title: str) -> None:
    print(BANNER)
    print(title)
    print(BANNER)
