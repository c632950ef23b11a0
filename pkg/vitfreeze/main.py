"""
Punto de entrada del CLI ``vitfreeze``.

    vitfreeze <subcomando> --config <ruta> --out <dir> [--seed N] [--preset vit-toy|vit-b]

Códigos de salida: 0 éxito, 1 error de configuración o de entrada,
2 pérdida no finita, 3 verificación de gradientes fallida.
"""

import argparse
import logging
import sys
from typing import Optional, Sequence

from pydantic import ValidationError

from vitfreeze import __version__
from vitfreeze.autograd.tensor import set_debug
from vitfreeze.routers import ROUTERS
from vitfreeze.settings import get_settings
from vitfreeze.utils.errors import VitFreezeError
from vitfreeze.utils.logging import configure_logging

logger = logging.getLogger(__name__)

EXIT_INPUT_ERROR = 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vitfreeze",
        description="Congelamiento progresivo de capas para ViT con MIM local multi-escala",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    # ============================================
    # REGISTRAR ROUTERS
    # ============================================
    for router in ROUTERS:
        router.register(subparsers)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        settings = get_settings()
    except ValidationError as e:
        print(f"❌ Variables VITFREEZE_* inválidas:\n{e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    configure_logging(settings.log_level)
    set_debug(settings.debug)

    try:
        return args.handler(args, settings)
    except VitFreezeError as e:
        logger.error("%s", e)
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
