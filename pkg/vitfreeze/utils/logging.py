"""
Configuración de logging para el CLI.
"""

import logging

_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"


def configure_logging(level: str = "INFO") -> None:
    """
    Configura el logger raíz una sola vez.

    Args:
        level: Nombre del nivel (DEBUG, INFO, WARNING, ERROR)
    """
    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO), format=_FORMAT)
    # matplotlib es muy ruidoso en DEBUG
    logging.getLogger("matplotlib").setLevel(logging.WARNING)
