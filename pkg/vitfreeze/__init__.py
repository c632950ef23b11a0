"""
Paquete principal de vitfreeze.

Congelamiento progresivo de capas para ViT preentrenados con
modelado de imagen enmascarada local multi-escala.
"""

__version__ = "1.0.0"
