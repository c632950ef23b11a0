"""
Un módulo por subcomando del CLI; cada uno expone ``register(subparsers)``.
"""

from vitfreeze.routers import gradcheck, schedule, speedup, train

ROUTERS = (train, schedule, speedup, gradcheck)

__all__ = ["ROUTERS", "train", "schedule", "speedup", "gradcheck"]
