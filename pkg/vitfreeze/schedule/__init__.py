"""
Calendario de congelamiento y curvas de learning rate por capa.
"""

from vitfreeze.schedule.export import export_schedule_csv, export_schedule_svg
from vitfreeze.schedule.freezeout import (
    FreezeEventTracker,
    LayerSchedule,
    compute_freeze_times,
    freeze_events,
    initial_lr,
    iteration_time,
    lr_curve_integral,
    lr_integrals,
    step_for_time,
)

__all__ = [
    "compute_freeze_times",
    "initial_lr",
    "LayerSchedule",
    "freeze_events",
    "FreezeEventTracker",
    "lr_curve_integral",
    "lr_integrals",
    "iteration_time",
    "step_for_time",
    "export_schedule_csv",
    "export_schedule_svg",
]
