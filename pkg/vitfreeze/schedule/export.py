"""
Exportación del calendario: CSV con las curvas muestreadas y gráfica SVG.
"""

import csv
from pathlib import Path
from typing import Union

from vitfreeze.schedule.freezeout import LayerSchedule

SCHEDULE_HEADER = ("layer", "t_freeze", "alpha0", "step", "lr")
GRID_POINTS = 1000

PathLike = Union[str, Path]


def export_schedule_csv(schedule: LayerSchedule, path: PathLike, points: int = GRID_POINTS) -> int:
    """
    Escribe una fila por (capa, punto de la rejilla).

    La columna ``step`` es el índice entero k del punto en la rejilla; su
    tiempo normalizado es k / (points − 1).

    Returns:
        int: Filas escritas sin contar el encabezado
    """
    _, lr = schedule.grid(points)
    rows = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SCHEDULE_HEADER)
        for i in range(schedule.num_layers):
            t_i = schedule.freeze_times[i]
            a0 = schedule.initial_lrs[i]
            for k in range(points):
                writer.writerow((i, f"{t_i:.10g}", f"{a0:.10g}", k, f"{lr[i, k]:.10g}"))
                rows += 1
    return rows


def export_schedule_svg(schedule: LayerSchedule, path: PathLike, points: int = GRID_POINTS) -> None:
    """
    Gráfica de las curvas de learning rate, una por capa.

    El SVG no lleva fecha y usa una sal fija para que sea reproducible.
    """
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams.update({"svg.hashsalt": "vitfreeze", "font.family": "DejaVu Sans"})
    import matplotlib.pyplot as plt

    t, lr = schedule.grid(points)
    fig, ax = plt.subplots(figsize=(8, 4.5), constrained_layout=True)
    cmap = plt.get_cmap("viridis")
    n = schedule.num_layers
    for i in range(n):
        ax.plot(t, lr[i], color=cmap(i / max(1, n - 1)), linewidth=1.2, label=f"capa {i}")
    if schedule.warmup > 0:
        ax.axvline(schedule.warmup, color="0.6", linestyle="--", linewidth=0.8)
    ax.set_xlabel("fracción del entrenamiento t")
    ax.set_ylabel("learning rate")
    ax.set_xlim(0.0, 1.0)
    ax.set_ylim(bottom=0.0)
    ax.set_title(f"{n} capas, {schedule.lr_scaling}, calentamiento {schedule.warmup:g}")
    ax.grid(True, alpha=0.3)
    if n <= 16:
        ax.legend(loc="upper right", fontsize=7, ncol=2)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
