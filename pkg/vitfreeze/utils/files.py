"""
Archivos de salida de una corrida.

Todos se escriben en UTF-8 con saltos de línea ``\\n`` y sin marcas de
tiempo, así dos corridas iguales producen los mismos bytes.
"""

import csv
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from pydantic import BaseModel

from vitfreeze.schedule.export import export_schedule_csv, export_schedule_svg
from vitfreeze.schedule.freezeout import LayerSchedule
from vitfreeze.schemas.report import TrainReport
from vitfreeze.utils.errors import OutputDirError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

TRACE_HEADER = ("step", "loss", "iter_ms", "frozen_prefix", "alive_heads")


# ============================================
# DIRECTORIO
# ============================================
def ensure_writable(outdir: PathLike) -> Path:
    """
    Crea ``outdir`` si hace falta y verifica que se pueda escribir.

    Raises:
        OutputDirError: Si no se puede crear o escribir
    """
    root = Path(outdir)
    try:
        root.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputDirError(f"no se pudo crear {root}: {e}") from e
    if not root.is_dir() or not os.access(root, os.W_OK | os.X_OK):
        raise OutputDirError(f"el directorio de salida no se puede escribir: {root}")
    return root


# ============================================
# ESCRITORES
# ============================================
def write_json(path: PathLike, payload: Union[BaseModel, Dict[str, Any], List[Any]]) -> Path:
    if isinstance(payload, BaseModel):
        text = payload.model_dump_json(indent=2)
    else:
        text = json.dumps(payload, indent=2, ensure_ascii=False)
    target = Path(path)
    target.write_text(text + "\n", encoding="utf-8")
    return target


def write_trace_csv(report: TrainReport, path: PathLike) -> int:
    """
    Una fila por iteración ejecutada.

    Returns:
        int: Filas escritas sin el encabezado
    """
    rows = zip(report.loss_trace, report.iter_ms, report.frozen_prefix_trace, report.alive_heads_trace)
    count = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for step, (loss, ms, prefix, alive) in enumerate(rows, start=1):
            writer.writerow((step, repr(float(loss)), f"{ms:.3f}", prefix, alive))
            count += 1
    return count


def event_lines(report: TrainReport) -> List[str]:
    """Eventos ordenados por paso; en un mismo paso el congelamiento va antes que la poda."""
    events = [(e.step, 0, e.layer, f"step={e.step} freeze layer={e.layer}") for e in report.freeze_events]
    events += [(e.step, 1, e.head, f"step={e.step} prune head={e.head}") for e in report.prune_events]
    lines = [line for *_, line in sorted(events)]
    if report.aborted:
        step = (report.diagnostics or {}).get("step", report.steps_run + 1)
        lines.append(f"step={step} abort loss=nan")
    return lines


def write_events_log(report: TrainReport, path: PathLike) -> Path:
    target = Path(path)
    target.write_text("".join(line + "\n" for line in event_lines(report)), encoding="utf-8")
    return target


# ============================================
# REPORTES DE UNA CORRIDA
# ============================================
def emit_schedule(schedule: LayerSchedule, outdir: PathLike, points: Optional[int] = None) -> Sequence[Path]:
    """Escribe ``schedule.csv`` y ``schedule.svg``."""
    root = Path(outdir)
    kwargs = {} if points is None else {"points": points}
    csv_path, svg_path = root / "schedule.csv", root / "schedule.svg"
    rows = export_schedule_csv(schedule, csv_path, **kwargs)
    export_schedule_svg(schedule, svg_path, **kwargs)
    logger.info("Calendario exportado: %d filas en %s", rows, csv_path)
    return csv_path, svg_path


def emit_reports(report: TrainReport, schedule: LayerSchedule, outdir: PathLike) -> List[Path]:
    """
    Escribe los reportes de una corrida terminada o abortada.

    Archivos: schedule.csv, schedule.svg, trace.csv, events.log,
    report.json y, si la corrida abortó, diagnostics.json.

    Returns:
        list: Rutas escritas
    """
    root = Path(outdir)
    written = list(emit_schedule(schedule, root))
    write_trace_csv(report, root / "trace.csv")
    written.append(root / "trace.csv")
    written.append(write_events_log(report, root / "events.log"))
    written.append(write_json(root / "report.json", report))
    if report.aborted and report.diagnostics is not None:
        written.append(write_json(root / "diagnostics.json", report.diagnostics))
    logger.info("Reportes escritos en %s", root)
    return written
