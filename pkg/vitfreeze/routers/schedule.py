"""
Subcomando ``schedule``: escribe el calendario sin entrenar.
"""

import argparse

from vitfreeze.repositories.config_file import write_resolved_config
from vitfreeze.routers.common import BANNER, add_common_arguments, load_run_config, print_banner
from vitfreeze.schedule.export import GRID_POINTS
from vitfreeze.schedule.freezeout import LayerSchedule, describe, lr_integrals
from vitfreeze.settings import Settings
from vitfreeze.training.trainer import effective_lr
from vitfreeze.utils.files import emit_schedule, ensure_writable


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("schedule", help="Exportar el calendario (CSV + SVG)")
    add_common_arguments(parser)
    parser.add_argument("--points", type=int, default=GRID_POINTS, help="Puntos de la rejilla por capa")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, settings: Settings) -> int:
    config = load_run_config(args)
    outdir = ensure_writable(config.output_dir)
    write_resolved_config(config, outdir)

    schedule = LayerSchedule.build(config.schedule, alpha=effective_lr(config), num_layers=config.model.num_layers)
    csv_path, svg_path = emit_schedule(schedule, outdir, points=args.points)

    print_banner("📈 CALENDARIO DE CONGELAMIENTO")
    for line in describe(schedule, config.trainer.steps):
        print(f"   {line}")
    if schedule.warmup == 0:
        integrals = lr_integrals(schedule)
        print(f"\n   Integral por capa: {min(integrals):.6g} .. {max(integrals):.6g}")
    print("\n" + BANNER)
    print(f"📁 {csv_path}")
    print(f"📁 {svg_path}")
    print(BANNER)
    return 0
