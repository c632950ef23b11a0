"""
Subcomando ``train``.
Entrena con congelamiento progresivo y escribe reportes y checkpoint.
"""

import argparse
import logging

from vitfreeze.models.checkpoint import save_checkpoint
from vitfreeze.repositories.config_file import write_resolved_config
from vitfreeze.repositories.dataset import load_dataset
from vitfreeze.routers.common import BANNER, add_common_arguments, load_run_config, print_banner
from vitfreeze.settings import Settings
from vitfreeze.training.trainer import Trainer, run_baseline
from vitfreeze.utils.errors import TrainingDiverged
from vitfreeze.utils.files import emit_reports, ensure_writable, write_json

logger = logging.getLogger(__name__)

EXIT_DIVERGED = 2
CHECKPOINT_NAME = "model.vtfz"


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("train", help="Entrenar con congelamiento progresivo")
    add_common_arguments(parser)
    parser.add_argument(
        "--compare-baseline",
        action="store_true",
        help="Corre además la línea base sin congelamiento y reporta la razón de tiempos",
    )
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, settings: Settings) -> int:
    config = load_run_config(args)
    # se verifica antes de entrenar
    outdir = ensure_writable(config.output_dir)
    write_resolved_config(config, outdir)
    seed = config.trainer.seed
    dataset = load_dataset(config, seed)

    print_banner("🧊 ENTRENAMIENTO CON CONGELAMIENTO PROGRESIVO")
    print(f"   Capas congelables: {config.model.num_layers}")
    print(f"   Iteraciones: {config.trainer.steps}  batch: {config.trainer.batch_size}  semilla: {seed}")
    print(f"   Workers de preparación: {settings.threads}")

    trainer = Trainer(config, dataset, seed=seed, threads=settings.threads, debug=settings.debug)
    try:
        trainer.run()
    except TrainingDiverged as e:
        emit_reports(trainer.report, trainer.schedule, outdir)
        print(f"\n❌ {e}")
        print(f"   Diagnóstico en {outdir / 'diagnostics.json'}")
        return EXIT_DIVERGED

    baseline_error = None
    if args.compare_baseline:
        try:
            run_baseline(trainer, dataset, threads=settings.threads, debug=settings.debug)
        except TrainingDiverged as e:
            baseline_error = e

    report = trainer.report
    emit_reports(report, trainer.schedule, outdir)
    save_checkpoint(trainer.model, outdir / CHECKPOINT_NAME)
    if baseline_error is not None:
        write_json(outdir / "diagnostics.json", {"run": "baseline", **baseline_error.diagnostics})
        print(f"\n❌ Línea base: {baseline_error}")
        print(f"   Diagnóstico en {outdir / 'diagnostics.json'}")
        return EXIT_DIVERGED

    print(f"\n✅ {report.steps_run} iteraciones")
    if report.loss_trace:
        print(f"   Pérdida: {report.loss_trace[0]:.4f} → {report.loss_trace[-1]:.4f}")
    for event in report.freeze_events:
        print(f"   paso {event.step:5d}  congelada capa {event.layer}")
    for event in report.prune_events:
        print(f"   paso {event.step:5d}  podado decodificador del bloque {event.head}")
    print(f"   Razón de trabajo predicha: {report.predicted_work_ratio:.4f}")
    if report.measured_time_ratio is not None:
        print(f"   Razón de tiempo medida:    {report.measured_time_ratio:.4f}")
    print("\n" + BANNER)
    print(f"📁 Reportes en {outdir}")
    print(BANNER)
    return 0
