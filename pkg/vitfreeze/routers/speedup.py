"""
Subcomando ``predict-speedup``: sólo el modelo de costo analítico.
"""

import argparse

from vitfreeze.repositories.config_file import write_resolved_config
from vitfreeze.routers.common import BANNER, add_common_arguments, load_run_config, print_banner
from vitfreeze.schedule.freezeout import LayerSchedule
from vitfreeze.settings import Settings
from vitfreeze.training.cost import CostProfile, predict_speedup, speedup_report
from vitfreeze.training.trainer import effective_lr
from vitfreeze.utils.files import ensure_writable, write_json


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("predict-speedup", help="Predecir la reducción de trabajo por iteración")
    add_common_arguments(parser)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, settings: Settings) -> int:
    config = load_run_config(args)
    outdir = ensure_writable(config.output_dir)
    write_resolved_config(config, outdir)

    profile = CostProfile.from_model_config(config.model, config.trainer.backward_factor)
    schedule = LayerSchedule.build(config.schedule, alpha=effective_lr(config), num_layers=config.model.num_layers)
    report = speedup_report(profile, schedule)
    discrete = predict_speedup(profile, schedule.freeze_times, total_steps=config.trainer.steps)
    write_json(outdir / "speedup.json", report)

    print_banner("⏱️  MODELO DE COSTO")
    print(f"   Razón de trabajo predicha:        {report.predicted_work_ratio:.4f}")
    print(f"   ... con {config.trainer.steps} iteraciones:      {discrete:.4f}")
    print(f"   ... sin podar decodificadores:    {report.predicted_work_ratio_without_pruning:.4f}")
    print(f"   Reducción predicha:               {report.predicted_reduction:.1%}")
    print(
        f"   Referencia ViT-B:                 {report.reference_baseline_hours} → "
        f"{report.reference_frozen_hours} h GPU/época ({report.reference_reduction:.1%})"
    )
    print(f"   Horas proyectadas:                {report.projected_hours:.3f}")
    print(f"   Diferencia:                       {report.gap:+.1%}")
    print("\n" + BANNER)
    print(f"📁 {outdir / 'speedup.json'}")
    print(BANNER)
    return 0
