"""
Subcomando ``grad-check``: diferencias finitas sobre cada operación y el grafo completo.
"""

import argparse
from dataclasses import asdict

from vitfreeze.routers.common import BANNER, add_common_arguments, load_run_config, print_banner
from vitfreeze.settings import Settings
from vitfreeze.training.gradcheck import run_suite
from vitfreeze.utils.files import ensure_writable, write_json

EXIT_GRADCHECK_FAILED = 3


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("grad-check", help="Verificar gradientes por diferencias finitas")
    add_common_arguments(parser)
    parser.add_argument("--seeds", type=int, default=20, help="Número de semillas (desde --seed)")
    parser.add_argument("--tolerance", type=float, default=1e-4, help="Error relativo máximo")
    parser.add_argument("--skip-model", action="store_true", help="Omitir el grafo completo del ViT")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, settings: Settings) -> int:
    config = load_run_config(args)
    outdir = ensure_writable(config.output_dir)
    first = config.trainer.seed
    seeds = range(first, first + args.seeds)

    results = run_suite(seeds, tolerance=args.tolerance, include_model=not args.skip_model)
    failed = [r for r in results if not r.passed]
    write_json(
        outdir / "gradcheck.json",
        {
            "tolerance": args.tolerance,
            "passed": len(results) - len(failed),
            "failed": len(failed),
            "results": [asdict(r) for r in results],
        },
    )

    print_banner("🧪 VERIFICACIÓN DE GRADIENTES")
    worst = {}
    for r in results:
        worst[r.name] = max(worst.get(r.name, 0.0), r.max_rel_error)
    for name, err in worst.items():
        mark = "✅" if err < args.tolerance else "❌"
        print(f"   {mark} {name:<24s} error máx {err:.2e}")
    print("\n" + BANNER)
    print(f"   {len(results) - len(failed)}/{len(results)} casos dentro de {args.tolerance:.0e}")
    print(BANNER)
    return EXIT_GRADCHECK_FAILED if failed else 0
