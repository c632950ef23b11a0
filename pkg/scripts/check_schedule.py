"""
Script para revisar el calendario de congelamiento de un preset.
Ejecutar: python check_schedule.py [vit-toy|vit-b]
"""

import sys
import os

# Agregar el directorio raíz al path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from vitfreeze.schedule.freezeout import LayerSchedule, lr_integrals
from vitfreeze.repositories.config_file import parse_config
from vitfreeze.training.trainer import effective_lr

preset = sys.argv[1] if len(sys.argv) > 1 else "vit-toy"
config = parse_config(preset=preset)
steps = config.trainer.steps
schedule = LayerSchedule.build(config.schedule, alpha=effective_lr(config), num_layers=config.model.num_layers)

print("=" * 60)
print(f"📈 CALENDARIO ({preset}, {config.schedule.spacing}, t0={config.schedule.t0})")
print("=" * 60)

print(f"\n   alpha efectivo: {schedule.alpha:.3g}  (batch {config.trainer.batch_size})")
print(f"   calentamiento: {schedule.warmup:.0%} de {steps} iteraciones\n")
print(f"   {'capa':>4}  {'t_i':>8}  {'alpha_i(0)':>11}  {'paso':>5}")
for i, (t, lr) in enumerate(zip(schedule.freeze_times, schedule.initial_lrs)):
    print(f"   {i:>4}  {t:>8.4f}  {lr:>11.4g}  {schedule.freeze_step(i, steps):>5}")

# con lr escalado cada curva encierra la misma área
integrals = lr_integrals(schedule)
print(f"\n🧪 Área bajo cada curva: {min(integrals):.6g} .. {max(integrals):.6g}")
if config.schedule.lr_scaling == "scaled" and max(integrals) - min(integrals) > 1e-6 * schedule.alpha:
    print("   ⚠️  Las áreas no coinciden")
else:
    print("   ✅ OK")

print("\n" + "=" * 60)
print("💡 Usa `vitfreeze schedule` para exportar el CSV y la gráfica")
print("=" * 60)
