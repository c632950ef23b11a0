"""
Script para comparar la reducción de trabajo predicha con distintos t0.
Ejecutar: python check_speedup.py [vit-toy|vit-b]
"""

import sys
import os

# Agregar el directorio raíz al path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from vitfreeze.repositories.config_file import parse_config
from vitfreeze.schedule.freezeout import compute_freeze_times
from vitfreeze.training.cost import REFERENCE_BASELINE_HOURS, CostProfile, predict_speedup, project_gpu_hours

preset = sys.argv[1] if len(sys.argv) > 1 else "vit-b"
config = parse_config(preset=preset)
profile = CostProfile.from_model_config(config.model, config.trainer.backward_factor)
layers = config.model.num_layers

print("=" * 60)
print(f"⏱️  REDUCCIÓN PREDICHA POR t0 ({preset})")
print("=" * 60)

print(f"\n   {'t0':>4}  {'espaciado':>9}  {'con poda':>9}  {'sin poda':>9}  {'h GPU':>6}")
for t0 in (0.5, 0.6, 0.7, 0.8, 0.9):
    for spacing in ("linear", "cubic"):
        times = compute_freeze_times(layers, t0, spacing)
        ratio = predict_speedup(profile, times)
        no_prune = predict_speedup(profile, times, prune=False)
        hours = project_gpu_hours(REFERENCE_BASELINE_HOURS, ratio)
        print(f"   {t0:>4.1f}  {spacing:>9}  {1 - ratio:>9.1%}  {1 - no_prune:>9.1%}  {hours:>6.3f}")

print("\n" + "=" * 60)
print(f"💡 Referencia ViT-B: {REFERENCE_BASELINE_HOURS} h GPU/época sin congelar")
print("=" * 60)
