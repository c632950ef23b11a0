"""
Script para verificar la forma del ViT con sus decodificadores.
Ejecutar: python check_model.py [vit-toy|vit-b]
"""

import sys
import os

# Agregar el directorio raíz al path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from vitfreeze.models.vit_mim import ViTMIM
from vitfreeze.repositories.config_file import parse_config
from vitfreeze.training.cost import CostProfile

preset = sys.argv[1] if len(sys.argv) > 1 else "vit-toy"
config = parse_config(preset=preset)
model_config = config.model

print("=" * 60)
print(f"🔍 VERIFICACIÓN DEL MODELO ({preset})")
print("=" * 60)

print(f"\n📐 Imagen {model_config.image_size}x{model_config.image_size}, parches de {model_config.patch_size}")
print(f"   Rejilla {model_config.grid}x{model_config.grid} = {model_config.num_patches} parches")
print(f"   Capas congelables: {model_config.num_layers}")

model = ViTMIM(model_config, seed=config.trainer.seed)
profile = CostProfile.from_model_config(model_config, config.trainer.backward_factor)

print("\n📋 Capas del encoder:")
for layer, flops in zip(model.layers, profile.layer_forward):
    count = sum(p.size for p in layer.parameters().values())
    print(f"   - capa {layer.index:2d}: {count:>10,d} parámetros  {flops / 1e6:>10.2f} MFLOPs")

print("\n📋 Decodificadores:")
for head, flops in zip(model.heads, profile.head_forward):
    count = sum(p.size for p in head.parameters().values())
    chain = " → ".join(model_config.rescale_chain(head.scale)) or "identidad"
    print(f"   - tap {head.tap_index:2d}  escala {head.scale:3d}²  ({chain})")
    print(f"     {count:,d} parámetros  {flops / 1e6:.2f} MFLOPs")

total = sum(p.size for p in model.parameters().values())
print("\n" + "=" * 60)
print(f"✅ {total:,d} parámetros en total")
print("=" * 60)
