"""
Suite de verificación de gradientes: cada operación diferenciable más el
grafo completo forward → pérdida de un ViT diminuto.
"""

import logging
from typing import List, Optional, Sequence

import numpy as np

from vitfreeze.autograd.gradcheck import (
    OP_CASES,
    GradCheckResult,
    check_parameter_gradients,
    run_cases,
)
from vitfreeze.models.vit_mim import ViTMIM
from vitfreeze.objective.hog import build_targets
from vitfreeze.objective.masking import MaskBatch, batch_seed, sample_mask
from vitfreeze.schemas.model import ModelConfig

logger = logging.getLogger(__name__)

DEFAULT_SEEDS = tuple(range(20))

# rejilla 4x4; una cabeza con upsample y otra con pool
TINY_MODEL = ModelConfig(
    image_size=16,
    channels=3,
    patch_size=4,
    embed_dim=8,
    num_blocks=2,
    num_heads=2,
    mlp_ratio=2.0,
    tap_layers=[1, 2],
    supervision_scales=[8, 2],
    decoder_dim=8,
    decoder_heads=2,
    mask_ratio=0.5,
    hog_bins=4,
)


def full_graph_errors(
    seed: int,
    config: ModelConfig = TINY_MODEL,
    batch_size: int = 2,
    params_per_seed: int = 8,
    elements: int = 3,
) -> dict:
    """
    Errores relativos del grafo completo para una muestra de parámetros.

    Returns:
        dict: nombre del parámetro → error relativo máximo
    """
    rng = np.random.default_rng(seed)
    model = ViTMIM(config, seed=seed, dtype=np.float64)
    images = rng.uniform(0.0, 1.0, size=(batch_size, config.channels, config.image_size, config.image_size))
    scales = tuple(dict.fromkeys(config.supervision_scales))
    plans = [
        sample_mask(batch_seed(seed, 1, j), config.num_patches, config.mask_ratio, scales)
        for j in range(batch_size)
    ]
    masks = MaskBatch.from_plans(plans)
    targets = build_targets(images, scales, config.hog_bins, config.hog_channel_rule)

    params = model.parameters()
    names = sorted(params)
    picked = rng.choice(len(names), size=min(params_per_seed, len(names)), replace=False)
    subset = {names[k]: params[names[k]] for k in sorted(picked)}

    def loss_fn():
        return model.forward_loss(images, masks, targets).total

    return check_parameter_gradients(loss_fn, subset, rng=rng, max_elements=elements)


def run_suite(
    seeds: Sequence[int] = DEFAULT_SEEDS,
    tolerance: float = 1e-4,
    include_model: bool = True,
    max_elements: Optional[int] = 64,
) -> List[GradCheckResult]:
    """
    Ejecuta todos los casos por operación y, opcionalmente, el grafo completo.

    Returns:
        list: Un resultado por (caso, semilla)
    """
    results = run_cases(OP_CASES, seeds, tolerance=tolerance, max_elements=max_elements)
    if include_model:
        for seed in seeds:
            errors = full_graph_errors(seed)
            worst = max(errors.values()) if errors else 0.0
            ok = worst < tolerance
            if not ok:
                logger.warning("gradcheck toy_vit seed=%d falló: %.3e", seed, worst)
            results.append(GradCheckResult("toy_vit_loss", seed, worst, len(errors), ok))
    passed = sum(r.passed for r in results)
    logger.info("gradcheck: %d/%d casos dentro de %.0e", passed, len(results), tolerance)
    return results
