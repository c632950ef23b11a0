"""
Fixtures compartidas.
"""

import numpy as np
import pytest

from vitfreeze.objective.hog import build_targets
from vitfreeze.objective.masking import MaskBatch, batch_seed, sample_mask
from vitfreeze.repositories.config_file import parse_config
from vitfreeze.repositories.synthetic import synth_dataset
from vitfreeze.schemas.model import ModelConfig
from vitfreeze.training.gradcheck import TINY_MODEL


@pytest.fixture
def tiny_config() -> ModelConfig:
    """ViT de rejilla 4x4 con una cabeza que sube de escala y otra que baja."""
    return TINY_MODEL


@pytest.fixture
def toy_model_config() -> ModelConfig:
    return ModelConfig()


def make_batch(config: ModelConfig, seed: int = 0, batch_size: int = 2, step: int = 1):
    """(imágenes, máscaras, objetivos) deterministas para ``config``."""
    images = synth_dataset(seed, batch_size, config.image_size, config.image_size, config.channels)
    scales = tuple(dict.fromkeys(config.supervision_scales))
    plans = [
        sample_mask(batch_seed(seed, step, j), config.num_patches, config.mask_ratio, scales)
        for j in range(batch_size)
    ]
    targets = build_targets(images, scales, config.hog_bins, config.hog_channel_rule)
    return images, MaskBatch.from_plans(plans), targets


@pytest.fixture
def tiny_batch(tiny_config):
    return make_batch(tiny_config)


@pytest.fixture
def short_run_config(tmp_path):
    """Corrida del preset vit-toy reducida para pruebas rápidas."""
    return parse_config(
        preset="vit-toy",
        overrides={
            "model": {"embed_dim": 32, "num_heads": 2, "decoder_dim": 16, "decoder_heads": 2},
            "trainer": {"batch_size": 4, "steps": 40, "warmup_discard": 0, "record_timing": False},
            "data": {"count": 16},
            "output_dir": str(tmp_path / "run"),
        },
    )


@pytest.fixture
def short_dataset(short_run_config) -> np.ndarray:
    c = short_run_config
    return synth_dataset(c.trainer.seed, c.data.count, c.model.image_size, c.model.image_size, c.model.channels)
