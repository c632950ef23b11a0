"""
Preparación de batches: imágenes, máscaras y objetivos HOG.

El contenido del batch de cada iteración depende sólo de (semilla, paso),
nunca del orden en que terminan los workers. Con ``threads=0`` todo corre
en el hilo principal.
"""

import logging
from collections import deque
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Deque, Iterator, Optional, Sequence

import numpy as np

from vitfreeze.objective.hog import SupervisionTarget, build_targets
from vitfreeze.objective.masking import MaskBatch, batch_seed, sample_mask
from vitfreeze.schemas.model import ModelConfig

logger = logging.getLogger(__name__)

ScalesForStep = Callable[[int], Sequence[int]]


@dataclass(frozen=True)
class PreparedBatch:
    step: int
    indices: np.ndarray
    images: np.ndarray
    masks: MaskBatch
    targets: SupervisionTarget


def batch_indices(seed: int, step: int, count: int, batch_size: int) -> np.ndarray:
    """Índices de las imágenes del paso ``step`` (sin reemplazo si alcanza el dataset)."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, step, 0x5EED]))
    return np.sort(rng.choice(count, size=batch_size, replace=count < batch_size))


def prepare_batch(
    dataset: np.ndarray,
    config: ModelConfig,
    seed: int,
    step: int,
    batch_size: int,
    scales: Sequence[int],
) -> PreparedBatch:
    """
    Arma el batch de ``step``.

    Args:
        dataset: Imágenes [count, C, H, W] en [0, 1]
        config: Modelo (N, r, HOG)
        seed: Semilla de la corrida
        step: Iteración (desde 1)
        batch_size: B
        scales: Escalas cuyos objetivos hacen falta (las de cabezas vivas)
    """
    idx = batch_indices(seed, step, len(dataset), batch_size)
    images = dataset[idx]
    all_scales = tuple(dict.fromkeys(config.supervision_scales))
    plans = [
        sample_mask(batch_seed(seed, step, j), config.num_patches, config.mask_ratio, all_scales)
        for j in range(batch_size)
    ]
    wanted = list(dict.fromkeys(scales))
    targets = (
        build_targets(images, wanted, config.hog_bins, config.hog_channel_rule)
        if wanted
        else SupervisionTarget({})
    )
    return PreparedBatch(step, idx, images, MaskBatch.from_plans(plans), targets)


class BatchPrefetcher:
    """
    Itera los batches de los pasos ``start..total_steps`` en orden.

    Con ``threads > 0`` mantiene una cola acotada de batches en preparación
    (a lo sumo ``depth``); el hilo principal los consume en orden de paso.
    """

    def __init__(
        self,
        dataset: np.ndarray,
        config: ModelConfig,
        seed: int,
        batch_size: int,
        total_steps: int,
        scales_for_step: ScalesForStep,
        threads: int = 0,
        depth: Optional[int] = None,
        start: int = 1,
    ):
        self.dataset = dataset
        self.config = config
        self.seed = seed
        self.batch_size = batch_size
        self.total_steps = total_steps
        self.scales_for_step = scales_for_step
        self.threads = threads
        self.depth = depth or max(2, 2 * threads)
        self.start = start

    def _prepare(self, step: int) -> PreparedBatch:
        return prepare_batch(
            self.dataset, self.config, self.seed, step, self.batch_size, self.scales_for_step(step)
        )

    def __iter__(self) -> Iterator[PreparedBatch]:
        steps = range(self.start, self.total_steps + 1)
        if self.threads <= 0:
            for step in steps:
                yield self._prepare(step)
            return

        logger.debug("Preparando batches con %d workers", self.threads)
        pending: Deque[Future] = deque()
        it = iter(steps)
        with ThreadPoolExecutor(max_workers=self.threads, thread_name_prefix="vitfreeze-batch") as pool:
            for step in it:
                pending.append(pool.submit(self._prepare, step))
                if len(pending) >= self.depth:
                    break
            while pending:
                batch = pending.popleft().result()
                nxt = next(it, None)
                if nxt is not None:
                    pending.append(pool.submit(self._prepare, nxt))
                yield batch
