"""
Ciclo de entrenamiento con congelamiento progresivo y poda de decodificadores.

Por iteración: batch (imágenes, máscaras, objetivos) → forward con el
prefijo congelado en modo inferencia → pérdida de las cabezas vivas →
backward truncado → AdamW con el learning rate de cada capa → eventos de
congelamiento y poda al terminar la iteración.
"""

import logging
import math
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from vitfreeze.autograd.tensor import Tape, Tensor, backward, recording
from vitfreeze.models.vit_mim import DECODER_GROUP, ViTMIM, layer_group
from vitfreeze.schedule.freezeout import FreezeEventTracker, LayerSchedule, iteration_time
from vitfreeze.schemas.report import FreezeEvent, PruneEvent, TrainReport
from vitfreeze.schemas.run import RunConfig
from vitfreeze.training.cost import CostMeter, CostProfile, measured_ratio, predict_speedup
from vitfreeze.training.optimizer import OptimizerState, adamw_step
from vitfreeze.training.prefetch import BatchPrefetcher, PreparedBatch
from vitfreeze.utils.errors import ContractError, TrainingDiverged

logger = logging.getLogger(__name__)


def effective_lr(config: RunConfig) -> float:
    """Regla lineal por tamaño de batch: α = base_lr · B / referencia."""
    return config.schedule.base_lr * config.trainer.batch_size / config.trainer.lr_reference_batch


@dataclass
class StepResult:
    loss: float
    elapsed_ms: float
    frozen_prefix: int
    alive_heads: int
    complete: bool = False


class Trainer:
    """
    Estado de una corrida: modelo, calendario, optimizador y medidor de costo.

    Args:
        config: Configuración completa
        dataset: Imágenes [count, C, H, W] en [0, 1]
        seed: Sobrescribe ``config.trainer.seed``
        threads: Workers de preparación de batches (0 = hilo principal)
        debug: Verifica en cada paso que ningún parámetro congelado tenga gradiente
    """

    def __init__(
        self,
        config: RunConfig,
        dataset: np.ndarray,
        seed: Optional[int] = None,
        threads: int = 0,
        debug: bool = False,
    ):
        if len(dataset) == 0:
            raise ContractError("el dataset está vacío")
        self.config = config
        self.seed = config.trainer.seed if seed is None else seed
        self.threads = threads
        self.debug = debug
        self.dtype = np.dtype(config.trainer.precision)
        self.dataset = np.asarray(dataset, dtype=self.dtype)
        self.total_steps = config.trainer.steps

        self.model = ViTMIM(config.model, seed=self.seed, dtype=self.dtype)
        self.schedule = LayerSchedule.build(config.schedule, alpha=effective_lr(config), num_layers=self.model.num_layers)
        self.state = OptimizerState(
            betas=config.trainer.betas,
            eps=config.trainer.eps,
            weight_decay=config.trainer.weight_decay,
        )
        self.profile = CostProfile.from_model_config(config.model, config.trainer.backward_factor)
        self.meter = CostMeter(self.profile, discard=config.trainer.warmup_discard)
        self.tracker = FreezeEventTracker(self.schedule, self.total_steps)
        self.report = TrainReport()

    # ============================================
    # LEARNING RATES
    # ============================================
    def learning_rates(self, step: int) -> Dict[str, float]:
        """Learning rate de cada grupo entrenable en la iteración ``step``."""
        t = iteration_time(step, self.total_steps)
        freezing = self.config.trainer.freeze
        lrs: Dict[str, float] = {}
        for layer in self.model.layers:
            if layer.frozen:
                continue
            # sin congelamiento todas las capas siguen el coseno global
            lr = self.schedule.lr_at(layer.index, t) if freezing else self.schedule.decoder_lr(t)
            lrs[layer_group(layer.index)] = float(lr)
        lrs[DECODER_GROUP] = float(self.schedule.decoder_lr(t))
        return lrs

    def scales_for_step(self, step: int) -> List[int]:
        """Escalas de las cabezas que seguirán vivas en la iteración ``step``."""
        trainer = self.config.trainer
        if not (trainer.freeze and trainer.prune_decoders):
            return list(self.config.model.supervision_scales)
        steps = self.schedule.freeze_steps(self.total_steps)
        return [
            head.scale
            for head in self.model.heads
            if step <= steps[head.tap_index]
        ]

    # ============================================
    # ITERACIÓN
    # ============================================
    def _check_gradient_exclusion(self, grads: Dict[int, Tensor]) -> None:
        excluded: Dict[int, str] = {}
        for layer in self.model.layers:
            if layer.frozen:
                excluded.update({p.node_id: n for n, p in layer.parameters().items()})
        for head in self.model.heads:
            if head.pruned:
                excluded.update({p.node_id: n for n, p in head.parameters().items()})
        leaked = [excluded[nid] for nid in grads if nid in excluded]
        if leaked:
            raise ContractError(f"gradiente en parámetros congelados o podados: {leaked[:3]}")

    def _diagnostics(self, step: int, lrs: Dict[str, float], terms: Dict[int, float], loss: float) -> Dict:
        return {
            "step": step,
            "loss": loss if math.isfinite(loss) else str(loss),
            "loss_terms": {str(k): (v if math.isfinite(v) else str(v)) for k, v in terms.items()},
            "learning_rates": lrs,
            "frozen_prefix": self.model.frozen_prefix,
            "alive_heads": [h.tap_index for h in self.model.alive_heads()],
        }

    def measure_iteration(self, batch: PreparedBatch) -> StepResult:
        """
        Corre una iteración completa y registra su duración (reloj monotónico).

        Raises:
            TrainingDiverged: Si la pérdida no es finita
        """
        step = batch.step
        prefix = self.model.frozen_prefix
        alive = [not h.pruned for h in self.model.heads]
        lrs = self.learning_rates(step)

        start = time.perf_counter()
        tape = Tape()
        with recording(tape):
            result = self.model.forward_loss(batch.images, batch.masks, batch.targets)
        if result.complete:
            return StepResult(0.0, 0.0, prefix, 0, complete=True)

        loss = result.total.item()
        if not math.isfinite(loss):
            diagnostics = self._diagnostics(step, lrs, result.term_values(), loss)
            logger.error("Pérdida no finita en la iteración %d: %s", step, diagnostics)
            raise TrainingDiverged(f"pérdida no finita en la iteración {step}", diagnostics)

        grads = backward(tape, result.total)
        if self.debug:
            self._check_gradient_exclusion(grads)
        adamw_step(self.model.param_groups(), grads, lrs, self.state)
        elapsed_ms = (time.perf_counter() - start) * 1000.0

        self.meter.record_work(prefix, alive)
        if self.config.trainer.record_timing:
            self.meter.record_time(elapsed_ms)
        else:
            elapsed_ms = 0.0
        logger.debug("iteración %d pérdida %.6f (%d ops en la cinta)", step, loss, len(tape))
        return StepResult(loss, elapsed_ms, prefix, sum(alive))

    def apply_events(self, step: int) -> None:
        """Congela las capas que llegaron a su tiempo y poda las cabezas muertas."""
        trainer = self.config.trainer
        if not trainer.freeze:
            return
        for index in self.tracker.update(step):
            self.model.freeze_layer(index, step, self.state)
            self.report.freeze_events.append(FreezeEvent(layer=index, step=step))
        if not trainer.prune_decoders:
            return
        for head in self.model.alive_heads():
            if self.model.prune_decoder_if_dead(head, step, self.state):
                self.report.prune_events.append(PruneEvent(head=head.tap_index, step=step))

    # ============================================
    # CORRIDA
    # ============================================
    def run(self) -> TrainReport:
        """
        Entrena ``trainer.steps`` iteraciones (o hasta que no quedan cabezas vivas).

        Raises:
            TrainingDiverged: Si la pérdida deja de ser finita; ``self.report`` queda con ``aborted=True``
        """
        trainer = self.config.trainer
        report = self.report
        if trainer.freeze:
            report.predicted_work_ratio = predict_speedup(
                self.profile,
                self.schedule.freeze_times,
                total_steps=self.total_steps,
                prune=trainer.prune_decoders,
            )
        logger.info(
            "Entrenando %d iteraciones, batch %d, alpha efectivo %.3g, congelamiento=%s",
            self.total_steps,
            trainer.batch_size,
            self.schedule.alpha,
            trainer.freeze,
        )

        batches = BatchPrefetcher(
            self.dataset,
            self.config.model,
            self.seed,
            trainer.batch_size,
            self.total_steps,
            self.scales_for_step,
            threads=self.threads,
        )
        for batch in batches:
            try:
                result = self.measure_iteration(batch)
            except TrainingDiverged as e:
                report.aborted = True
                report.diagnostics = e.diagnostics
                raise
            if result.complete:
                logger.info("No quedan decodificadores vivos; fin en la iteración %d", batch.step - 1)
                break
            report.loss_trace.append(result.loss)
            report.iter_ms.append(result.elapsed_ms)
            report.frozen_prefix_trace.append(result.frozen_prefix)
            report.alive_heads_trace.append(result.alive_heads)
            report.steps_run = batch.step
            self.apply_events(batch.step)

        return report


def train(
    config: RunConfig,
    dataset: np.ndarray,
    seed: Optional[int] = None,
    threads: int = 0,
    debug: bool = False,
) -> TrainReport:
    """Entrena con ``config`` y retorna el reporte."""
    return Trainer(config, dataset, seed=seed, threads=threads, debug=debug).run()


def baseline_config(config: RunConfig) -> RunConfig:
    """Misma corrida sin congelamiento ni poda."""
    trainer = config.trainer.model_copy(update={"freeze": False, "prune_decoders": False})
    return config.model_copy(update={"trainer": trainer})


def run_baseline(frozen: Trainer, dataset: np.ndarray, threads: int = 0, debug: bool = False) -> Trainer:
    """
    Corre la línea base de una corrida con congelamiento ya terminada.

    Usa la semilla de ``frozen`` y le asigna ``measured_time_ratio``.

    Returns:
        Trainer: La línea base

    Raises:
        TrainingDiverged: Si la línea base aborta; ``frozen`` queda intacta
    """
    base = Trainer(baseline_config(frozen.config), dataset, seed=frozen.seed, threads=threads, debug=debug)
    base.run()
    ratio = measured_ratio(frozen.meter, base.meter)
    frozen.report.measured_time_ratio = ratio
    if ratio is not None:
        logger.info(
            "Tiempo medido %.3f vs. predicho %.3f", ratio, frozen.report.predicted_work_ratio
        )
    return base


def compare_with_baseline(
    config: RunConfig,
    dataset: np.ndarray,
    seed: Optional[int] = None,
    threads: int = 0,
    debug: bool = False,
) -> Tuple[Trainer, Trainer]:
    """
    Corre el calendario con congelamiento y la línea base con la misma semilla.

    Returns:
        tuple: (corrida con congelamiento, línea base); el reporte de la
        primera lleva ``measured_time_ratio``
    """
    frozen = Trainer(config, dataset, seed=seed, threads=threads, debug=debug)
    frozen.run()
    return frozen, run_baseline(frozen, dataset, threads=threads, debug=debug)
