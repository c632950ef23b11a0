"""
Modelo de costo por iteración.

Cada capa congelable i cuesta f_i FLOPs en el forward y b·f_i en el
backward; cada cabeza l cuesta (1 + b)·d_l mientras está viva. Una capa
congelada sigue corriendo su forward (modo inferencia) pero ya no su
backward; una cabeza podada no cuesta nada.
"""

import logging
import statistics
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from vitfreeze.objective.masking import masked_count
from vitfreeze.schedule.freezeout import LayerSchedule, step_for_time
from vitfreeze.schemas.model import ModelConfig
from vitfreeze.schemas.report import SpeedupReport

logger = logging.getLogger(__name__)

REFERENCE_BASELINE_HOURS = 0.48
REFERENCE_FROZEN_HOURS = 0.42


# ============================================
# FLOPs ANALÍTICOS
# ============================================
def linear_flops(rows: int, fan_in: int, fan_out: int) -> float:
    return 2.0 * rows * fan_in * fan_out


def block_flops(tokens: int, dim: int, hidden: int) -> float:
    """Bloque transformer: proyecciones q/k/v/proj, scores + mezcla, MLP."""
    projections = 4 * linear_flops(tokens, dim, dim)
    attention = 2.0 * 2.0 * tokens * tokens * dim
    mlp = linear_flops(tokens, dim, hidden) + linear_flops(tokens, hidden, dim)
    return projections + attention + mlp


def head_flops(config: ModelConfig, scale: int, visible: int) -> float:
    dd = config.decoder_dim
    total = linear_flops(visible, config.embed_dim, dd)
    total += block_flops(config.num_patches, dd, int(round(dd * config.mlp_ratio)))
    side = config.grid
    for step in config.rescale_chain(scale):
        if step == "up":
            total += linear_flops(side * side, dd, 4 * dd)
            side *= 2
        else:
            side //= 2
    return total + linear_flops(side * side, dd, config.hog_bins)


@dataclass(frozen=True)
class CostProfile:
    """
    FLOPs forward por imagen.

    Attributes:
        layer_forward: f_i por capa congelable
        head_forward: d_l por cabeza
        head_taps: Tap de cada cabeza
        backward_factor: b (backward = b · forward)
    """

    layer_forward: Sequence[float]
    head_forward: Sequence[float] = ()
    head_taps: Sequence[int] = ()
    backward_factor: float = 2.0

    @classmethod
    def from_model_config(cls, config: ModelConfig, backward_factor: float = 2.0) -> "CostProfile":
        """Perfil analítico; el encoder procesa sólo los V = N − M tokens visibles."""
        visible = config.num_patches - masked_count(config.num_patches, config.mask_ratio)
        layers = [linear_flops(visible, config.patch_dim, config.embed_dim)]
        layers += [block_flops(visible, config.embed_dim, config.mlp_hidden)] * config.num_blocks
        heads = [head_flops(config, s, visible) for s in config.supervision_scales]
        return cls(tuple(layers), tuple(heads), tuple(config.tap_layers), backward_factor)

    @property
    def full_work(self) -> float:
        """Trabajo de una iteración sin nada congelado."""
        b = self.backward_factor
        return (1.0 + b) * (sum(self.layer_forward) + sum(self.head_forward))

    def iteration_work(self, frozen_prefix: int, alive: Sequence[bool]) -> float:
        """
        Trabajo de una iteración.

        Args:
            frozen_prefix: Capas congeladas (sin backward)
            alive: Bandera por cabeza
        """
        b = self.backward_factor
        work = sum(self.layer_forward)
        work += b * sum(self.layer_forward[frozen_prefix:])
        work += (1.0 + b) * sum(d for d, a in zip(self.head_forward, alive) if a)
        return work


# ============================================
# PREDICCIÓN
# ============================================
def predict_speedup(
    profile: CostProfile,
    freeze_times: Sequence[float],
    total_steps: Optional[int] = None,
    prune: bool = True,
) -> float:
    """
    Razón de trabajo total contra la línea base sin congelamiento.

    Con ``total_steps=None`` integra en tiempo continuo: la capa i hace
    backward durante una fracción t_i del entrenamiento y la cabeza del
    tap l vive una fracción t_l. Con ``total_steps`` usa los pasos
    discretos del trainer (la capa entrena las iteraciones 1..⌈t_i·T⌉).

    Returns:
        float: Razón en (0, 1]
    """
    if len(freeze_times) != len(profile.layer_forward):
        raise ValueError("freeze_times y el perfil tienen distinto número de capas")
    if total_steps is None:
        active = list(freeze_times)
    else:
        active = [step_for_time(t, total_steps) / total_steps for t in freeze_times]
    active = [min(1.0, a) for a in active]

    b = profile.backward_factor
    work = sum(profile.layer_forward)
    work += b * sum(f * a for f, a in zip(profile.layer_forward, active))
    for d, tap in zip(profile.head_forward, profile.head_taps):
        alive = max(active[: tap + 1]) if prune else 1.0
        work += (1.0 + b) * d * alive
    return work / profile.full_work


def project_gpu_hours(baseline_hours: float, ratio: float) -> float:
    """Horas por época proyectadas: línea base × razón de trabajo."""
    return baseline_hours * ratio


def speedup_report(
    profile: CostProfile,
    schedule: LayerSchedule,
    measured_time_ratio: Optional[float] = None,
) -> SpeedupReport:
    """Predicción junto a la medición publicada de ViT-B (0.48 → 0.42 h GPU/época)."""
    ratio = predict_speedup(profile, schedule.freeze_times)
    ratio_no_prune = predict_speedup(profile, schedule.freeze_times, prune=False)
    reference = 1.0 - REFERENCE_FROZEN_HOURS / REFERENCE_BASELINE_HOURS
    return SpeedupReport(
        predicted_work_ratio=ratio,
        predicted_reduction=1.0 - ratio,
        predicted_work_ratio_without_pruning=ratio_no_prune,
        reference_baseline_hours=REFERENCE_BASELINE_HOURS,
        reference_frozen_hours=REFERENCE_FROZEN_HOURS,
        reference_reduction=reference,
        projected_hours=project_gpu_hours(REFERENCE_BASELINE_HOURS, ratio),
        gap=(1.0 - ratio) - reference,
        measured_time_ratio=measured_time_ratio,
    )


# ============================================
# MEDICIÓN
# ============================================
@dataclass
class CostMeter:
    """
    Trabajo predicho y tiempo medido por iteración.

    Attributes:
        profile: Perfil analítico
        discard: Muestras de tiempo iniciales que se descartan (caché fría)
    """

    profile: CostProfile
    discard: int = 10
    samples_ms: List[float] = field(default_factory=list)
    work_trace: List[float] = field(default_factory=list)
    cumulative_work: float = 0.0
    _seen: int = 0

    def record_work(self, frozen_prefix: int, alive: Sequence[bool]) -> float:
        work = self.profile.iteration_work(frozen_prefix, alive)
        self.work_trace.append(work)
        self.cumulative_work += work
        return work

    def record_time(self, elapsed_ms: float) -> bool:
        """
        Agrega una muestra; las primeras ``discard`` se ignoran.

        Returns:
            bool: Si la muestra se conservó
        """
        self._seen += 1
        if self._seen <= self.discard:
            return False
        self.samples_ms.append(elapsed_ms)
        return True

    def median_ms(self) -> Optional[float]:
        return statistics.median(self.samples_ms) if self.samples_ms else None

    def mean_ms(self) -> Optional[float]:
        return statistics.fmean(self.samples_ms) if self.samples_ms else None

    def predicted_ratio(self) -> float:
        """Trabajo acumulado contra el de la misma cantidad de iteraciones sin congelar."""
        if not self.work_trace:
            return 1.0
        return self.cumulative_work / (len(self.work_trace) * self.profile.full_work)


def measured_ratio(frozen: CostMeter, baseline: CostMeter) -> Optional[float]:
    """
    Tiempo medio por iteración de la corrida con congelamiento contra la línea base.

    Se usa la media y no la mediana: la razón de medias es la razón de tiempos
    totales, que es lo que estima predicted_ratio. La mediana cae en el régimen
    previo al congelamiento en la mayoría de los calendarios.
    """
    a, b = frozen.mean_ms(), baseline.mean_ms()
    if a is None or b is None or b <= 0:
        return None
    return a / b
