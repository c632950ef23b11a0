"""
Calendario de congelamiento progresivo.

Cada capa i tiene su tiempo de congelamiento t_i ∈ (0, 1] (fracción del
entrenamiento) y su learning rate inicial α_i(0). El learning rate sube
linealmente durante el calentamiento [0, w) y luego sigue un coseno que
llega exactamente a 0 en t_i:

    α_i(t) = α_i(0) · t / w                                  t < w
    α_i(t) = 0.5 · α_i(0) · (1 + cos(π (t − w) / (t_i − w)))  w ≤ t < t_i
    α_i(t) = 0                                               t ≥ t_i

El tiempo normalizado t cuenta todas las iteraciones, calentamiento incluido.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Set, Tuple

import numpy as np
from scipy.integrate import trapezoid

from vitfreeze.schemas.schedule import ScheduleConfig
from vitfreeze.utils.errors import ConfigError, ContractError

# tolerancia para que t_i·T entero no salte al paso siguiente por redondeo
_STEP_EPS = 1e-9


# ============================================
# TIEMPOS Y LEARNING RATES INICIALES
# ============================================
def compute_freeze_times(num_layers: int, t0: float, spacing: str = "cubic") -> List[float]:
    """
    Tiempos de congelamiento t_0..t_{L−1}.

    Args:
        num_layers: L (≥ 2)
        t0: Fracción elegida para la primera capa, en (0, 1]
        spacing: "linear" o "cubic" (se elevan al cubo los valores lineales)

    Returns:
        list: t_i no decrecientes, con t_{L−1} = 1

    Raises:
        ConfigError: Si t0 no está en (0, 1] o el espaciado es desconocido
        ContractError: Si L < 2
    """
    if not 0.0 < t0 <= 1.0:
        raise ConfigError(f"t0 debe estar en (0, 1], recibido {t0}")
    if num_layers < 2:
        raise ContractError(f"se necesitan al menos 2 capas, recibido {num_layers}")
    if spacing not in ("linear", "cubic"):
        raise ConfigError(f"spacing desconocido: {spacing!r}")

    step = (1.0 - t0) / (num_layers - 1)
    times = [t0 + i * step for i in range(num_layers)]
    times[-1] = 1.0
    if spacing == "cubic":
        times = [t**3 for t in times]
    return times


def initial_lr(alpha: float, t_i: float, lr_scaling: str = "scaled") -> float:
    """
    α_i(0): α / t_i en modo scaled, α en modo unscaled.

    Raises:
        ContractError: Si t_i ≤ 0
    """
    if t_i <= 0.0:
        raise ContractError(f"t_i debe ser positivo, recibido {t_i}")
    if lr_scaling == "scaled":
        return alpha / t_i
    if lr_scaling == "unscaled":
        return alpha
    raise ConfigError(f"lr_scaling desconocido: {lr_scaling!r}")


def _warm_cosine(t, peak: float, warmup: float, end: float):
    """Rampa lineal hasta ``warmup`` y coseno hasta 0 en ``end``. Acepta escalares o arreglos."""
    t = np.asarray(t, dtype=np.float64)
    ramp = peak * t / warmup if warmup > 0 else np.full_like(t, peak)
    span = end - warmup
    phase = np.clip((t - warmup) / span, 0.0, 1.0) if span > 0 else np.ones_like(t)
    cosine = 0.5 * peak * (1.0 + np.cos(np.pi * phase))
    out = np.where(t < warmup, ramp, np.where(t < end, cosine, 0.0))
    return float(out) if out.ndim == 0 else out


def step_for_time(t_i: float, total_steps: int) -> int:
    """Iteración tras la cual se congela una capa con tiempo t_i: ⌈t_i·T⌉ (mínimo 1)."""
    return max(1, math.ceil(t_i * total_steps - _STEP_EPS))


# ============================================
# CALENDARIO POR CAPA
# ============================================
@dataclass(frozen=True)
class LayerSchedule:
    """
    Calendario inmutable de todas las capas.

    Attributes:
        freeze_times: t_i por capa
        initial_lrs: α_i(0) por capa
        warmup: Fin del calentamiento w
        alpha: Learning rate base efectivo (ya con la regla por batch)
        lr_scaling: "scaled" o "unscaled"
    """

    freeze_times: Tuple[float, ...]
    initial_lrs: Tuple[float, ...]
    warmup: float
    alpha: float
    lr_scaling: str = "scaled"

    @classmethod
    def build(
        cls,
        config: ScheduleConfig,
        alpha: Optional[float] = None,
        num_layers: Optional[int] = None,
    ) -> "LayerSchedule":
        """
        Args:
            config: Parámetros del calendario
            alpha: α efectivo; por defecto ``config.base_lr``
            num_layers: Capas; por defecto ``config.num_layers`` (13 si falta)
        """
        layers = num_layers or config.num_layers or 13
        alpha = config.base_lr if alpha is None else alpha
        times = compute_freeze_times(layers, config.t0, config.spacing)
        lrs = [initial_lr(alpha, t, config.lr_scaling) for t in times]
        if config.warmup_fraction >= min(times):
            raise ConfigError(
                f"warmup_fraction={config.warmup_fraction} debe ser menor que min t_i={min(times):.4f}"
            )
        return cls(tuple(times), tuple(lrs), config.warmup_fraction, alpha, config.lr_scaling)

    @property
    def num_layers(self) -> int:
        return len(self.freeze_times)

    def lr_at(self, layer: int, t):
        """Learning rate de ``layer`` en el tiempo normalizado ``t`` (escalar o arreglo)."""
        return _warm_cosine(t, self.initial_lrs[layer], self.warmup, self.freeze_times[layer])

    def decoder_lr(self, t):
        """Decodificadores: un solo coseno hasta t = 1 con el mismo calentamiento, pico α."""
        return _warm_cosine(t, self.alpha, self.warmup, 1.0)

    def freeze_step(self, layer: int, total_steps: int) -> int:
        """Iteración tras la cual se congela la capa: ⌈t_i·T⌉."""
        return step_for_time(self.freeze_times[layer], total_steps)

    def freeze_steps(self, total_steps: int) -> List[int]:
        return [self.freeze_step(i, total_steps) for i in range(self.num_layers)]

    def grid(self, points: int = 1000) -> Tuple[np.ndarray, np.ndarray]:
        """
        Curvas en una rejilla uniforme de [0, 1].

        Returns:
            tuple: (t [points], lr [capas, points])
        """
        t = np.linspace(0.0, 1.0, points)
        return t, np.stack([self.lr_at(i, t) for i in range(self.num_layers)])


# ============================================
# EVENTOS DE CONGELAMIENTO
# ============================================
def freeze_events(
    schedule: LayerSchedule,
    step: int,
    total_steps: int,
    reported: Set[int],
) -> List[int]:
    """
    Capas que alcanzaron su tiempo al terminar ``step`` y aún no se reportaron.

    Args:
        schedule: Calendario
        step: Iteración recién terminada (creciente entre llamadas)
        total_steps: T
        reported: Conjunto de capas ya reportadas; se actualiza

    Returns:
        list: Índices nuevos en orden ascendente
    """
    new = [
        i
        for i in range(schedule.num_layers)
        if i not in reported and schedule.freeze_step(i, total_steps) <= step
    ]
    reported.update(new)
    return new


@dataclass
class FreezeEventTracker:
    """Lleva el conjunto de capas ya reportadas entre iteraciones."""

    schedule: LayerSchedule
    total_steps: int
    reported: Set[int] = field(default_factory=set)
    _last_step: int = 0

    def update(self, step: int) -> List[int]:
        if step < self._last_step:
            raise ContractError(f"paso {step} anterior al último consultado {self._last_step}")
        self._last_step = step
        return freeze_events(self.schedule, step, self.total_steps, self.reported)

    @property
    def complete(self) -> bool:
        return len(self.reported) == self.schedule.num_layers


# ============================================
# INTEGRAL DE LA CURVA
# ============================================
def lr_curve_integral(layer: int, schedule: LayerSchedule, points: int = 100_001) -> float:
    """∫₀¹ α_i(t) dt por la regla del trapecio."""
    t = np.linspace(0.0, 1.0, points)
    # incluye t_i y w exactos para no recortar los quiebres
    t = np.union1d(t, [schedule.warmup, schedule.freeze_times[layer]])
    return float(trapezoid(schedule.lr_at(layer, t), t))


def lr_integrals(schedule: LayerSchedule, points: int = 100_001) -> List[float]:
    return [lr_curve_integral(i, schedule, points) for i in range(schedule.num_layers)]


def iteration_time(step: int, total_steps: int) -> float:
    """Tiempo normalizado con que se calcula el learning rate de la iteración ``step`` (desde 1)."""
    return (step - 1) / total_steps


def describe(schedule: LayerSchedule, total_steps: Optional[int] = None) -> Sequence[str]:
    """Líneas legibles del calendario (una por capa)."""
    lines = []
    for i, (t, lr) in enumerate(zip(schedule.freeze_times, schedule.initial_lrs)):
        extra = f"  paso {schedule.freeze_step(i, total_steps)}" if total_steps else ""
        lines.append(f"capa {i:2d}  t_i={t:.6f}  alpha_i(0)={lr:.6g}{extra}")
    return lines
