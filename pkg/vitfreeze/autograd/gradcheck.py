"""
Verificación de gradientes por diferencias finitas centrales.

Compara el gradiente de la cinta contra (f(x+h) - f(x-h)) / 2h elemento
por elemento. Todas las comparaciones se hacen en float64.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from vitfreeze.autograd import ops
from vitfreeze.autograd.tensor import Tape, Tensor, backward, no_grad, recording

logger = logging.getLogger(__name__)

GraphFn = Callable[..., Tensor]


@dataclass
class GradCheckResult:
    """Resultado de un caso de verificación."""

    name: str
    seed: int
    max_rel_error: float
    checked: int
    passed: bool


# piso absoluto: ruido de las diferencias centrales con h=1e-5 en float64
ABS_FLOOR = 1e-5
# piso relativo a la magnitud del gradiente del mismo tensor
SCALE_FLOOR = 1e-2


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = ABS_FLOOR) -> np.ndarray:
    """|a - n| / max(|a|, |n|, floor)."""
    denom = np.maximum(floor, np.maximum(np.abs(analytic), np.abs(numeric)))
    return np.abs(analytic - numeric) / denom


def _worst_error(analytic: np.ndarray, numeric: np.ndarray, full: np.ndarray) -> float:
    """Error máximo de los elementos muestreados; el piso escala con el gradiente completo."""
    if numeric.size == 0:
        return 0.0
    scale = max(float(np.max(np.abs(full), initial=0.0)), float(np.max(np.abs(numeric))))
    floor = max(ABS_FLOOR, SCALE_FLOOR * scale)
    return float(np.max(relative_error(analytic, numeric, floor)))


def _scalarize(out: Tensor, projection: Optional[np.ndarray]) -> Tensor:
    if out.size == 1:
        return ops.reshape(out, ())
    assert projection is not None
    return ops.sum(ops.mul(out, projection))


def check_gradients(
    fn: GraphFn,
    inputs: Sequence[np.ndarray],
    step: float = 1e-5,
    rng: Optional[np.random.Generator] = None,
    max_elements: Optional[int] = None,
) -> float:
    """
    Máximo error relativo entre autodiff y diferencias finitas.

    Las salidas no escalares se reducen con una proyección aleatoria fija,
    así se prueba el VJP completo y no sólo la suma.

    Args:
        fn: Grafo a verificar; recibe Tensores y retorna un Tensor
        inputs: Valores de entrada (se convierten a float64)
        step: Paso h de las diferencias centrales
        rng: Generador para la proyección y el muestreo de elementos
        max_elements: Si se indica, verifica sólo esa cantidad de elementos por entrada

    Returns:
        float: Error relativo máximo
    """
    rng = rng or np.random.default_rng(0)
    arrays = [np.array(a, dtype=np.float64) for a in inputs]

    with no_grad():
        sample_out = fn(*[Tensor(a) for a in arrays])
    projection = None if sample_out.size == 1 else rng.standard_normal(sample_out.shape)

    def evaluate(values: List[np.ndarray]) -> float:
        with no_grad():
            return float(_scalarize(fn(*[Tensor(v) for v in values]), projection).data)

    tape = Tape()
    leaves = [Tensor(a, requires_grad=True) for a in arrays]
    with recording(tape):
        loss = _scalarize(fn(*leaves), projection)
    grads = backward(tape, loss)

    worst = 0.0
    for k, leaf in enumerate(leaves):
        analytic = grads[leaf.node_id].data if leaf.node_id in grads else np.zeros_like(arrays[k])
        flat = arrays[k].reshape(-1)
        positions = np.arange(flat.size)
        if max_elements is not None and flat.size > max_elements:
            positions = rng.choice(flat.size, size=max_elements, replace=False)
        numerics = []
        for pos in positions:
            original = flat[pos]
            flat[pos] = original + step
            plus = evaluate(arrays)
            flat[pos] = original - step
            minus = evaluate(arrays)
            flat[pos] = original
            numerics.append((plus - minus) / (2.0 * step))
        sampled = analytic.reshape(-1)[positions]
        worst = max(worst, _worst_error(sampled, np.asarray(numerics, dtype=np.float64), analytic))
    return worst


def check_parameter_gradients(
    loss_fn: Callable[[], Tensor],
    params: Dict[str, Tensor],
    step: float = 1e-5,
    rng: Optional[np.random.Generator] = None,
    max_elements: Optional[int] = None,
) -> Dict[str, float]:
    """
    Verifica el gradiente de una pérdida escalar respecto de parámetros existentes.

    Los parámetros se perturban en sitio y se restauran; deben ser float64.

    Returns:
        dict: nombre → error relativo máximo
    """
    rng = rng or np.random.default_rng(0)
    for p in params.values():
        # la perturbación en sitio necesita una vista plana
        p.data = np.ascontiguousarray(p.data)
    tape = Tape()
    with recording(tape):
        loss = loss_fn()
    grads = backward(tape, loss)

    def evaluate() -> float:
        with no_grad():
            return float(loss_fn().data)

    errors: Dict[str, float] = {}
    for name, p in params.items():
        analytic = grads[p.node_id].data.reshape(-1) if p.node_id in grads else np.zeros(p.size)
        flat = p.data.reshape(-1)
        positions = np.arange(flat.size)
        if max_elements is not None and flat.size > max_elements:
            positions = rng.choice(flat.size, size=max_elements, replace=False)
        numerics = []
        for pos in positions:
            original = flat[pos]
            flat[pos] = original + step
            plus = evaluate()
            flat[pos] = original - step
            minus = evaluate()
            flat[pos] = original
            numerics.append((plus - minus) / (2.0 * step))
        errors[name] = _worst_error(analytic[positions], np.asarray(numerics, dtype=np.float64), analytic)
    return errors


# ============================================
# CASOS POR OPERACIÓN
# ============================================
def _case_matmul(rng: np.random.Generator):
    return (lambda a, b: ops.matmul(a, b)), [rng.standard_normal((3, 4)), rng.standard_normal((4, 2))]


def _case_batched_matmul(rng: np.random.Generator):
    return (lambda a, b: ops.matmul(a, b)), [rng.standard_normal((2, 3, 4)), rng.standard_normal((4, 5))]


def _case_layer_norm(rng: np.random.Generator):
    return (
        lambda x, g, b: ops.layer_norm(x, g, b, eps=1e-6),
        [rng.standard_normal((2, 8)), 1.0 + 0.1 * rng.standard_normal(8), rng.standard_normal(8)],
    )


def _case_softmax(rng: np.random.Generator):
    return ops.softmax_last, [rng.standard_normal((4, 6))]


def _case_gelu_tanh(rng: np.random.Generator):
    return (lambda x: ops.gelu(x, "tanh")), [rng.standard_normal(10) * 2.0]


def _case_gelu_erf(rng: np.random.Generator):
    return (lambda x: ops.gelu(x, "none")), [rng.standard_normal(10) * 2.0]


def _case_upsample(rng: np.random.Generator):
    return (
        lambda x, w, b: ops.upsample2x(x, w, b),
        [rng.standard_normal((2, 4, 4)), rng.standard_normal((2, 3, 2, 2)), rng.standard_normal(3)],
    )


def _case_avgpool(rng: np.random.Generator):
    return ops.avgpool2x, [rng.standard_normal((2, 4, 4))]


def _case_broadcast_arith(rng: np.random.Generator):
    return (
        lambda a, b: ops.mul(ops.add(a, b), ops.sub(a, b)),
        [rng.standard_normal((3, 4)), rng.standard_normal(4)],
    )


def _case_tokens(rng: np.random.Generator):
    index = np.stack([rng.permutation(6)[:3] for _ in range(2)])

    def graph(x: Tensor, token: Tensor) -> Tensor:
        visible = ops.gather_tokens(x, index)
        return ops.merge_tokens(visible, token, index, 6)

    return graph, [rng.standard_normal((2, 6, 4)), rng.standard_normal(4)]


def _case_reduce(rng: np.random.Generator):
    return (
        lambda x: ops.mean(ops.transpose(ops.reshape(x, (3, 2, 2)), (2, 0, 1)), axis=1),
        [rng.standard_normal((3, 4))],
    )


OP_CASES: Dict[str, Callable[[np.random.Generator], tuple]] = {
    "matmul": _case_matmul,
    "matmul_batched": _case_batched_matmul,
    "layer_norm": _case_layer_norm,
    "softmax_last": _case_softmax,
    "gelu_tanh": _case_gelu_tanh,
    "gelu_erf": _case_gelu_erf,
    "upsample2x": _case_upsample,
    "avgpool2x": _case_avgpool,
    "add_sub_mul": _case_broadcast_arith,
    "gather_merge_tokens": _case_tokens,
    "reshape_transpose_mean": _case_reduce,
}


def run_cases(
    cases: Dict[str, Callable[[np.random.Generator], tuple]],
    seeds: Sequence[int],
    tolerance: float = 1e-4,
    max_elements: Optional[int] = None,
) -> List[GradCheckResult]:
    """
    Ejecuta cada caso con cada semilla.

    Returns:
        list: Un GradCheckResult por (caso, semilla)
    """
    results = []
    for name, build in cases.items():
        for seed in seeds:
            rng = np.random.default_rng(seed)
            fn, inputs = build(rng)
            err = check_gradients(fn, inputs, rng=rng, max_elements=max_elements)
            ok = err < tolerance
            if not ok:
                logger.warning("gradcheck %s seed=%d falló: %.3e", name, seed, err)
            results.append(GradCheckResult(name, seed, err, len(inputs), ok))
    return results
