"""
Operaciones diferenciables sobre Tensor.

Cada operación calcula su resultado con numpy y entrega a la cinta una
función VJP (vector-Jacobian product). Los valores que el backward necesita
quedan capturados en esa función.
"""

from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import erf

from vitfreeze.autograd.tensor import ArrayLike, Tensor, as_tensor, make_output
from vitfreeze.utils.errors import DimensionError

Operand = Union[Tensor, ArrayLike]

_SQRT_2_OVER_PI = float(np.sqrt(2.0 / np.pi))
_GELU_COEF = 0.044715


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Suma las dimensiones que numpy difundió para volver a ``shape``."""
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


# ============================================
# ELEMENTALES
# ============================================
def add(a: Operand, b: Operand) -> Tensor:
    ta = as_tensor(a, like=b if isinstance(b, Tensor) else None)
    tb = as_tensor(b, like=ta)
    sa, sb = ta.shape, tb.shape

    def vjp(g: np.ndarray):
        return _unbroadcast(g, sa), _unbroadcast(g, sb)

    return make_output("add", ta.data + tb.data, (ta, tb), vjp)


def sub(a: Operand, b: Operand) -> Tensor:
    ta = as_tensor(a, like=b if isinstance(b, Tensor) else None)
    tb = as_tensor(b, like=ta)
    sa, sb = ta.shape, tb.shape

    def vjp(g: np.ndarray):
        return _unbroadcast(g, sa), _unbroadcast(-g, sb)

    return make_output("sub", ta.data - tb.data, (ta, tb), vjp)


def mul(a: Operand, b: Operand) -> Tensor:
    ta = as_tensor(a, like=b if isinstance(b, Tensor) else None)
    tb = as_tensor(b, like=ta)
    da, db = ta.data, tb.data

    def vjp(g: np.ndarray):
        return _unbroadcast(g * db, da.shape), _unbroadcast(g * da, db.shape)

    return make_output("mul", da * db, (ta, tb), vjp)


def scale(x: Tensor, factor: float) -> Tensor:
    """Multiplica por una constante."""
    c = x.dtype.type(factor)

    def vjp(g: np.ndarray):
        return (g * c,)

    return make_output("scale", x.data * c, (x,), vjp)


def sum(x: Tensor, axis: Optional[Union[int, Tuple[int, ...]]] = None, keepdims: bool = False) -> Tensor:  # noqa: A001
    shape = x.shape

    def vjp(g: np.ndarray):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, shape).copy(),)

    return make_output("sum", np.sum(x.data, axis=axis, keepdims=keepdims), (x,), vjp)


def mean(x: Tensor, axis: Optional[Union[int, Tuple[int, ...]]] = None, keepdims: bool = False) -> Tensor:
    count = x.size if axis is None else int(np.prod([x.shape[a] for a in np.atleast_1d(axis)]))
    return scale(sum(x, axis=axis, keepdims=keepdims), 1.0 / count)


# ============================================
# FORMA
# ============================================
def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    original = x.shape

    def vjp(g: np.ndarray):
        return (g.reshape(original),)

    return make_output("reshape", x.data.reshape(tuple(shape)), (x,), vjp)


def transpose(x: Tensor, axes: Sequence[int]) -> Tensor:
    axes = tuple(axes)
    inverse = tuple(np.argsort(axes))

    def vjp(g: np.ndarray):
        return (g.transpose(inverse),)

    return make_output("transpose", x.data.transpose(axes), (x,), vjp)


# ============================================
# ÁLGEBRA LINEAL
# ============================================
def matmul(a: Tensor, b: Tensor) -> Tensor:
    """
    Producto matricial con dimensiones de batch opcionales.

    Raises:
        DimensionError: Si las dimensiones internas no coinciden
    """
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise DimensionError(f"matmul: formas incompatibles {a.shape} y {b.shape}")
    da, db = a.data, b.data

    def vjp(g: np.ndarray):
        ga = g @ np.swapaxes(db, -1, -2)
        gb = np.swapaxes(da, -1, -2) @ g
        return _unbroadcast(ga, da.shape), _unbroadcast(gb, db.shape)

    return make_output("matmul", da @ db, (a, b), vjp)


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-6) -> Tensor:
    """
    Normaliza el último eje a media 0 y varianza 1, luego aplica gamma/beta.

    Raises:
        DimensionError: Si gamma o beta no tienen la dimensión del último eje
    """
    d = x.shape[-1]
    if gamma.shape != (d,) or beta.shape != (d,):
        raise DimensionError(
            f"layer_norm: gamma {gamma.shape} / beta {beta.shape} no coinciden con d={d}"
        )
    mu = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = centered * inv
    gdata = gamma.data

    def vjp(g: np.ndarray):
        lead = tuple(range(g.ndim - 1))
        gxhat = g * gdata
        gx = (inv / d) * (
            d * gxhat
            - gxhat.sum(axis=-1, keepdims=True)
            - xhat * (gxhat * xhat).sum(axis=-1, keepdims=True)
        )
        return gx, (g * xhat).sum(axis=lead), g.sum(axis=lead)

    return make_output("layer_norm", xhat * gdata + beta.data, (x, gamma, beta), vjp)


def softmax_last(x: Tensor) -> Tensor:
    """Softmax sobre el último eje (con resta del máximo)."""
    shifted = x.data - x.data.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    s = e / e.sum(axis=-1, keepdims=True)

    def vjp(g: np.ndarray):
        return (s * (g - (g * s).sum(axis=-1, keepdims=True)),)

    return make_output("softmax", s, (x,), vjp)


def gelu(x: Tensor, approximate: str = "tanh") -> Tensor:
    """
    GELU. ``approximate="tanh"`` (por defecto) o ``"none"`` para la forma exacta con erf.
    """
    v = x.data
    if approximate == "tanh":
        inner = _SQRT_2_OVER_PI * (v + _GELU_COEF * v**3)
        t = np.tanh(inner)
        out = 0.5 * v * (1.0 + t)
        deriv = 0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * _SQRT_2_OVER_PI * (
            1.0 + 3.0 * _GELU_COEF * v * v
        )
    elif approximate == "none":
        cdf = 0.5 * (1.0 + erf(v / np.sqrt(2.0)))
        out = v * cdf
        deriv = cdf + v * np.exp(-0.5 * v * v) / np.sqrt(2.0 * np.pi)
    else:
        raise ValueError(f"gelu: aproximación desconocida {approximate!r}")
    out = out.astype(v.dtype, copy=False)
    deriv = deriv.astype(v.dtype, copy=False)

    def vjp(g: np.ndarray):
        return (g * deriv,)

    return make_output("gelu", out, (x,), vjp)


# ============================================
# ESCALADO ESPACIAL
# ============================================
def upsample2x(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """
    Convolución transpuesta 2x2 con stride 2.

    Args:
        x: Mapa [..., c_in, h, w]
        weight: Kernel [c_in, c_out, 2, 2]
        bias: Sesgo opcional [c_out]

    Returns:
        Tensor: Mapa [..., c_out, 2h, 2w]
    """
    if x.ndim < 3 or weight.ndim != 4 or weight.shape[2:] != (2, 2) or x.shape[-3] != weight.shape[0]:
        raise DimensionError(f"upsample2x: entrada {x.shape} incompatible con kernel {weight.shape}")
    lead = x.shape[:-3]
    c, h, w = x.shape[-3:]
    o = weight.shape[1]
    xb = x.data.reshape(-1, c, h, w)
    wd = weight.data
    # (n, i, j, o, a, b) -> (n, o, i, a, j, b)
    y6 = np.tensordot(xb, wd, axes=([1], [0])).transpose(0, 3, 1, 4, 2, 5)
    out = y6.reshape(lead + (o, 2 * h, 2 * w))
    if bias is not None:
        out = out + bias.data[:, None, None]
    inputs: Tuple[Tensor, ...] = (x, weight) if bias is None else (x, weight, bias)

    def vjp(g: np.ndarray):
        g6 = g.reshape(-1, o, h, 2, w, 2)
        gx = np.tensordot(g6, wd, axes=([1, 3, 5], [1, 2, 3])).transpose(0, 3, 1, 2)
        gw = np.tensordot(xb, g6, axes=([0, 2, 3], [0, 2, 4]))
        grads = [gx.reshape(x.shape), gw]
        if bias is not None:
            grads.append(g6.sum(axis=(0, 2, 3, 4, 5)))
        return grads

    return make_output("upsample2x", out, inputs, vjp)


def avgpool2x(x: Tensor) -> Tensor:
    """
    Promedio fijo 2x2 con stride 2 sobre los dos últimos ejes.

    Raises:
        DimensionError: Si alguna dimensión espacial es impar
    """
    if x.ndim < 2 or x.shape[-1] % 2 or x.shape[-2] % 2:
        raise DimensionError(f"avgpool2x: dimensiones espaciales impares {x.shape}")
    lead = x.shape[:-2]
    h, w = x.shape[-2:]
    out = x.data.reshape(lead + (h // 2, 2, w // 2, 2)).mean(axis=(-3, -1))

    def vjp(g: np.ndarray):
        g4 = np.broadcast_to(g[..., :, None, :, None] * 0.25, lead + (h // 2, 2, w // 2, 2))
        return (g4.reshape(x.shape),)

    return make_output("avgpool2x", out, (x,), vjp)


# ============================================
# TOKENS
# ============================================
def gather_tokens(x: Tensor, index: np.ndarray) -> Tensor:
    """
    Selecciona filas por índice en cada elemento del batch.

    Args:
        x: [B, N, F]
        index: Enteros [B, V]

    Returns:
        Tensor: [B, V, F]
    """
    if x.ndim != 3 or index.ndim != 2 or index.shape[0] != x.shape[0]:
        raise DimensionError(f"gather_tokens: {x.shape} con índices {index.shape}")
    rows = np.arange(x.shape[0])[:, None]
    shape = x.shape

    def vjp(g: np.ndarray):
        gx = np.zeros(shape, dtype=g.dtype)
        gx[rows, index] = g
        return (gx,)

    return make_output("gather_tokens", x.data[rows, index], (x,), vjp)


def merge_tokens(visible: Tensor, mask_token: Tensor, visible_index: np.ndarray, n: int) -> Tensor:
    """
    Reconstruye la rejilla completa de tokens: filas visibles en su lugar,
    token de máscara en el resto.

    Args:
        visible: [B, V, D]
        mask_token: [D]
        visible_index: Enteros [B, V]
        n: Número total de tokens

    Returns:
        Tensor: [B, n, D]
    """
    b, v, d = visible.shape
    if mask_token.shape != (d,) or visible_index.shape != (b, v):
        raise DimensionError(
            f"merge_tokens: visibles {visible.shape}, token {mask_token.shape}, índices {visible_index.shape}"
        )
    rows = np.arange(b)[:, None]
    out = np.broadcast_to(mask_token.data, (b, n, d)).copy()
    out[rows, visible_index] = visible.data
    masked = np.ones((b, n), dtype=bool)
    masked[rows, visible_index] = False

    def vjp(g: np.ndarray):
        return g[rows, visible_index], g[masked].sum(axis=0)

    return make_output("merge_tokens", out, (visible, mask_token), vjp)


def frozen_boundary(x: Tensor) -> Tensor:
    """
    Marca una frontera congelada: el valor pasa igual, el gradiente no cruza.
    """

    def vjp(g: np.ndarray):
        return (None,)

    return make_output("frozen_boundary", x.data, (x,), vjp, frozen=True)
