"""
Bloques del ViT: lineal, layer norm, atención multi-cabeza y bloque transformer.

Cada clase guarda sus parámetros como Tensores y los expone con
``parameters()`` (nombre → Tensor), sin registro automático.
"""

import math
from typing import Dict, Optional

import numpy as np

from vitfreeze.autograd import ops
from vitfreeze.autograd.tensor import Tensor

Params = Dict[str, Tensor]


def xavier_uniform(rng: np.random.Generator, fan_in: int, fan_out: int, dtype: np.dtype) -> np.ndarray:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out)).astype(dtype)


# ============================================
# LINEAL
# ============================================
class Linear:
    """y = x · W + b con W de forma [in, out]."""

    def __init__(self, rng: np.random.Generator, fan_in: int, fan_out: int, dtype: np.dtype):
        self.weight = Tensor(xavier_uniform(rng, fan_in, fan_out, dtype), requires_grad=True)
        self.bias = Tensor(np.zeros(fan_out, dtype=dtype), requires_grad=True)

    def __call__(self, x: Tensor) -> Tensor:
        return ops.add(ops.matmul(x, self.weight), self.bias)

    def parameters(self) -> Params:
        return {"weight": self.weight, "bias": self.bias}


class LayerNorm:
    def __init__(self, dim: int, dtype: np.dtype, eps: float = 1e-6):
        self.gamma = Tensor(np.ones(dim, dtype=dtype), requires_grad=True)
        self.beta = Tensor(np.zeros(dim, dtype=dtype), requires_grad=True)
        self.eps = eps

    def __call__(self, x: Tensor) -> Tensor:
        return ops.layer_norm(x, self.gamma, self.beta, self.eps)

    def parameters(self) -> Params:
        return {"gamma": self.gamma, "beta": self.beta}


# ============================================
# ATENCIÓN
# ============================================
class Attention:
    """
    Auto-atención multi-cabeza sobre [B, T, D].
    Proyecciones q, k y v separadas para no necesitar una operación de corte.
    """

    def __init__(self, rng: np.random.Generator, dim: int, num_heads: int, dtype: np.dtype):
        self.num_heads = num_heads
        self.head_dim = dim // num_heads
        self.q = Linear(rng, dim, dim, dtype)
        self.k = Linear(rng, dim, dim, dtype)
        self.v = Linear(rng, dim, dim, dtype)
        self.proj = Linear(rng, dim, dim, dtype)

    def _split(self, x: Tensor) -> Tensor:
        b, t, _ = x.shape
        return ops.transpose(ops.reshape(x, (b, t, self.num_heads, self.head_dim)), (0, 2, 1, 3))

    def __call__(self, x: Tensor) -> Tensor:
        b, t, d = x.shape
        q, k, v = self._split(self.q(x)), self._split(self.k(x)), self._split(self.v(x))
        scores = ops.scale(ops.matmul(q, ops.transpose(k, (0, 1, 3, 2))), 1.0 / math.sqrt(self.head_dim))
        weights = ops.softmax_last(scores)
        out = ops.transpose(ops.matmul(weights, v), (0, 2, 1, 3))
        return self.proj(ops.reshape(out, (b, t, d)))

    def parameters(self) -> Params:
        params: Params = {}
        for name in ("q", "k", "v", "proj"):
            for key, p in getattr(self, name).parameters().items():
                params[f"{name}.{key}"] = p
        return params


# ============================================
# BLOQUE TRANSFORMER
# ============================================
class Block:
    """
    Bloque pre-LN: x + MSA(LN(x)), luego x + MLP(LN(x)).
    """

    def __init__(
        self,
        rng: np.random.Generator,
        dim: int,
        num_heads: int,
        mlp_hidden: int,
        dtype: np.dtype,
        eps: float = 1e-6,
        gelu_approximate: str = "tanh",
    ):
        self.norm1 = LayerNorm(dim, dtype, eps)
        self.attn = Attention(rng, dim, num_heads, dtype)
        self.norm2 = LayerNorm(dim, dtype, eps)
        self.fc1 = Linear(rng, dim, mlp_hidden, dtype)
        self.fc2 = Linear(rng, mlp_hidden, dim, dtype)
        self.gelu_approximate = gelu_approximate

    def __call__(self, x: Tensor) -> Tensor:
        x = ops.add(x, self.attn(self.norm1(x)))
        hidden = ops.gelu(self.fc1(self.norm2(x)), self.gelu_approximate)
        return ops.add(x, self.fc2(hidden))

    def parameters(self, prefix: Optional[str] = None) -> Params:
        params: Params = {}
        for name in ("norm1", "attn", "norm2", "fc1", "fc2"):
            for key, p in getattr(self, name).parameters().items():
                params[f"{name}.{key}"] = p
        if prefix:
            params = {f"{prefix}{k}": v for k, v in params.items()}
        return params
