"""
Tensor denso y cinta (tape) de diferenciación automática en modo reverso.

Los datos viven en arreglos de numpy. Una operación sólo se graba en la
cinta activa cuando alguna de sus entradas requiere gradiente; fuera de
``recording(tape)`` (o dentro de ``no_grad()``) todo corre en modo inferencia.
"""

from __future__ import annotations

import itertools
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from vitfreeze.utils.errors import ContractError

ArrayLike = Union[np.ndarray, float, int, Sequence]
VJP = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_node_ids = itertools.count(1)
_active_tape: ContextVar[Optional["Tape"]] = ContextVar("vitfreeze_active_tape", default=None)
_debug_checks = False


def set_debug(enabled: bool) -> None:
    """Activa la verificación de NaN/Inf después de cada operación."""
    global _debug_checks
    _debug_checks = bool(enabled)


# ============================================
# TENSOR
# ============================================
class Tensor:
    """
    Arreglo denso con bandera de gradiente.

    Attributes:
        data: Valores (row-major) como np.ndarray de punto flotante
        requires_grad: Si es False nunca acumula gradiente
        node_id: Identificador único que la cinta usa para enlazar nodos
        name: Nombre opcional (parámetros del modelo)
    """

    __slots__ = ("data", "requires_grad", "node_id", "name")

    def __init__(
        self,
        data: ArrayLike,
        requires_grad: bool = False,
        dtype: Optional[np.dtype] = None,
        name: Optional[str] = None,
    ):
        arr = np.asarray(data, dtype=dtype)
        if not np.issubdtype(arr.dtype, np.floating):
            arr = arr.astype(np.float64)
        self.data: np.ndarray = arr
        self.requires_grad = bool(requires_grad)
        self.node_id: int = next(_node_ids)
        self.name = name

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.size == 1 else float("nan")

    def numpy(self) -> np.ndarray:
        return self.data.copy()

    def __repr__(self) -> str:
        tag = f", name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad}{tag})"

    # Azúcar sintáctico; las operaciones viven en ops.py
    def __add__(self, other: "Tensor | ArrayLike") -> "Tensor":
        from vitfreeze.autograd import ops

        return ops.add(self, other)

    def __radd__(self, other: ArrayLike) -> "Tensor":
        from vitfreeze.autograd import ops

        return ops.add(other, self)

    def __sub__(self, other: "Tensor | ArrayLike") -> "Tensor":
        from vitfreeze.autograd import ops

        return ops.sub(self, other)

    def __mul__(self, other: "Tensor | ArrayLike") -> "Tensor":
        from vitfreeze.autograd import ops

        return ops.mul(self, other)

    def __rmul__(self, other: ArrayLike) -> "Tensor":
        from vitfreeze.autograd import ops

        return ops.mul(other, self)

    def __neg__(self) -> "Tensor":
        from vitfreeze.autograd import ops

        return ops.scale(self, -1.0)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        from vitfreeze.autograd import ops

        return ops.matmul(self, other)


def as_tensor(value: "Tensor | ArrayLike", like: Optional[Tensor] = None) -> Tensor:
    """Envuelve constantes como Tensor sin gradiente (mismo dtype que ``like``)."""
    if isinstance(value, Tensor):
        return value
    dtype = like.dtype if like is not None else None
    return Tensor(value, requires_grad=False, dtype=dtype)


# ============================================
# CINTA
# ============================================
@dataclass
class TapeEntry:
    """Una operación grabada: tipo, entradas, salida y su VJP."""

    op: str
    inputs: Tuple[Tensor, ...]
    output_id: int
    vjp: VJP
    frozen: bool = False

    @property
    def input_ids(self) -> Tuple[int, ...]:
        return tuple(t.node_id for t in self.inputs)


@dataclass
class Tape:
    """
    Lista ordenada de operaciones grabadas.

    Es topológica por construcción: una salida sólo se graba después de
    que existen todas sus entradas. Una cinta tiene un solo escritor.
    """

    entries: List[TapeEntry] = field(default_factory=list)
    _produced: Set[int] = field(default_factory=set)

    def record(
        self,
        op: str,
        inputs: Sequence[Tensor],
        output: Tensor,
        vjp: VJP,
        frozen: bool = False,
    ) -> None:
        self.entries.append(TapeEntry(op, tuple(inputs), output.node_id, vjp, frozen))
        self._produced.add(output.node_id)

    def produced(self, node_id: int) -> bool:
        return node_id in self._produced

    def count(self, op: Optional[str] = None) -> int:
        if op is None:
            return len(self.entries)
        return sum(1 for e in self.entries if e.op == op)

    def __len__(self) -> int:
        return len(self.entries)


@contextmanager
def recording(tape: Tape) -> Iterator[Tape]:
    """Graba en ``tape`` todas las operaciones del bloque."""
    token = _active_tape.set(tape)
    try:
        yield tape
    finally:
        _active_tape.reset(token)


@contextmanager
def no_grad() -> Iterator[None]:
    """Modo inferencia: nada se graba y las salidas no requieren gradiente."""
    token = _active_tape.set(None)
    try:
        yield
    finally:
        _active_tape.reset(token)


def active_tape() -> Optional[Tape]:
    return _active_tape.get()


def make_output(
    op: str,
    data: np.ndarray,
    inputs: Sequence[Tensor],
    vjp: VJP,
    frozen: bool = False,
) -> Tensor:
    """
    Crea la salida de una operación y la graba si corresponde.

    Args:
        op: Nombre de la operación
        data: Resultado ya calculado
        inputs: Tensores de entrada
        vjp: Función que recibe dL/dsalida y retorna dL/dentrada por entrada
        frozen: Marca la entrada como frontera congelada

    Returns:
        Tensor: Salida (requires_grad sólo si se grabó)
    """
    if _debug_checks and not np.all(np.isfinite(data)):
        raise ContractError(f"{op} produjo valores no finitos")
    tape = _active_tape.get()
    track = tape is not None and any(t.requires_grad for t in inputs)
    out = Tensor(data, requires_grad=track)
    if track:
        assert tape is not None
        tape.record(op, inputs, out, vjp, frozen)
    return out


# ============================================
# BACKWARD
# ============================================
def backward(tape: Tape, loss: Tensor) -> Dict[int, Tensor]:
    """
    Recorre la cinta en reversa desde ``loss``.

    Args:
        tape: Cinta con las operaciones del paso
        loss: Tensor escalar

    Returns:
        dict: node_id → gradiente, para cada hoja alcanzable que requiere gradiente

    Raises:
        ContractError: Si la pérdida no es escalar
    """
    if loss.size != 1:
        raise ContractError(f"la pérdida debe ser escalar, forma recibida {loss.shape}")

    grads: Dict[int, np.ndarray] = {loss.node_id: np.ones_like(loss.data)}
    leaves: Dict[int, Tensor] = {}
    if loss.requires_grad and not tape.produced(loss.node_id):
        leaves[loss.node_id] = loss

    for entry in reversed(tape.entries):
        g = grads.pop(entry.output_id, None)
        if g is None or entry.frozen:
            # frontera congelada: nada fluye hacia arriba
            continue
        for tensor, gi in zip(entry.inputs, entry.vjp(g)):
            if gi is None or not tensor.requires_grad:
                continue
            if gi.shape != tensor.shape:
                raise ContractError(
                    f"{entry.op}: gradiente {gi.shape} no coincide con la entrada {tensor.shape}"
                )
            prev = grads.get(tensor.node_id)
            grads[tensor.node_id] = gi if prev is None else prev + gi
            if not tape.produced(tensor.node_id):
                leaves[tensor.node_id] = tensor

    return {
        nid: Tensor(grads[nid], dtype=leaf.dtype)
        for nid, leaf in leaves.items()
        if nid in grads
    }
