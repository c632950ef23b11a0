"""
Checkpoint binario VTFZ.

Formato (little-endian):
    b"VTFZ" | u32 versión | u32 número de tensores
    por tensor: u32 largo del nombre | nombre UTF-8 | u32 rango | u64 dims[rango] | f32 datos
    bloque de metadatos: u32 entradas
    por entrada: u32 largo del nombre | nombre UTF-8 | u8 bandera | i64 paso (-1 = ninguno)

Las entradas de metadatos son las capas congelables (``encoder.layers.i``,
bandera = congelada) y las cabezas (``decoders.k``, bandera = podada).
"""

import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Dict, Optional, Tuple, Union

import numpy as np

from vitfreeze.models.vit_mim import ViTMIM, layer_group
from vitfreeze.utils.errors import CheckpointError

logger = logging.getLogger(__name__)

MAGIC = b"VTFZ"
VERSION = 1

PathLike = Union[str, Path]


@dataclass
class Checkpoint:
    """Contenido de un archivo VTFZ."""

    tensors: Dict[str, np.ndarray] = field(default_factory=dict)
    metadata: Dict[str, Tuple[bool, Optional[int]]] = field(default_factory=dict)


def _write_name(fh: BinaryIO, name: str) -> None:
    raw = name.encode("utf-8")
    fh.write(struct.pack("<I", len(raw)))
    fh.write(raw)


def _read_exact(fh: BinaryIO, size: int) -> bytes:
    data = fh.read(size)
    if len(data) != size:
        raise CheckpointError("checkpoint truncado")
    return data


def _read_name(fh: BinaryIO) -> str:
    (length,) = struct.unpack("<I", _read_exact(fh, 4))
    return _read_exact(fh, length).decode("utf-8")


# ============================================
# ESCRITURA
# ============================================
def write_checkpoint(path: PathLike, checkpoint: Checkpoint) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(checkpoint.tensors)))
        for name, array in checkpoint.tensors.items():
            _write_name(fh, name)
            fh.write(struct.pack("<I", array.ndim))
            fh.write(struct.pack(f"<{array.ndim}Q", *array.shape))
            fh.write(np.ascontiguousarray(array, dtype="<f4").tobytes())
        fh.write(struct.pack("<I", len(checkpoint.metadata)))
        for name, (flag, step) in checkpoint.metadata.items():
            _write_name(fh, name)
            fh.write(struct.pack("<Bq", int(flag), -1 if step is None else int(step)))


def save_checkpoint(model: ViTMIM, path: PathLike) -> None:
    """
    Guarda parámetros (en f32) y el estado de congelamiento y poda.

    Args:
        model: Modelo a guardar
        path: Archivo de destino
    """
    metadata: Dict[str, Tuple[bool, Optional[int]]] = {}
    for layer in model.layers:
        metadata[layer_group(layer.index)] = (layer.frozen, layer.freeze_step)
    for head in model.heads:
        metadata[head.prefix.rstrip(".")] = (head.pruned, head.pruned_step)
    tensors = {name: p.data for name, p in model.parameters().items()}
    write_checkpoint(path, Checkpoint(tensors, metadata))
    logger.info("Checkpoint guardado en %s (%d tensores)", path, len(tensors))


# ============================================
# LECTURA
# ============================================
def read_checkpoint(path: PathLike) -> Checkpoint:
    """
    Lee un archivo VTFZ.

    Raises:
        CheckpointError: Magic, versión o longitud inválidos
    """
    checkpoint = Checkpoint()
    with open(path, "rb") as fh:
        if _read_exact(fh, 4) != MAGIC:
            raise CheckpointError(f"{path}: no es un checkpoint VTFZ")
        version, count = struct.unpack("<II", _read_exact(fh, 8))
        if version != VERSION:
            raise CheckpointError(f"{path}: versión {version} no soportada")
        for _ in range(count):
            name = _read_name(fh)
            (rank,) = struct.unpack("<I", _read_exact(fh, 4))
            shape = struct.unpack(f"<{rank}Q", _read_exact(fh, 8 * rank))
            size = int(np.prod(shape)) if rank else 1
            data = np.frombuffer(_read_exact(fh, 4 * size), dtype="<f4")
            checkpoint.tensors[name] = data.reshape(shape).astype(np.float32)
        (entries,) = struct.unpack("<I", _read_exact(fh, 4))
        for _ in range(entries):
            name = _read_name(fh)
            flag, step = struct.unpack("<Bq", _read_exact(fh, 9))
            checkpoint.metadata[name] = (bool(flag), None if step < 0 else int(step))
        if fh.read(1):
            raise CheckpointError(f"{path}: bytes sobrantes al final")
    return checkpoint


def load_checkpoint(model: ViTMIM, path: PathLike) -> ViTMIM:
    """
    Restaura parámetros y banderas sobre un modelo con la misma configuración.

    Raises:
        CheckpointError: Si faltan tensores o las formas no coinciden
    """
    checkpoint = read_checkpoint(path)
    params = model.parameters()
    missing = sorted(set(params) - set(checkpoint.tensors))
    if missing:
        raise CheckpointError(f"{path}: faltan tensores {missing[:3]}")
    for name, p in params.items():
        data = checkpoint.tensors[name]
        if data.shape != p.shape:
            raise CheckpointError(f"{path}: {name} tiene forma {data.shape}, se esperaba {p.shape}")
        p.data = data.astype(model.dtype)

    for layer in model.layers:
        frozen, step = checkpoint.metadata.get(layer_group(layer.index), (False, None))
        if frozen:
            layer.freeze(step if step is not None else 0)
    for head in model.heads:
        pruned, step = checkpoint.metadata.get(head.prefix.rstrip("."), (False, None))
        if pruned:
            head.pruned = True
            head.pruned_step = step
            for p in head.parameters().values():
                p.requires_grad = False
    return model
