"""
Lectura y escritura de imágenes PPM binarias (P6).
"""

import logging
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from vitfreeze.utils.errors import ConfigError, ImageFormatError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
_WHITESPACE = b" \t\n\r\x0b\x0c"


def _read_header(data: bytes, path: str) -> Tuple[int, int, int, int]:
    """
    Lee magic, ancho, alto y maxval saltando comentarios.

    Returns:
        tuple: (ancho, alto, maxval, offset de los pixeles)
    """
    if data[:2] != b"P6":
        magic = data[:2].decode("latin-1", errors="replace")
        raise ImageFormatError(path, f"formato {magic!r} no soportado, sólo P6")
    fields: List[int] = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos] in _WHITESPACE:
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and data[pos] not in _WHITESPACE and data[pos : pos + 1] != b"#":
            pos += 1
        token = data[start:pos]
        if not token.isdigit():
            raise ImageFormatError(path, f"encabezado mal formado cerca del byte {start}")
        fields.append(int(token))
    if pos >= len(data) or data[pos] not in _WHITESPACE:
        raise ImageFormatError(path, "falta el separador después de maxval")
    width, height, maxval = fields
    if width <= 0 or height <= 0:
        raise ImageFormatError(path, f"dimensiones inválidas {width}x{height}")
    if not 0 < maxval < 65536:
        raise ImageFormatError(path, f"maxval fuera de rango: {maxval}")
    return width, height, maxval, pos + 1


def load_ppm(path: PathLike) -> np.ndarray:
    """
    Decodifica un P6.

    Returns:
        np.ndarray: [3, H, W] en float64, escalado a [0, 1] por maxval

    Raises:
        ImageFormatError: Encabezado mal formado, formato distinto de P6 o datos truncados
    """
    name = str(path)
    data = Path(path).read_bytes()
    width, height, maxval, offset = _read_header(data, name)
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
    expected = width * height * 3 * dtype.itemsize
    body = data[offset : offset + expected]
    if len(body) != expected:
        raise ImageFormatError(name, f"datos truncados: {len(body)} de {expected} bytes")
    pixels = np.frombuffer(body, dtype=dtype).reshape(height, width, 3)
    return pixels.transpose(2, 0, 1).astype(np.float64) / maxval


def load_images(directory: PathLike) -> np.ndarray:
    """
    Carga todos los ``*.ppm`` de un directorio en orden lexicográfico.

    Returns:
        np.ndarray: [count, 3, H, W]

    Raises:
        ConfigError: Si el directorio no existe o no tiene archivos .ppm
        ImageFormatError: Si algún archivo está mal formado o tiene otro tamaño
    """
    root = Path(directory)
    if not root.is_dir():
        raise ConfigError(f"data.directory no existe: {root}")
    files = sorted(p for p in root.iterdir() if p.suffix.lower() == ".ppm")
    if not files:
        raise ConfigError(f"no hay archivos .ppm en {root}")

    images = []
    shape = None
    for f in files:
        img = load_ppm(f)
        if shape is None:
            shape = img.shape
        elif img.shape != shape:
            raise ImageFormatError(str(f), f"tamaño {img.shape[1:]} distinto de {shape[1:]}")
        images.append(img)
    logger.info("Cargadas %d imágenes PPM de %s", len(images), root)
    return np.stack(images)


def write_ppm(path: PathLike, image: np.ndarray) -> None:
    """
    Escribe una imagen [3, H, W] en [0, 1] como P6 de 8 bits.
    """
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 3 or img.shape[0] != 3:
        raise ImageFormatError(str(path), f"se esperaba [3, H, W], recibido {img.shape}")
    _, h, w = img.shape
    pixels = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8).transpose(1, 2, 0)
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())
