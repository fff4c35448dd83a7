from __future__ import annotations

from pathlib import Path

import numpy as np
from PySide6 import QtGui

from ..errors import DataError

GRAYSCALE = QtGui.QImage.Format.Format_Grayscale8


def read_pgm(path: str | Path) -> np.ndarray:
    """8-bit grayscale image as ``uint8 [H, W]``."""
    source = Path(path)
    image = QtGui.QImage(str(source))
    if image.isNull():
        raise DataError(f"cannot read image {source}")
    image = image.convertToFormat(GRAYSCALE)
    height, width, stride = image.height(), image.width(), image.bytesPerLine()
    buffer = np.frombuffer(image.constBits(), dtype=np.uint8, count=height * stride)
    return buffer.reshape(height, stride)[:, :width].copy()


def write_pgm(path: str | Path, pixels: np.ndarray) -> Path:
    """Binary P5 PGM with 8-bit depth."""
    array = np.ascontiguousarray(pixels)
    if array.ndim != 2 or array.dtype != np.uint8:
        raise DataError(f"pgm pixels must be uint8 [H, W], got {array.dtype} {array.shape}")
    height, width = array.shape
    image = QtGui.QImage(array.tobytes(), width, height, width, GRAYSCALE).copy()
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    if not image.save(str(target), "PGM"):
        raise DataError(f"cannot write image {target}")
    return target


def frame_to_pixels(frame: np.ndarray) -> np.ndarray:
    return np.round(np.clip(frame, 0.0, 1.0) * 255.0).astype(np.uint8)


def mask_to_pixels(mask: np.ndarray) -> np.ndarray:
    return np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)


def read_mask(path: str | Path) -> np.ndarray:
    return read_pgm(path) > 127


def read_frame(path: str | Path) -> np.ndarray:
    return read_pgm(path).astype(np.float64) / 255.0
