from __future__ import annotations

import io
from pathlib import Path
import struct
from typing import BinaryIO, Iterable

import numpy as np

from ..errors import CheckpointError
from .core import Tensor

MAGIC = b"HSTN"
_RANK = struct.Struct("<I")


def write_tensor(stream: BinaryIO, tensor: Tensor | np.ndarray) -> None:
    """Little-endian record: magic, u32 rank, u64 extents, f64 payload."""
    data = tensor.data if isinstance(tensor, Tensor) else np.asarray(tensor, dtype=np.float64)
    stream.write(MAGIC)
    stream.write(_RANK.pack(data.ndim))
    stream.write(np.asarray(data.shape, dtype="<u8").tobytes())
    stream.write(np.ascontiguousarray(data, dtype="<f8").tobytes())


def read_tensor(stream: BinaryIO) -> np.ndarray:
    magic = stream.read(len(MAGIC))
    if magic != MAGIC:
        raise CheckpointError(f"bad tensor magic {magic!r}")
    rank = _RANK.unpack(_read_exact(stream, _RANK.size))[0]
    shape = tuple(int(v) for v in np.frombuffer(_read_exact(stream, 8 * rank), dtype="<u8"))
    count = int(np.prod(shape)) if shape else 1
    payload = np.frombuffer(_read_exact(stream, 8 * count), dtype="<f8")
    return payload.astype(np.float64).reshape(shape)


def save_tensors(path: str | Path, tensors: Iterable[Tensor | np.ndarray]) -> None:
    with Path(path).open("wb") as handle:
        for tensor in tensors:
            write_tensor(handle, tensor)


def load_tensors(path: str | Path) -> list[np.ndarray]:
    payload = Path(path).read_bytes()
    stream = io.BytesIO(payload)
    arrays: list[np.ndarray] = []
    while stream.tell() < len(payload):
        arrays.append(read_tensor(stream))
    return arrays


def _read_exact(stream: BinaryIO, size: int) -> bytes:
    chunk = stream.read(size)
    if len(chunk) != size:
        raise CheckpointError("truncated tensor record")
    return chunk
