from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np

from ..errors import ShapeError
from ..tensor import Tensor
from ..tensor import ops


class ScanMode(str, Enum):
    TEMPORAL = "temporal"
    SPATIAL = "spatial"
    DIAGONAL = "diagonal"
    ANTI_DIAGONAL = "anti_diagonal"


class ScanDirection(str, Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


ALL_MODES: tuple[ScanMode, ...] = tuple(ScanMode)
ALL_DIRECTIONS: tuple[tuple[ScanMode, ScanDirection], ...] = tuple(
    (mode, direction) for mode in ScanMode for direction in ScanDirection
)


def direction_index(mode: ScanMode, direction: ScanDirection) -> int:
    return ALL_DIRECTIONS.index((mode, direction))


def parse_mode(value: str) -> ScanMode:
    key = value.strip().lower().replace("-", "_")
    aliases = {"antidiagonal": "anti_diagonal", "spatio": "spatial"}
    key = aliases.get(key, key)
    try:
        return ScanMode(key)
    except ValueError as exc:
        raise ValueError(f"unknown scan mode {value!r}") from exc


@dataclass(frozen=True)
class PatchGrid:
    """Patch slots of a clip; slot p(t, r, c) = t*rows*cols + r*cols + c."""

    t_frames: int
    rows: int
    cols: int

    def __post_init__(self) -> None:
        if min(self.t_frames, self.rows, self.cols) < 1:
            raise ShapeError(f"invalid patch grid {self.t_frames}x{self.rows}x{self.cols}")

    @property
    def length(self) -> int:
        return self.t_frames * self.rows * self.cols

    def slot(self, t: int, row: int, col: int) -> int:
        return t * self.rows * self.cols + row * self.cols + col


@dataclass(frozen=True, eq=False)
class ScanOrder:
    mode: ScanMode
    direction: ScanDirection
    perm: np.ndarray = field(repr=False)
    inv_perm: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return int(self.perm.size)


def _position_order(grid: PatchGrid, mode: ScanMode) -> np.ndarray:
    rows, cols = np.divmod(np.arange(grid.rows * grid.cols), grid.cols)
    if mode == ScanMode.SPATIAL:
        return np.arange(grid.rows * grid.cols)
    if mode == ScanMode.DIAGONAL:
        return np.lexsort((rows, rows + cols))
    return np.lexsort((rows, rows - cols))


@lru_cache(maxsize=256)
def make_order(grid: PatchGrid, mode: ScanMode, direction: ScanDirection) -> ScanOrder:
    """Slot permutation for one scan mode and direction.

    Temporal walks frames in order, row-major inside each frame. The other modes visit
    every frame of one position before moving on; positions run row-major (spatial), by
    r+c (diagonal) or by r-c (anti-diagonal), ties broken by ascending row.
    """
    mode = ScanMode(mode)
    direction = ScanDirection(direction)
    if mode == ScanMode.TEMPORAL:
        perm = np.arange(grid.length)
    else:
        area = grid.rows * grid.cols
        positions = _position_order(grid, mode)
        perm = (positions[:, None] + area * np.arange(grid.t_frames)[None, :]).reshape(-1)
    if direction == ScanDirection.BACKWARD:
        perm = perm[::-1]
    perm = np.ascontiguousarray(perm, dtype=np.int64)
    inv_perm = np.empty_like(perm)
    inv_perm[perm] = np.arange(perm.size)
    perm.setflags(write=False)
    inv_perm.setflags(write=False)
    return ScanOrder(mode=mode, direction=direction, perm=perm, inv_perm=inv_perm)


def apply(order: ScanOrder, seq: Tensor) -> Tensor:
    """Reorder a ``[C, L]`` sequence so that ``out[:, k] = seq[:, perm[k]]``."""
    _check_length(order, seq)
    return ops.take(seq, order.perm, axis=1)


def invert(order: ScanOrder, seq: Tensor) -> Tensor:
    _check_length(order, seq)
    return ops.take(seq, order.inv_perm, axis=1)


def _check_length(order: ScanOrder, seq: Tensor) -> None:
    if seq.ndim != 2 or seq.shape[1] != len(order):
        raise ShapeError(f"sequence shape {seq.shape} does not match order length {len(order)}")
