from __future__ import annotations

from dataclasses import dataclass
import logging

import numpy as np
from scipy import ndimage

from ..errors import EmptyMaskError, GeometryError

logger = logging.getLogger(__name__)

DEFAULT_N_DISKS = 20
SUPERSAMPLE = 4

Point = tuple[float, float]


@dataclass(frozen=True, eq=False)
class LVGeometry:
    """Long axis and disk diameters of one ventricle mask, in pixel units (row, col)."""

    apex: Point
    base: Point
    length: float
    diameters: np.ndarray

    def __post_init__(self) -> None:
        diameters = np.array(self.diameters, dtype=np.float64)
        if diameters.ndim != 1 or diameters.size == 0:
            raise GeometryError("diameters must be a non-empty 1-D array")
        if self.length <= 0.0:
            raise GeometryError(f"long-axis length must be positive, got {self.length}")
        if np.any(diameters < 0.0):
            raise GeometryError("diameters must be non-negative")
        diameters.setflags(write=False)
        object.__setattr__(self, "diameters", diameters)

    @property
    def n_disks(self) -> int:
        return int(self.diameters.size)


def largest_component(mask: np.ndarray) -> np.ndarray:
    labels, count = ndimage.label(mask)
    if count <= 1:
        return mask
    sizes = np.bincount(labels.ravel())[1:]
    keep = int(np.argmax(sizes)) + 1
    logger.warning(
        "mask has several components; keeping the largest components=%s kept_pixels=%s",
        count,
        int(sizes[keep - 1]),
    )
    return labels == keep


def _subsample_offsets() -> np.ndarray:
    steps = (np.arange(SUPERSAMPLE) + 0.5) / SUPERSAMPLE - 0.5
    rows, cols = np.meshgrid(steps, steps, indexing="ij")
    return np.stack([rows.ravel(), cols.ravel()], axis=1)


def principal_axis(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Centroid and unit major axis of the second-moment tensor of ``points[K, 2]``."""
    centroid = points.mean(axis=0)
    centered = points - centroid
    moments = centered.T @ centered / len(points)
    _, vectors = np.linalg.eigh(moments)
    return centroid, vectors[:, -1]


def extract_geometry(mask: np.ndarray, n_disks: int = DEFAULT_N_DISKS) -> LVGeometry:
    """Method-of-disks geometry along the mask's principal axis.

    Every pixel is split into ``4 x 4`` sub-samples. The axis length is the extent of pixel
    centres along the axis plus the projected footprint of one pixel; each diameter is the
    sub-sampled area inside a slab divided by the slab thickness.
    """
    if n_disks < 1:
        raise GeometryError(f"n_disks must be >= 1, got {n_disks}")
    binary = np.asarray(mask) > 0
    if binary.ndim != 2:
        raise GeometryError(f"mask must be 2-D, got shape {binary.shape}")
    if not binary.any():
        raise EmptyMaskError("cannot measure an empty mask")
    binary = largest_component(binary)
    centres = np.argwhere(binary).astype(np.float64)
    if len(centres) < 2:
        raise GeometryError("a single-pixel mask has no long axis")

    centroid, axis = principal_axis(centres)
    along = (centres - centroid) @ axis
    footprint = float(np.abs(axis).sum())
    start = float(along.min()) - 0.5 * footprint
    length = float(along.max() - along.min()) + footprint

    samples = (centres[:, None, :] + _subsample_offsets()[None, :, :]).reshape(-1, 2)
    positions = (samples - centroid) @ axis
    thickness = length / n_disks
    slabs = np.clip(np.floor((positions - start) / thickness).astype(np.int64), 0, n_disks - 1)
    area = np.bincount(slabs, minlength=n_disks) / float(SUPERSAMPLE * SUPERSAMPLE)
    apex = centroid + axis * start
    base = centroid + axis * (start + length)
    return LVGeometry(
        apex=(float(apex[0]), float(apex[1])),
        base=(float(base[0]), float(base[1])),
        length=length,
        diameters=area / thickness,
    )
