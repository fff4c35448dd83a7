from __future__ import annotations

from dataclasses import dataclass
import logging
from typing import Iterable

import numpy as np
from scipy import ndimage

from ..errors import EmptyMaskError, ShapeError

logger = logging.getLogger(__name__)

THRESHOLD = 0.5
PERCENTILE = 95.0
FOUR_CONNECTED = ndimage.generate_binary_structure(2, 1)


def binarize(values: np.ndarray, threshold: float = THRESHOLD) -> np.ndarray:
    return np.asarray(values, dtype=np.float64) >= threshold


def _pair(prediction: np.ndarray, target: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p, g = binarize(prediction), binarize(target)
    if p.shape != g.shape:
        raise ShapeError(f"mask shapes differ: {p.shape} vs {g.shape}")
    return p, g


def dice_metric(prediction: np.ndarray, target: np.ndarray) -> float:
    """``2|P n G| / (|P| + |G|)``; two empty masks score 1.0."""
    p, g = _pair(prediction, target)
    total = int(p.sum()) + int(g.sum())
    if total == 0:
        return 1.0
    return 2.0 * float(np.logical_and(p, g).sum()) / float(total)


def boundary(mask: np.ndarray) -> np.ndarray:
    """Mask pixels with a 4-neighbour outside the mask; the image edge counts as outside."""
    mask = np.asarray(mask, dtype=bool)
    interior = ndimage.binary_erosion(mask, structure=FOUR_CONNECTED, border_value=0)
    return mask & ~interior


def boundary_distances(prediction: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Both directed boundary-to-boundary distance sets, pooled."""
    p, g = _pair(prediction, target)
    if not p.any() or not g.any():
        raise EmptyMaskError("hd95 needs two non-empty masks")
    edge_p, edge_g = boundary(p), boundary(g)
    to_g = ndimage.distance_transform_edt(~edge_g)
    to_p = ndimage.distance_transform_edt(~edge_p)
    return np.concatenate([to_g[edge_p], to_p[edge_g]])


def hd95(prediction: np.ndarray, target: np.ndarray) -> float:
    """95th percentile (linear interpolation) of pooled boundary distances, in pixels."""
    return float(np.percentile(boundary_distances(prediction, target), PERCENTILE))


def hd95_or_none(prediction: np.ndarray, target: np.ndarray, label: str = "") -> float | None:
    try:
        return hd95(prediction, target)
    except EmptyMaskError:
        logger.warning("hd95 missing; empty mask label=%s", label)
        return None


@dataclass(frozen=True)
class SegmentationSummary:
    dice: float
    hd95: float | None
    count: int
    hd95_missing: int


def summarize(
    dice_values: Iterable[float], hd95_values: Iterable[float | None]
) -> SegmentationSummary:
    dice = [float(v) for v in dice_values]
    distances = list(hd95_values)
    present = [float(v) for v in distances if v is not None]
    missing = len(distances) - len(present)
    if missing:
        logger.warning("hd95 values excluded from aggregate missing=%s", missing)
    return SegmentationSummary(
        dice=float(np.mean(dice)) if dice else float("nan"),
        hd95=float(np.mean(present)) if present else None,
        count=len(dice),
        hd95_missing=missing,
    )
