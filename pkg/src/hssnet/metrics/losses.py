from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import DataError, ShapeError
from ..tensor import Tensor, as_tensor
from ..tensor import ops

DEFAULT_ALPHA = 0.8
DICE_SMOOTH = 1.0
BCE_EPS = 1e-7


def _check_pair(prediction: Tensor, target: Tensor) -> None:
    if prediction.shape != target.shape:
        raise ShapeError(f"prediction {prediction.shape} and target {target.shape} differ")
    if not np.all((target.data == 0.0) | (target.data == 1.0)):
        raise DataError("target mask must contain only 0 and 1")


def dice_loss(
    prediction: Tensor, target: Tensor | np.ndarray, smooth: float = DICE_SMOOTH
) -> Tensor:
    """``1 - (2 sum(PG) + s) / (sum(P) + sum(G) + s)``."""
    g = as_tensor(target)
    _check_pair(prediction, g)
    overlap = ops.sum(ops.mul(prediction, g))
    denom = ops.add(ops.add(ops.sum(prediction), float(g.data.sum())), smooth)
    return ops.sub(1.0, ops.div(ops.add(ops.mul(overlap, 2.0), smooth), denom))


def bce_loss(prediction: Tensor, target: Tensor | np.ndarray, eps: float = BCE_EPS) -> Tensor:
    g = as_tensor(target)
    _check_pair(prediction, g)
    p = ops.clamp(prediction, eps, 1.0 - eps)
    positive = ops.mul(g, ops.log(p))
    negative = ops.mul(ops.sub(1.0, g), ops.log(ops.sub(1.0, p)))
    return ops.neg(ops.mean(ops.add(positive, negative)))


def total_loss(
    prediction: Tensor, target: Tensor | np.ndarray, alpha: float = DEFAULT_ALPHA
) -> Tensor:
    """``alpha * dice + (1 - alpha) * bce`` on one probability map and its binary mask."""
    dice = dice_loss(prediction, target)
    bce = bce_loss(prediction, target)
    return ops.add(ops.mul(dice, alpha), ops.mul(bce, 1.0 - alpha))


def annotated_frames(frame_count: int) -> list[int]:
    """Indices of the labelled frames: ED first, ES last."""
    if frame_count < 2:
        raise ShapeError(f"a clip needs at least 2 frames, got {frame_count}")
    return [0, frame_count - 1]


def clip_loss(
    logits: Tensor,
    ed_mask: np.ndarray,
    es_mask: np.ndarray,
    alpha: float = DEFAULT_ALPHA,
) -> Tensor:
    """Mean of the ED and ES frame losses for ``[T, 1, H, W]`` logits.

    Only the first and last frames reach the loss, so intermediate frames receive exactly
    zero gradient from it.
    """
    if logits.ndim != 4 or logits.shape[1] != 1:
        raise ShapeError(f"logits must be [T, 1, H, W], got {logits.shape}")
    labelled = ops.take(logits, annotated_frames(logits.shape[0]), axis=0)
    probs = ops.sigmoid(labelled)
    losses: Sequence[Tensor] = [
        total_loss(ops.reshape(ops.take(probs, [index], axis=0), mask.shape), mask, alpha)
        for index, mask in enumerate((np.asarray(ed_mask, float), np.asarray(es_mask, float)))
    ]
    return ops.mul(ops.add(losses[0], losses[1]), 0.5)
