from __future__ import annotations

from dataclasses import dataclass
import logging
from typing import Sequence

import numpy as np

from ..errors import ShapeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EFStats:
    corr: float | None
    bias: float
    std: float
    count: int


def ef_stats(pred_ef: Sequence[float], true_ef: Sequence[float]) -> EFStats:
    """Pearson r, mean bias and population std of ``pred - true``.

    ``corr`` is ``None`` when either list has zero variance.
    """
    pred = np.asarray(pred_ef, dtype=np.float64)
    true = np.asarray(true_ef, dtype=np.float64)
    if pred.ndim != 1 or pred.shape != true.shape:
        raise ShapeError(f"ef lists differ in shape: {pred.shape} vs {true.shape}")
    if pred.size == 0:
        raise ShapeError("ef_stats needs at least one value")
    diff = pred - true
    pc, tc = pred - pred.mean(), true - true.mean()
    denom = float(np.sqrt(np.sum(pc * pc) * np.sum(tc * tc)))
    corr: float | None
    if denom == 0.0:
        logger.warning("ef correlation undefined; zero variance count=%s", pred.size)
        corr = None
    else:
        corr = float(np.clip(np.sum(pc * tc) / denom, -1.0, 1.0))
    return EFStats(corr=corr, bias=float(diff.mean()), std=float(diff.std()), count=int(pred.size))
