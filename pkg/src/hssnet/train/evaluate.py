from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
import logging
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..data import ClipRecord, View
from ..ef import EFReport, ef_from_masks
from ..errors import GeometryError
from ..metrics import (
    ClipMetrics,
    EFStats,
    SegmentationSummary,
    binarize,
    dice_metric,
    ef_stats,
    hd95_or_none,
    summarize,
    write_metrics_csv,
)
from ..model import BlockConfig, HSSNet, check_compatible, load_checkpoint, restore_network
from ..scan import ScanMode

logger = logging.getLogger(__name__)

MaskPair = tuple[np.ndarray, np.ndarray]


@dataclass(frozen=True)
class EvaluationResult:
    rows: list[ClipMetrics]
    segmentation: SegmentationSummary
    ef: EFStats | None
    ef_missing: int

    @property
    def corr(self) -> float | None:
        return self.ef.corr if self.ef is not None else None


def predict_masks(
    network: HSSNet,
    record: ClipRecord,
    enabled_modes: Iterable[ScanMode | str] | None = None,
) -> MaskPair:
    probs = network.predict(record.frames, enabled_modes)
    return binarize(probs[0]), binarize(probs[-1])


def _ef_or_none(
    ed: np.ndarray,
    es: np.ndarray,
    ed_a2c: np.ndarray | None = None,
    es_a2c: np.ndarray | None = None,
    label: str = "",
) -> EFReport | None:
    try:
        return ef_from_masks(ed, es, ed_a2c, es_a2c)
    except GeometryError as exc:
        logger.warning("ef missing clip=%s reason=%s", label, exc)
        return None


def _ef_groups(records: Sequence[ClipRecord]) -> list[list[int]]:
    """Record indices grouped per EF estimate: complete A4C/A2C pairs, else single clips."""
    by_pair: dict[str, dict[View, int]] = defaultdict(dict)
    groups: list[list[int]] = []
    for index, record in enumerate(records):
        if record.pair_id is not None:
            by_pair[record.pair_id][record.view] = index
        else:
            groups.append([index])
    for views in by_pair.values():
        if View.A4C in views and View.A2C in views:
            groups.append([views[View.A4C], views[View.A2C]])
        else:
            groups.extend([index] for index in views.values())
    return sorted(groups)


def evaluate_predictions(
    records: Sequence[ClipRecord], predictions: Sequence[MaskPair]
) -> EvaluationResult:
    """Per-clip Dice/HD95 on ED and ES plus EF agreement.

    Reference EF comes from the ground-truth masks through the same disk pipeline; paired
    A4C/A2C clips use the biplane method and share one EF estimate.
    """
    if len(records) != len(predictions):
        raise ValueError("records and predictions differ in length")
    ef_true: dict[int, float | None] = {}
    ef_pred: dict[int, float | None] = {}
    pooled_true: list[float] = []
    pooled_pred: list[float] = []
    missing = 0
    for group in _ef_groups(records):
        first = records[group[0]]
        if len(group) == 2:
            second = records[group[1]]
            truth = _ef_or_none(
                first.ed_mask, first.es_mask, second.ed_mask, second.es_mask, first.clip_id
            )
            guess = _ef_or_none(
                *predictions[group[0]], *predictions[group[1]], label=first.clip_id
            )
        else:
            truth = _ef_or_none(first.ed_mask, first.es_mask, label=first.clip_id)
            guess = _ef_or_none(*predictions[group[0]], label=first.clip_id)
        for index in group:
            ef_true[index] = truth.ef if truth else None
            ef_pred[index] = guess.ef if guess else None
        if truth is None or guess is None:
            missing += 1
        else:
            pooled_true.append(truth.ef)
            pooled_pred.append(guess.ef)

    rows: list[ClipMetrics] = []
    for index, (record, (ed_pred, es_pred)) in enumerate(zip(records, predictions)):
        rows.append(
            ClipMetrics(
                clip_id=record.clip_id,
                dice_ed=dice_metric(ed_pred, record.ed_mask),
                dice_es=dice_metric(es_pred, record.es_mask),
                hd95_ed=hd95_or_none(ed_pred, record.ed_mask, f"{record.clip_id}/ed"),
                hd95_es=hd95_or_none(es_pred, record.es_mask, f"{record.clip_id}/es"),
                ef_true=ef_true[index],
                ef_pred=ef_pred[index],
            )
        )
    segmentation = summarize(
        [row.dice for row in rows],
        [value for row in rows for value in (row.hd95_ed, row.hd95_es)],
    )
    stats = ef_stats(pooled_pred, pooled_true) if pooled_true else None
    if missing:
        logger.warning("ef estimates missing count=%s", missing)
    return EvaluationResult(rows=rows, segmentation=segmentation, ef=stats, ef_missing=missing)


def evaluate_network(
    network: HSSNet,
    records: Sequence[ClipRecord],
    enabled_modes: Iterable[ScanMode | str] | None = None,
) -> EvaluationResult:
    modes = tuple(enabled_modes) if enabled_modes is not None else None
    predictions = [predict_masks(network, record, modes) for record in records]
    return evaluate_predictions(records, predictions)


def evaluate(
    checkpoint: str | Path,
    records: Sequence[ClipRecord],
    *,
    config: BlockConfig | None = None,
    output_csv: str | Path | None = None,
) -> EvaluationResult:
    """Score a saved network on ``records``; ``config`` must match the stored layout."""
    stored = load_checkpoint(checkpoint)
    if config is not None:
        check_compatible(stored, config)
    network = restore_network(stored)
    modes = config.enabled_scan_modes if config is not None else None
    result = evaluate_network(network, records, modes)
    if output_csv is not None:
        write_metrics_csv(output_csv, result.rows)
    logger.info(
        "evaluation done checkpoint=%s clips=%s dice=%s hd95=%s corr=%s",
        checkpoint,
        len(records),
        result.segmentation.dice,
        result.segmentation.hd95,
        result.corr,
    )
    return result
