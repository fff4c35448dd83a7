from __future__ import annotations

from dataclasses import replace
import logging
from pathlib import Path
from typing import Sequence

from ..data import ClipRecord
from ..errors import DataError
from ..model import BlockConfig, image_level, video_level
from .config import TrainConfig
from .evaluate import evaluate
from .report import AblationRow, write_ablation_table
from .trainer import load_records, train

logger = logging.getLogger(__name__)

HIERARCHICAL = "hierarchical"
IMAGE_LEVEL = "image_level"
VIDEO_LEVEL = "video_level"
TABLE_NAME = "ablation.csv"
METRICS_NAME = "test_metrics.csv"


def ablation_variants(
    block: BlockConfig, include_mode_removals: bool = False
) -> list[tuple[str, BlockConfig]]:
    """The configured network, its all-conv and all-mamba forms, optionally minus each mode."""
    variants = [
        (HIERARCHICAL, block),
        (IMAGE_LEVEL, image_level(block)),
        (VIDEO_LEVEL, video_level(block)),
    ]
    if include_mode_removals and len(block.enabled_scan_modes) > 1:
        variants.extend(
            (f"without_{mode.value}", block.without_mode(mode))
            for mode in block.enabled_scan_modes
        )
    return variants


def run_ablation(
    config: TrainConfig,
    records: Sequence[ClipRecord] | None = None,
    *,
    include_mode_removals: bool = False,
) -> list[AblationRow]:
    """Train every variant on the same clips and score each on the shared test split.

    Checkpoints go to ``<checkpoint_dir>/<variant>``; the side-by-side table is written to
    ``<checkpoint_dir>/ablation.csv``.
    """
    clips = list(records) if records is not None else load_records(config)
    rows: list[AblationRow] = []
    for name, block in ablation_variants(config.block, include_mode_removals):
        variant_dir = Path(config.checkpoint_dir) / name
        variant = replace(config, block=block, checkpoint_dir=variant_dir)
        logger.info("ablation variant start variant=%s stages=%s", name, block.stage_types)
        outcome = train(variant, clips)
        if not outcome.test:
            raise DataError("ablation needs a non-empty test split")
        result = evaluate(
            outcome.checkpoint,
            outcome.test,
            config=block,
            output_csv=variant_dir / METRICS_NAME,
        )
        ef = result.ef
        rows.append(
            AblationRow(
                variant=name,
                corr=ef.corr if ef else None,
                bias=ef.bias if ef else None,
                std=ef.std if ef else None,
                dice=result.segmentation.dice,
                hd95=result.segmentation.hd95,
                ef_count=ef.count if ef else 0,
            )
        )
        logger.info("ablation variant done variant=%s corr=%s", name, rows[-1].corr)
    write_ablation_table(Path(config.checkpoint_dir) / TABLE_NAME, rows)
    return rows
