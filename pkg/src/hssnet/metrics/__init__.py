from .csv_io import METRIC_COLUMNS, ClipMetrics, read_metrics_csv, write_metrics_csv
from .losses import (
    DEFAULT_ALPHA,
    annotated_frames,
    bce_loss,
    clip_loss,
    dice_loss,
    total_loss,
)
from .segmentation import (
    SegmentationSummary,
    binarize,
    boundary,
    boundary_distances,
    dice_metric,
    hd95,
    hd95_or_none,
    summarize,
)
from .stats import EFStats, ef_stats

__all__ = [
    "DEFAULT_ALPHA",
    "METRIC_COLUMNS",
    "ClipMetrics",
    "EFStats",
    "SegmentationSummary",
    "annotated_frames",
    "bce_loss",
    "binarize",
    "boundary",
    "boundary_distances",
    "clip_loss",
    "dice_loss",
    "dice_metric",
    "ef_stats",
    "hd95",
    "hd95_or_none",
    "read_metrics_csv",
    "summarize",
    "total_loss",
    "write_metrics_csv",
]
