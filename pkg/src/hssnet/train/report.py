from __future__ import annotations

import csv
from dataclasses import dataclass
import logging
from pathlib import Path
from typing import Sequence

from matplotlib.figure import Figure

from ..data.models import View
from ..errors import DataError
from ..metrics import ClipMetrics, EFStats, ef_stats

logger = logging.getLogger(__name__)

ABLATION_COLUMNS = ("variant", "corr", "bias", "std", "dice", "hd95", "ef_count")


def ef_points(rows: Sequence[ClipMetrics]) -> tuple[list[float], list[float]]:
    """(true, predicted) EF per estimate; the A2C row of a pair repeats its A4C row."""
    ids = {row.clip_id for row in rows}
    a2c_suffix, a4c_suffix = f"_{View.A2C.value}", f"_{View.A4C.value}"
    true: list[float] = []
    pred: list[float] = []
    for row in rows:
        if row.ef_true is None or row.ef_pred is None:
            continue
        if row.clip_id.endswith(a2c_suffix):
            sibling = row.clip_id[: -len(a2c_suffix)] + a4c_suffix
            if sibling in ids:
                continue
        true.append(row.ef_true)
        pred.append(row.ef_pred)
    return true, pred


def annotation(stats: EFStats) -> str:
    corr = "n/a" if stats.corr is None else f"{stats.corr:.3f}"
    return f"corr = {corr}\nbias = {stats.bias:.2f} ± {stats.std:.2f}\nn = {stats.count}"


def write_ef_scatter(rows: Sequence[ClipMetrics], output: str | Path) -> EFStats:
    """Predicted vs true EF with the identity line, saved as SVG."""
    true, pred = ef_points(rows)
    if not true:
        raise DataError("no clip has both a true and a predicted EF")
    stats = ef_stats(pred, true)

    figure = Figure(figsize=(5.0, 5.0))
    axes = figure.add_subplot(1, 1, 1)
    low = min(min(true), min(pred)) - 5.0
    high = max(max(true), max(pred)) + 5.0
    axes.plot([low, high], [low, high], color="0.5", linestyle="--", linewidth=1.0)
    axes.scatter(true, pred, s=18, color="tab:blue")
    axes.set_xlim(low, high)
    axes.set_ylim(low, high)
    axes.set_xlabel("true EF (%)")
    axes.set_ylabel("predicted EF (%)")
    axes.set_aspect("equal")
    axes.text(
        0.04,
        0.96,
        annotation(stats),
        transform=axes.transAxes,
        verticalalignment="top",
        family="monospace",
    )
    target = Path(output)
    target.parent.mkdir(parents=True, exist_ok=True)
    figure.savefig(target, format="svg", bbox_inches="tight")
    logger.info("ef scatter written path=%s points=%s corr=%s", target, stats.count, stats.corr)
    return stats


@dataclass(frozen=True)
class AblationRow:
    variant: str
    corr: float | None
    bias: float | None
    std: float | None
    dice: float
    hd95: float | None
    ef_count: int


def _cell(value: float | int | None) -> str:
    if value is None:
        return ""
    return f"{value:.6g}" if isinstance(value, float) else str(value)


def write_ablation_table(path: str | Path, rows: Sequence[AblationRow]) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(ABLATION_COLUMNS)
        for row in rows:
            writer.writerow(
                [
                    row.variant,
                    _cell(row.corr),
                    _cell(row.bias),
                    _cell(row.std),
                    _cell(row.dice),
                    _cell(row.hd95),
                    row.ef_count,
                ]
            )
    return target


def _fixed(value: float | None) -> str:
    return "-" if value is None else f"{value:.3f}"


def format_ablation_table(rows: Sequence[AblationRow]) -> str:
    """Plain-text table with the variants side by side."""
    width = max([len(ABLATION_COLUMNS[0]), *(len(row.variant) for row in rows)])
    header = "  ".join(f"{name:>9}" for name in ABLATION_COLUMNS[1:])
    lines = [f"{ABLATION_COLUMNS[0]:<{width}}  {header}"]
    for row in rows:
        cells = "  ".join(
            f"{_fixed(value):>9}" for value in (row.corr, row.bias, row.std, row.dice, row.hd95)
        )
        lines.append(f"{row.variant:<{width}}  {cells}  {row.ef_count:>9}")
    return "\n".join(lines)
