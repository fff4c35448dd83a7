from __future__ import annotations

import csv
from dataclasses import astuple, dataclass
from pathlib import Path
from typing import Iterable

from ..errors import DataError

METRIC_COLUMNS = ("clip_id", "dice_ed", "dice_es", "hd95_ed", "hd95_es", "ef_true", "ef_pred")


@dataclass(frozen=True)
class ClipMetrics:
    clip_id: str
    dice_ed: float
    dice_es: float
    hd95_ed: float | None
    hd95_es: float | None
    ef_true: float | None
    ef_pred: float | None

    @property
    def dice(self) -> float:
        return 0.5 * (self.dice_ed + self.dice_es)


def _cell(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _optional(value: str) -> float | None:
    return float(value) if value.strip() else None


def write_metrics_csv(path: str | Path, rows: Iterable[ClipMetrics]) -> Path:
    """Missing values are written as empty cells."""
    output = Path(path)
    output.parent.mkdir(parents=True, exist_ok=True)
    with output.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(METRIC_COLUMNS)
        for row in rows:
            writer.writerow([_cell(value) for value in astuple(row)])
    return output


def read_metrics_csv(path: str | Path) -> list[ClipMetrics]:
    source = Path(path)
    if not source.is_file():
        raise DataError(f"metrics file not found: {source}")
    with source.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if tuple(reader.fieldnames or ()) != METRIC_COLUMNS:
            raise DataError(f"unexpected metrics columns in {source}: {reader.fieldnames}")
        rows = []
        for record in reader:
            try:
                rows.append(
                    ClipMetrics(
                        clip_id=record["clip_id"],
                        dice_ed=float(record["dice_ed"]),
                        dice_es=float(record["dice_es"]),
                        hd95_ed=_optional(record["hd95_ed"]),
                        hd95_es=_optional(record["hd95_es"]),
                        ef_true=_optional(record["ef_true"]),
                        ef_pred=_optional(record["ef_pred"]),
                    )
                )
            except ValueError as exc:
                raise DataError(f"bad metrics row {record}: {exc}") from exc
    return rows

