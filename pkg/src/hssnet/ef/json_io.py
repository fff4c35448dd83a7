from __future__ import annotations

from dataclasses import dataclass
import json
from pathlib import Path

from ..errors import DataError
from .volume import EFReport


@dataclass(frozen=True)
class EFJob:
    clip_id: str
    ed: Path
    es: Path
    ed_a2c: Path | None = None
    es_a2c: Path | None = None


def report_to_json(report: EFReport, clip_id: str | None = None) -> str:
    payload: dict[str, object] = {}
    if clip_id is not None:
        payload["clip_id"] = clip_id
    payload.update(
        {
            "edv": report.edv,
            "esv": report.esv,
            "ef": report.ef,
            "method": report.method.value,
        }
    )
    return json.dumps(payload)


def read_ef_manifest(path: str | Path) -> list[EFJob]:
    """One job per line: ``clip_id ed es [ed_a2c es_a2c]``; paths relative to the file."""
    source = Path(path)
    if not source.is_file():
        raise DataError(f"manifest not found: {source}")
    jobs: list[EFJob] = []
    for number, line in enumerate(source.read_text(encoding="utf-8").splitlines(), start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        parts = text.split()
        if len(parts) not in (3, 5):
            raise DataError(f"{source}:{number}: expected 3 or 5 fields, got {len(parts)}")
        paths = [source.parent / part for part in parts[1:]]
        jobs.append(
            EFJob(
                clip_id=parts[0],
                ed=paths[0],
                es=paths[1],
                ed_a2c=paths[2] if len(paths) == 4 else None,
                es_a2c=paths[3] if len(paths) == 4 else None,
            )
        )
    return jobs
