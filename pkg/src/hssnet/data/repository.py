from __future__ import annotations

from dataclasses import dataclass
import logging
from pathlib import Path
import shutil

import numpy as np

from ..errors import ConfigError, DataError
from ..settings import open_settings, read_float, read_int, read_str, write_values
from .models import ClipRecord, SynthSpec, View
from .pgm import frame_to_pixels, mask_to_pixels, read_frame, read_mask, write_pgm
from .settings import save_synth_settings

logger = logging.getLogger(__name__)

META_NAME = "meta.txt"
ED_MASK_NAME = "ed_mask.pgm"
ES_MASK_NAME = "es_mask.pgm"
SPEC_PREFIX = "spec/"


def frame_name(index: int) -> str:
    return f"frame_{index:03d}.pgm"


@dataclass
class ClipRepository:
    """Clips stored one directory each under ``root``.

    Layout: ``<clip_id>/frame_000.pgm ...``, ``ed_mask.pgm``, ``es_mask.pgm`` and a
    ``meta.txt`` of ``key = value`` lines. Real datasets can be converted into the same
    layout and read through this class.
    """

    root: Path

    @classmethod
    def open(cls, root: str | Path) -> "ClipRepository":
        return cls(Path(root))

    def list_ids(self) -> list[str]:
        if not self.root.is_dir():
            return []
        return sorted(
            entry.name for entry in self.root.iterdir() if (entry / META_NAME).is_file()
        )

    def save(self, record: ClipRecord, spec: SynthSpec | None = None) -> Path:
        directory = self.root / record.clip_id
        if directory.exists():
            shutil.rmtree(directory)
        directory.mkdir(parents=True)
        for index, frame in enumerate(record.frames):
            write_pgm(directory / frame_name(index), frame_to_pixels(frame[0]))
        write_pgm(directory / ED_MASK_NAME, mask_to_pixels(record.ed_mask))
        write_pgm(directory / ES_MASK_NAME, mask_to_pixels(record.es_mask))

        settings = open_settings(directory / META_NAME)
        write_values(
            settings,
            {
                "clip_id": record.clip_id,
                "frames": record.frame_count,
                "true_ef": record.true_ef,
                "view": record.view.value,
                "pair_id": record.pair_id,
                **record.meta,
            },
        )
        if spec is not None:
            save_synth_settings(settings, spec, prefix=SPEC_PREFIX)
        settings.sync()
        return directory

    def load(self, clip_id: str) -> ClipRecord:
        directory = self.root / clip_id
        meta_path = directory / META_NAME
        if not meta_path.is_file():
            raise DataError(f"clip {clip_id!r} not found under {self.root}")
        settings = open_settings(meta_path)
        try:
            count = read_int(settings, "frames", 0, minimum=2)
            true_ef = (
                read_float(settings, "true_ef", 0.0) if settings.contains("true_ef") else None
            )
            view = View(read_str(settings, "view", View.A4C.value))
        except (ConfigError, ValueError) as exc:
            raise DataError(f"bad metadata for clip {clip_id!r}: {exc}") from exc
        pair_id = read_str(settings, "pair_id", "") or None
        frames = np.stack([read_frame(directory / frame_name(i)) for i in range(count)])
        return ClipRecord(
            clip_id=clip_id,
            frames=frames[:, None],
            ed_mask=read_mask(directory / ED_MASK_NAME),
            es_mask=read_mask(directory / ES_MASK_NAME),
            true_ef=true_ef,
            view=view,
            pair_id=pair_id,
        )

    def load_all(self) -> list[ClipRecord]:
        ids = self.list_ids()
        if not ids:
            raise DataError(f"no clips found under {self.root}")
        records = [self.load(clip_id) for clip_id in ids]
        logger.info("clips loaded root=%s count=%s", self.root, len(records))
        return records
