from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from PySide6 import QtCore

from ..data import AugmentConfig, SynthSpec
from ..data.settings import (
    load_augment_settings,
    load_synth_settings,
    save_augment_settings,
    save_synth_settings,
)
from ..errors import ConfigError
from ..model import BlockConfig, load_block_settings, save_block_settings
from ..settings import (
    open_settings,
    read_bool,
    read_float,
    read_int,
    read_list,
    read_str,
    require_file,
    write_values,
)

DEFAULT_LR_MAX = 1e-4
DEFAULT_LR_MIN = 1e-5
DEFAULT_EPOCHS = 120
DEFAULT_CLIPS_PER_STEP = 2
DEFAULT_ALPHA = 0.8
DEFAULT_CORPUS_SIZE = 64
DEFAULT_DESK_IMAGE_SIZE = 64
DEFAULT_SPLIT = (0.5, 0.25, 0.25)
DEFAULT_CHECKPOINT_DIR = Path("runs/hssnet")
LOG_NAME = "train_log.csv"
SYNTH_PREFIX = "synth/"


@dataclass(frozen=True)
class TrainConfig:
    lr_max: float = DEFAULT_LR_MAX
    lr_min: float = DEFAULT_LR_MIN
    epochs: int = DEFAULT_EPOCHS
    clips_per_step: int = DEFAULT_CLIPS_PER_STEP
    seed: int = 0
    alpha: float = DEFAULT_ALPHA
    block: BlockConfig = field(default_factory=BlockConfig)
    synth: SynthSpec = field(
        default_factory=lambda: SynthSpec().scaled(DEFAULT_DESK_IMAGE_SIZE)
    )
    data_dir: Path | None = None
    corpus_size: int = DEFAULT_CORPUS_SIZE
    split: tuple[float, float, float] = DEFAULT_SPLIT
    checkpoint_dir: Path = DEFAULT_CHECKPOINT_DIR
    augment_enabled: bool = True
    augment: AugmentConfig = field(default_factory=AugmentConfig)
    workers: int = 1

    def __post_init__(self) -> None:
        if self.lr_min <= 0.0 or self.lr_min > self.lr_max:
            raise ConfigError(f"lr_min must satisfy 0 < lr_min <= lr_max, got {self.lr_min}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.clips_per_step < 1:
            raise ConfigError(f"clips_per_step must be >= 1, got {self.clips_per_step}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.corpus_size < 1:
            raise ConfigError(f"corpus_size must be >= 1, got {self.corpus_size}")
        if len(self.split) != 3 or min(self.split) < 0.0 or self.split[0] <= 0.0:
            raise ConfigError(f"split needs three non-negative fractions, got {self.split}")

    @property
    def log_path(self) -> Path:
        return self.checkpoint_dir / LOG_NAME


def _path(value: str, base: Path | None) -> Path | None:
    if not value:
        return None
    path = Path(value).expanduser()
    if base is not None and not path.is_absolute():
        path = base / path
    return path


def load_train_settings(
    settings: QtCore.QSettings, base_dir: Path | None = None
) -> TrainConfig:
    """Read a training config; relative paths resolve against ``base_dir``."""
    defaults = TrainConfig()
    split_items = read_list(settings, "split", [str(v) for v in defaults.split])
    try:
        split = tuple(float(item) for item in split_items)
    except ValueError as exc:
        raise ConfigError(f"split: expected numbers, got {split_items!r}") from exc
    if len(split) != 3:
        raise ConfigError(f"split: expected 3 fractions, got {len(split)}")
    synth = defaults.synth
    if any(key.startswith(SYNTH_PREFIX) for key in settings.allKeys()):
        synth = load_synth_settings(settings, prefix=SYNTH_PREFIX, base=synth)
    checkpoint_dir = _path(read_str(settings, "checkpoint_dir", ""), base_dir)
    return TrainConfig(
        lr_max=read_float(settings, "lr_max", defaults.lr_max, minimum=0.0),
        lr_min=read_float(settings, "lr_min", defaults.lr_min, minimum=0.0),
        epochs=read_int(settings, "epochs", defaults.epochs, minimum=1),
        clips_per_step=read_int(settings, "clips_per_step", defaults.clips_per_step, minimum=1),
        seed=read_int(settings, "seed", defaults.seed),
        alpha=read_float(settings, "alpha", defaults.alpha, minimum=0.0, maximum=1.0),
        block=load_block_settings(settings),
        synth=synth,
        data_dir=_path(read_str(settings, "data_dir", ""), base_dir),
        corpus_size=read_int(settings, "corpus_size", defaults.corpus_size, minimum=1),
        split=(split[0], split[1], split[2]),
        checkpoint_dir=checkpoint_dir or defaults.checkpoint_dir,
        augment_enabled=read_bool(settings, "augment", defaults.augment_enabled),
        augment=load_augment_settings(settings),
        workers=read_int(settings, "workers", defaults.workers, minimum=1),
    )


def save_train_settings(settings: QtCore.QSettings, config: TrainConfig) -> None:
    write_values(
        settings,
        {
            "lr_max": config.lr_max,
            "lr_min": config.lr_min,
            "epochs": config.epochs,
            "clips_per_step": config.clips_per_step,
            "seed": config.seed,
            "alpha": config.alpha,
            "data_dir": str(config.data_dir) if config.data_dir is not None else None,
            "corpus_size": config.corpus_size,
            "split": config.split,
            "checkpoint_dir": str(config.checkpoint_dir),
            "augment": config.augment_enabled,
            "workers": config.workers,
        },
    )
    save_block_settings(settings, config.block)
    save_synth_settings(settings, config.synth, prefix=SYNTH_PREFIX)
    save_augment_settings(settings, config.augment)


def load_train_config(path: str | Path) -> TrainConfig:
    source = require_file(path)
    return load_train_settings(open_settings(source), base_dir=source.parent)
