from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

from PySide6 import QtCore

from ..errors import ConfigError
from ..scan import ALL_MODES, ScanMode, parse_mode
from ..settings import read_bool, read_int, read_int_list, read_list, write_values
from ..ssm import DEFAULT_D_STATE

STAGE_COUNT = 4
PATCH_SIZE = 4
INPUT_MULTIPLE = 32

DEFAULT_CHANNELS = (32, 64, 128, 256)
DEFAULT_ENCODER_BLOCKS = (2, 2, 4, 2)
DEFAULT_DECODER_BLOCKS = (1, 1, 2, 1)
DEFAULT_FFN_RATIO = 4
DEFAULT_CONV_RATIO = 4


class StageType(str, Enum):
    CONV = "conv"
    MAMBA = "mamba"


DEFAULT_STAGE_TYPES = (StageType.CONV, StageType.CONV, StageType.MAMBA, StageType.MAMBA)


@dataclass(frozen=True)
class BlockConfig:
    channels: tuple[int, ...] = DEFAULT_CHANNELS
    encoder_blocks: tuple[int, ...] = DEFAULT_ENCODER_BLOCKS
    decoder_blocks: tuple[int, ...] = DEFAULT_DECODER_BLOCKS
    ffn_ratio: int = DEFAULT_FFN_RATIO
    conv_ratio: int = DEFAULT_CONV_RATIO
    stage_types: tuple[StageType, ...] = DEFAULT_STAGE_TYPES
    enabled_scan_modes: tuple[ScanMode, ...] = field(default=ALL_MODES)
    d_state: int = DEFAULT_D_STATE
    share_direction_params: bool = False

    def __post_init__(self) -> None:
        for name in ("channels", "encoder_blocks", "decoder_blocks"):
            object.__setattr__(self, name, tuple(int(v) for v in getattr(self, name)))
        object.__setattr__(self, "stage_types", tuple(StageType(t) for t in self.stage_types))
        object.__setattr__(
            self, "enabled_scan_modes", tuple(ScanMode(m) for m in self.enabled_scan_modes)
        )
        for name in ("channels", "encoder_blocks", "decoder_blocks", "stage_types"):
            if len(getattr(self, name)) != STAGE_COUNT:
                raise ConfigError(f"{name}: expected {STAGE_COUNT} stages")
        if min(self.channels) < 1 or min(self.encoder_blocks) < 1 or min(self.decoder_blocks) < 1:
            raise ConfigError("channels and block counts must be positive")
        for lower, upper in zip(self.channels, self.channels[1:]):
            if upper != 2 * lower:
                raise ConfigError(f"channels must double per stage, got {self.channels}")
        if self.ffn_ratio < 1 or self.conv_ratio < 1 or self.d_state < 1:
            raise ConfigError("ffn_ratio, conv_ratio and d_state must be positive")
        if self.has_mamba and not self.enabled_scan_modes:
            raise ConfigError("enabled_scan_modes: at least one mode is needed for mamba stages")
        if len(set(self.enabled_scan_modes)) != len(self.enabled_scan_modes):
            raise ConfigError(f"enabled_scan_modes: duplicates in {self.enabled_scan_modes}")

    @property
    def has_mamba(self) -> bool:
        return StageType.MAMBA in self.stage_types

    def with_stage_types(self, *stage_types: StageType | str) -> "BlockConfig":
        return replace(self, stage_types=tuple(StageType(t) for t in stage_types))

    def without_mode(self, mode: ScanMode) -> "BlockConfig":
        remaining = tuple(m for m in self.enabled_scan_modes if m != mode)
        return replace(self, enabled_scan_modes=remaining)


def image_level(config: BlockConfig) -> BlockConfig:
    """All stages use separable convolution blocks; frames never mix."""
    return config.with_stage_types(*([StageType.CONV] * STAGE_COUNT))


def video_level(config: BlockConfig) -> BlockConfig:
    return config.with_stage_types(*([StageType.MAMBA] * STAGE_COUNT))


def parse_stage_type(value: str) -> StageType:
    try:
        return StageType(value.strip().lower())
    except ValueError as exc:
        raise ConfigError(f"stage_types: unknown stage type {value!r}") from exc


def load_block_settings(
    settings: QtCore.QSettings, base: BlockConfig | None = None
) -> BlockConfig:
    base = base or BlockConfig()
    try:
        modes = tuple(
            parse_mode(item)
            for item in read_list(
                settings, "enabled_scan_modes", [m.value for m in base.enabled_scan_modes]
            )
        )
    except ValueError as exc:
        raise ConfigError(f"enabled_scan_modes: {exc}") from exc
    return BlockConfig(
        channels=read_int_list(settings, "channels", base.channels, length=STAGE_COUNT),
        encoder_blocks=read_int_list(
            settings, "encoder_blocks", base.encoder_blocks, length=STAGE_COUNT
        ),
        decoder_blocks=read_int_list(
            settings, "decoder_blocks", base.decoder_blocks, length=STAGE_COUNT
        ),
        ffn_ratio=read_int(settings, "ffn_ratio", base.ffn_ratio, minimum=1),
        conv_ratio=read_int(settings, "conv_ratio", base.conv_ratio, minimum=1),
        stage_types=tuple(
            parse_stage_type(item)
            for item in read_list(settings, "stage_types", [t.value for t in base.stage_types])
        ),
        enabled_scan_modes=modes,
        d_state=read_int(settings, "d_state", base.d_state, minimum=1),
        share_direction_params=read_bool(
            settings, "share_direction_params", base.share_direction_params
        ),
    )


def save_block_settings(settings: QtCore.QSettings, config: BlockConfig) -> None:
    write_values(
        settings,
        {
            "channels": config.channels,
            "encoder_blocks": config.encoder_blocks,
            "decoder_blocks": config.decoder_blocks,
            "ffn_ratio": config.ffn_ratio,
            "conv_ratio": config.conv_ratio,
            "stage_types": [t.value for t in config.stage_types],
            "enabled_scan_modes": [m.value for m in config.enabled_scan_modes],
            "d_state": config.d_state,
            "share_direction_params": config.share_direction_params,
        },
    )
