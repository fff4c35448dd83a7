from .blocks import (
    Conv2d,
    Downsample,
    FeedForward,
    InvertedSeparableConv,
    LayerNorm,
    Linear,
    PatchEmbed,
    SepConvBlock,
    StageFeature,
    STMambaBlock,
    Upsample,
)
from .checkpoint import (
    Checkpoint,
    check_compatible,
    load_checkpoint,
    restore_network,
    save_checkpoint,
)
from .config import (
    BlockConfig,
    StageType,
    image_level,
    load_block_settings,
    save_block_settings,
    video_level,
)
from .network import HSSNet, stage_size

__all__ = [
    "BlockConfig",
    "Checkpoint",
    "Conv2d",
    "Downsample",
    "FeedForward",
    "HSSNet",
    "InvertedSeparableConv",
    "LayerNorm",
    "Linear",
    "PatchEmbed",
    "STMambaBlock",
    "SepConvBlock",
    "StageFeature",
    "StageType",
    "Upsample",
    "check_compatible",
    "image_level",
    "load_block_settings",
    "load_checkpoint",
    "restore_network",
    "save_block_settings",
    "save_checkpoint",
    "stage_size",
    "video_level",
]
