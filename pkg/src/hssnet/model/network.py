from __future__ import annotations

import logging
from typing import Iterable, Sequence

import numpy as np

from ..errors import ShapeError
from ..scan import ScanMode
from ..ssm import normalize_modes
from ..tensor import Module, Tensor, no_grad
from ..tensor import ops
from .blocks import (
    Conv2d,
    Downsample,
    PatchEmbed,
    SepConvBlock,
    StageFeature,
    STMambaBlock,
    Upsample,
)
from .config import PATCH_SIZE, BlockConfig, StageType

logger = logging.getLogger(__name__)

Block = SepConvBlock | STMambaBlock


def stage_size(height: int, width: int, stage: int) -> tuple[int, int]:
    """Spatial size of stage ``i`` for an ``H x W`` input: ``H / 2^(i+1)``."""
    return height >> (stage + 1), width >> (stage + 1)


class HSSNet(Module):
    """Hierarchical encoder-decoder that maps a ``[T, 1, H, W]`` clip to mask logits.

    Stage types select separable convolution blocks (per frame) or spatio-temporal
    Mamba blocks (whole clip). The decoder mirrors the encoder stage types and fuses
    each encoder feature by adding its 1x1 projection.
    """

    def __init__(self, config: BlockConfig, rng: np.random.Generator | int = 0) -> None:
        rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        self._config = config
        channels = config.channels
        self.embed = PatchEmbed(1, channels[0], rng)
        self.encoder = [
            [self._make_block(stage, rng) for _ in range(config.encoder_blocks[stage])]
            for stage in range(4)
        ]
        self.downsample = [Downsample(channels[stage], rng) for stage in range(3)]
        self.decoder = [
            [self._make_block(stage, rng) for _ in range(config.decoder_blocks[stage])]
            for stage in range(4)
        ]
        self.upsample = [Upsample(channels[stage + 1], rng) for stage in range(3)]
        self.skip = [Conv2d(channels[stage], channels[stage], 1, rng) for stage in range(3)]
        self.head = Conv2d(channels[0], 1, 1, rng)

    @property
    def config(self) -> BlockConfig:
        return self._config

    def _make_block(self, stage: int, rng: np.random.Generator) -> Block:
        config = self._config
        width = config.channels[stage]
        if config.stage_types[stage] == StageType.MAMBA:
            return STMambaBlock(
                width,
                rng,
                ffn_ratio=config.ffn_ratio,
                d_state=config.d_state,
                share_direction_params=config.share_direction_params,
            )
        return SepConvBlock(
            width, rng, conv_ratio=config.conv_ratio, ffn_ratio=config.ffn_ratio
        )

    def _modes(self, enabled_modes: Iterable[ScanMode | str] | None) -> tuple[ScanMode, ...]:
        if enabled_modes is None:
            enabled_modes = self._config.enabled_scan_modes
        return normalize_modes(enabled_modes)

    def _run_blocks(
        self,
        blocks: Sequence[Block],
        feature: StageFeature,
        modes: tuple[ScanMode, ...],
    ) -> StageFeature:
        for block in blocks:
            if isinstance(block, STMambaBlock):
                feature = block(feature, feature.grid, modes)
            else:
                feature = block(feature)
        return feature

    def encode(
        self, clip: Tensor, enabled_modes: Iterable[ScanMode | str] | None = None
    ) -> list[StageFeature]:
        """Encoder stage features ``F_1 .. F_4``."""
        modes = self._modes(enabled_modes) if self._config.has_mamba else ()
        height, width = clip.shape[2], clip.shape[3]
        features: list[StageFeature] = []
        feature = self.embed(clip)
        for stage in range(4):
            if stage > 0:
                feature = self.downsample[stage - 1](feature)
            feature = self._run_blocks(self.encoder[stage], feature, modes)
            expected = (self._config.channels[stage], *stage_size(height, width, stage + 1))
            if feature.data.shape[1:] != expected:
                raise ShapeError(
                    f"stage {stage + 1} feature {feature.data.shape[1:]} != expected {expected}"
                )
            features.append(feature)
        return features

    def forward(
        self, clip: Tensor, enabled_modes: Iterable[ScanMode | str] | None = None
    ) -> Tensor:
        """Mask logits ``[T, 1, H, W]``."""
        modes = self._modes(enabled_modes) if self._config.has_mamba else ()
        skips = self.encode(clip, modes)
        feature = self._run_blocks(self.decoder[3], skips[3], modes)
        for stage in (2, 1, 0):
            up = self.upsample[stage](feature)
            fused = ops.add(up.data, self.skip[stage](skips[stage].data))
            feature = self._run_blocks(self.decoder[stage], up.with_data(fused), modes)
        logits = self.head(ops.upsample_nearest(feature.data, PATCH_SIZE))
        if logits.shape[2:] != clip.shape[2:]:
            raise ShapeError(f"head output {logits.shape} does not match input {clip.shape}")
        return logits

    __call__ = forward

    def predict(
        self, frames: np.ndarray, enabled_modes: Iterable[ScanMode | str] | None = None
    ) -> np.ndarray:
        """Foreground probabilities ``[T, H, W]`` without recording a graph."""
        with no_grad():
            logits = self.forward(Tensor(frames), enabled_modes)
        return np.asarray(ops.sigmoid(logits).data[:, 0])

    def zero_residual_branches(self) -> None:
        """Zero every block's residual output so each block is the identity."""
        for stage in self.encoder + self.decoder:
            for block in stage:
                block.zero_residual_branches()
        logger.debug("residual branches zeroed blocks=%s", sum(map(len, self.encoder)))
