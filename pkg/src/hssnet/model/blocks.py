from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ..errors import ShapeError
from ..scan import PatchGrid, ScanMode
from ..ssm import STCSMixer
from ..tensor import Module, Tensor, parameter, uniform_init, zeros_init
from ..tensor import ops
from .config import INPUT_MULTIPLE, PATCH_SIZE


@dataclass(frozen=True)
class StageFeature:
    """Per-frame feature map ``[T, C, H_i, W_i]`` of encoder or decoder stage ``i``."""

    data: Tensor
    stage: int

    def __post_init__(self) -> None:
        if self.data.ndim != 4:
            raise ShapeError(f"stage feature must be [T, C, H, W], got {self.data.shape}")
        if not 1 <= self.stage <= 4:
            raise ShapeError(f"stage must be in 1..4, got {self.stage}")

    @property
    def frames(self) -> int:
        return self.data.shape[0]

    @property
    def channels(self) -> int:
        return self.data.shape[1]

    @property
    def spatial(self) -> tuple[int, int]:
        return self.data.shape[2], self.data.shape[3]

    @property
    def grid(self) -> PatchGrid:
        return PatchGrid(self.frames, *self.spatial)

    def with_data(self, data: Tensor) -> "StageFeature":
        return StageFeature(data=data, stage=self.stage)


def channels_last(x: Tensor) -> Tensor:
    return ops.transpose(x, (0, 2, 3, 1))


def channels_first(x: Tensor) -> Tensor:
    return ops.transpose(x, (0, 3, 1, 2))


class LayerNorm(Module):
    def __init__(self, channels: int) -> None:
        self.gamma = parameter(np.ones(channels))
        self.beta = zeros_init((channels,))
        self.channels = channels

    def __call__(self, x: Tensor) -> Tensor:
        return ops.layer_norm(x, self.channels, self.gamma, self.beta)


class Linear(Module):
    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator) -> None:
        self.weight = uniform_init(rng, (out_features, in_features), in_features)
        self.bias = zeros_init((out_features,))

    def __call__(self, x: Tensor) -> Tensor:
        return ops.linear(x, self.weight, self.bias)

    def zero(self) -> None:
        self.weight.assign(np.zeros_like(self.weight.data))
        self.bias.assign(np.zeros_like(self.bias.data))


class Conv2d(Module):
    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kernel_size: int,
        rng: np.random.Generator,
        *,
        stride: int = 1,
        padding: int = 0,
        groups: int = 1,
    ) -> None:
        fan_in = (in_channels // groups) * kernel_size * kernel_size
        self.weight = uniform_init(
            rng, (out_channels, in_channels // groups, kernel_size, kernel_size), fan_in
        )
        self.bias = zeros_init((out_channels,))
        self.stride = stride
        self.padding = padding
        self.groups = groups

    def __call__(self, x: Tensor) -> Tensor:
        return ops.conv2d(
            x,
            self.weight,
            self.bias,
            stride=self.stride,
            padding=self.padding,
            groups=self.groups,
        )

    def zero(self) -> None:
        self.weight.assign(np.zeros_like(self.weight.data))
        self.bias.assign(np.zeros_like(self.bias.data))


class FeedForward(Module):
    """Linear, SiLU, Linear over the last axis."""

    def __init__(self, channels: int, ratio: int, rng: np.random.Generator) -> None:
        self.fc1 = Linear(channels, channels * ratio, rng)
        self.fc2 = Linear(channels * ratio, channels, rng)

    def __call__(self, x: Tensor) -> Tensor:
        return self.fc2(ops.silu(self.fc1(x)))

    def zero_output(self) -> None:
        self.fc2.zero()


class InvertedSeparableConv(Module):
    """1x1 expand, 3x3 depthwise, 1x1 project on ``[T, C, H, W]``."""

    def __init__(self, channels: int, ratio: int, rng: np.random.Generator) -> None:
        hidden = channels * ratio
        self.expand = Conv2d(channels, hidden, 1, rng)
        self.depthwise = Conv2d(hidden, hidden, 3, rng, padding=1, groups=hidden)
        self.project = Conv2d(hidden, channels, 1, rng)

    def __call__(self, x: Tensor) -> Tensor:
        hidden = ops.silu(self.expand(x))
        hidden = ops.silu(self.depthwise(hidden))
        return self.project(hidden)

    def zero_output(self) -> None:
        self.project.zero()


class SepConvBlock(Module):
    """Per-frame block: ``F += SC(LN(F))`` then ``F += FFN(LN(F))``."""

    def __init__(
        self, channels: int, rng: np.random.Generator, *, conv_ratio: int, ffn_ratio: int
    ) -> None:
        self.norm1 = LayerNorm(channels)
        self.conv = InvertedSeparableConv(channels, conv_ratio, rng)
        self.norm2 = LayerNorm(channels)
        self.ffn = FeedForward(channels, ffn_ratio, rng)

    def __call__(self, feature: StageFeature) -> StageFeature:
        x = feature.data
        normed = channels_first(self.norm1(channels_last(x)))
        x = ops.add(self.conv(normed), x)
        h = channels_last(x)
        h = ops.add(self.ffn(self.norm2(h)), h)
        return feature.with_data(channels_first(h))

    def zero_residual_branches(self) -> None:
        self.conv.zero_output()
        self.ffn.zero_output()


class STMambaBlock(Module):
    """Spatio-temporal block over the flattened clip sequence.

    The residual stream is kept as ``[L, C]`` in canonical slot order
    ``t * H * W + r * W + c``; the cross-scan mixer sees it as ``[C, L]``.
    """

    def __init__(
        self,
        channels: int,
        rng: np.random.Generator,
        *,
        ffn_ratio: int,
        d_state: int,
        share_direction_params: bool = False,
    ) -> None:
        self.norm1 = LayerNorm(channels)
        self.mixer = STCSMixer(
            channels, rng, d_state=d_state, share_direction_params=share_direction_params
        )
        self.norm2 = LayerNorm(channels)
        self.ffn = FeedForward(channels, ffn_ratio, rng)

    def __call__(
        self,
        feature: StageFeature,
        grid: PatchGrid,
        enabled_modes: Iterable[ScanMode | str],
    ) -> StageFeature:
        t, c, h, w = feature.data.shape
        if grid != PatchGrid(t, h, w):
            raise ShapeError(f"grid {grid} does not match feature {feature.data.shape}")
        stream = ops.reshape(channels_last(feature.data), (grid.length, c))
        mixed = self.mixer(ops.transpose(self.norm1(stream)), grid, enabled_modes)
        stream = ops.add(ops.transpose(mixed), stream)
        stream = ops.add(self.ffn(self.norm2(stream)), stream)
        out = channels_first(ops.reshape(stream, (t, h, w, c)))
        return feature.with_data(out)

    def zero_residual_branches(self) -> None:
        self.mixer.zero_output()
        self.ffn.zero_output()


class PatchEmbed(Module):
    def __init__(self, in_channels: int, channels: int, rng: np.random.Generator) -> None:
        self.proj = Conv2d(in_channels, channels, PATCH_SIZE, rng, stride=PATCH_SIZE)

    def __call__(self, clip: Tensor) -> StageFeature:
        if clip.ndim != 4:
            raise ShapeError(f"clip must be [T, 1, H, W], got {clip.shape}")
        height, width = clip.shape[2], clip.shape[3]
        if height % INPUT_MULTIPLE or width % INPUT_MULTIPLE:
            raise ShapeError(
                f"input {height}x{width} must be divisible by {INPUT_MULTIPLE} in both extents"
            )
        return StageFeature(data=self.proj(clip), stage=1)


class Downsample(Module):
    """2x2 stride-2 convolution doubling the channels."""

    def __init__(self, channels: int, rng: np.random.Generator) -> None:
        self.proj = Conv2d(channels, 2 * channels, 2, rng, stride=2)

    def __call__(self, feature: StageFeature) -> StageFeature:
        height, width = feature.spatial
        if height % 2 or width % 2:
            raise ShapeError(f"cannot downsample odd extents {height}x{width}")
        return StageFeature(data=self.proj(feature.data), stage=feature.stage + 1)


class Upsample(Module):
    """Nearest-neighbour x2 followed by a 1x1 convolution halving the channels."""

    def __init__(self, channels: int, rng: np.random.Generator) -> None:
        self.proj = Conv2d(channels, channels // 2, 1, rng)

    def __call__(self, feature: StageFeature) -> StageFeature:
        if feature.stage <= 1:
            raise ShapeError("stage 1 features cannot be upsampled to a lower stage")
        data = self.proj(ops.upsample_nearest(feature.data, 2))
        return StageFeature(data=data, stage=feature.stage - 1)
