from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from ..errors import ConfigError, ShapeError
from ..scan import (
    ALL_DIRECTIONS,
    PatchGrid,
    ScanDirection,
    ScanMode,
    apply,
    direction_index,
    invert,
    make_order,
)
from ..tensor import Module, Tensor, parameter, zeros_init
from ..tensor import ops
from .params import DEFAULT_D_STATE, SSMParams, init_ssm_params
from .selective import selective_scan


def normalize_modes(modes: Iterable[ScanMode | str]) -> tuple[ScanMode, ...]:
    """Deduplicated modes in first-seen order; raises when nothing is enabled."""
    seen: list[ScanMode] = []
    for mode in modes:
        value = ScanMode(mode)
        if value not in seen:
            seen.append(value)
    if not seen:
        raise ConfigError("at least one scan mode must be enabled")
    return tuple(seen)


def stcs_mix(
    stage_params: Sequence[SSMParams],
    seq: Tensor,
    grid: PatchGrid,
    enabled_modes: Iterable[ScanMode | str],
) -> Tensor:
    """Mean of the selective scans over every enabled mode in both directions.

    ``stage_params`` holds one entry per direction (indexed like ``ALL_DIRECTIONS``) or a
    single entry shared by all of them. Each scan runs in its own order and is restored to
    canonical slot order before the merge.
    """
    modes = normalize_modes(enabled_modes)
    if seq.ndim != 2 or seq.shape[1] != grid.length:
        raise ShapeError(f"sequence {seq.shape} does not cover grid of {grid.length} slots")
    if len(stage_params) not in (1, len(ALL_DIRECTIONS)):
        raise ShapeError(
            f"expected 1 or {len(ALL_DIRECTIONS)} direction params, got {len(stage_params)}"
        )
    total: Tensor | None = None
    count = 0
    for mode in modes:
        for direction in ScanDirection:
            index = 0 if len(stage_params) == 1 else direction_index(mode, direction)
            params = stage_params[index]
            order = make_order(grid, mode, direction)
            scanned = invert(order, selective_scan(params, apply(order, seq)))
            total = scanned if total is None else ops.add(total, scanned)
            count += 1
    assert total is not None
    return ops.mul(total, 1.0 / count)


class STCSMixer(Module):
    """Cross-scan mixer: ``stcs_mix`` followed by a channel projection."""

    def __init__(
        self,
        channels: int,
        rng: np.random.Generator,
        *,
        d_state: int = DEFAULT_D_STATE,
        share_direction_params: bool = False,
    ) -> None:
        count = 1 if share_direction_params else len(ALL_DIRECTIONS)
        self.directions = [init_ssm_params(channels, rng, d_state) for _ in range(count)]
        bound = 1.0 / np.sqrt(channels)
        self.out_weight = parameter(rng.uniform(-bound, bound, (channels, channels)))
        self.out_bias = zeros_init((channels,))
        self.channels = channels

    def __call__(
        self, seq: Tensor, grid: PatchGrid, enabled_modes: Iterable[ScanMode | str]
    ) -> Tensor:
        mixed = stcs_mix(self.directions, seq, grid, enabled_modes)
        projected = ops.linear(ops.transpose(mixed), self.out_weight, self.out_bias)
        return ops.transpose(projected)

    def zero_output(self) -> None:
        self.out_weight.assign(np.zeros_like(self.out_weight.data))
        self.out_bias.assign(np.zeros_like(self.out_bias.data))
