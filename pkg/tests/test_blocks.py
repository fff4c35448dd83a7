from __future__ import annotations

import numpy as np
import pytest

from hssnet.errors import CheckpointError, ConfigError, ShapeError
from hssnet.model import (
    BlockConfig,
    Downsample,
    HSSNet,
    PatchEmbed,
    SepConvBlock,
    StageFeature,
    STMambaBlock,
    Upsample,
    check_compatible,
    image_level,
    load_block_settings,
    load_checkpoint,
    restore_network,
    save_block_settings,
    save_checkpoint,
    stage_size,
    video_level,
)
from hssnet.scan import ALL_MODES, ScanMode
from hssnet.settings import open_settings
from hssnet.tensor import Tensor, fd_check
from hssnet.tensor import ops

TINY = BlockConfig(
    channels=(4, 8, 16, 32),
    encoder_blocks=(1, 1, 1, 1),
    decoder_blocks=(1, 1, 1, 1),
    ffn_ratio=2,
    conv_ratio=2,
    d_state=2,
)


def _feature(frames: int = 2, channels: int = 4, size: int = 3, seed: int = 0) -> StageFeature:
    data = np.random.default_rng(seed).uniform(-1, 1, (frames, channels, size, size))
    return StageFeature(Tensor(data), stage=1)


def test_sep_conv_block_keeps_frames_apart() -> None:
    block = SepConvBlock(4, np.random.default_rng(1), conv_ratio=2, ffn_ratio=2)
    feature = _feature()
    base = block(feature).data.data
    bumped = feature.data.data.copy()
    bumped[0] += 0.5
    moved = block(feature.with_data(Tensor(bumped))).data.data
    assert moved.shape == base.shape
    np.testing.assert_array_equal(moved[1], base[1])
    assert not np.allclose(moved[0], base[0])


def test_mamba_block_mixes_frames_both_ways() -> None:
    block = STMambaBlock(4, np.random.default_rng(2), ffn_ratio=2, d_state=2)
    feature = _feature()
    base = block(feature, feature.grid, ALL_MODES).data.data
    for source, target in ((0, 1), (1, 0)):
        bumped = feature.data.data.copy()
        bumped[source] += 0.5
        moved = block(feature.with_data(Tensor(bumped)), feature.grid, ALL_MODES).data.data
        assert np.max(np.abs(moved[target] - base[target])) > 1e-9


def test_mamba_block_gradients_match_finite_differences() -> None:
    block = STMambaBlock(8, np.random.default_rng(5), ffn_ratio=2, d_state=2)
    feature = _feature(frames=2, channels=8, size=2, seed=6)
    weights = np.random.default_rng(7).uniform(-1, 1, feature.data.shape)

    def loss(x: Tensor) -> Tensor:
        out = block(feature.with_data(x), feature.grid, ALL_MODES).data
        return ops.sum(ops.mul(out, weights))

    assert fd_check(loss, Tensor(feature.data.data)) < 1e-4


def test_zeroed_blocks_are_identity() -> None:
    rng = np.random.default_rng(3)
    feature = _feature(frames=3)
    conv = SepConvBlock(4, rng, conv_ratio=2, ffn_ratio=2)
    conv.zero_residual_branches()
    np.testing.assert_array_equal(conv(feature).data.data, feature.data.data)

    mamba = STMambaBlock(4, rng, ffn_ratio=2, d_state=2)
    mamba.zero_residual_branches()
    out = mamba(feature, feature.grid, [ScanMode.SPATIAL])
    np.testing.assert_array_equal(out.data.data, feature.data.data)


def test_mamba_block_rejects_wrong_grid() -> None:
    block = STMambaBlock(4, np.random.default_rng(4), ffn_ratio=2, d_state=2)
    feature = _feature()
    with pytest.raises(ShapeError):
        block(feature, _feature(frames=3).grid, ALL_MODES)


def test_patch_embed_and_resampling_shapes() -> None:
    rng = np.random.default_rng(5)
    embed = PatchEmbed(1, 4, rng)
    feature = embed(Tensor(np.zeros((2, 1, 32, 64))))
    assert feature.data.shape == (2, 4, 8, 16)
    assert feature.stage == 1

    down = Downsample(4, rng)(feature)
    assert (down.data.shape, down.stage) == ((2, 8, 4, 8), 2)
    up = Upsample(8, rng)(down)
    assert (up.data.shape, up.stage) == ((2, 4, 8, 16), 1)

    with pytest.raises(ShapeError):
        embed(Tensor(np.zeros((2, 1, 30, 32))))
    with pytest.raises(ShapeError):
        embed(Tensor(np.zeros((1, 32, 32))))
    with pytest.raises(ShapeError):
        Downsample(4, rng)(_feature())
    with pytest.raises(ShapeError):
        Upsample(8, rng)(StageFeature(Tensor(np.zeros((1, 8, 2, 2))), stage=1))


def test_network_stage_shapes_and_output() -> None:
    network = HSSNet(TINY, rng=6)
    clip = Tensor(np.random.default_rng(7).uniform(0, 1, (2, 1, 64, 32)))
    features = network.encode(clip)
    for stage, feature in enumerate(features, start=1):
        expected = (2, TINY.channels[stage - 1], *stage_size(64, 32, stage))
        assert feature.data.shape == expected
    assert features[-1].data.shape == (2, 32, 2, 1)
    assert network.forward(clip).shape == (2, 1, 64, 32)

    probs = network.predict(clip.data)
    assert probs.shape == (2, 64, 32)
    assert np.all((probs > 0.0) & (probs < 1.0))


@pytest.mark.parametrize("variant", [image_level, video_level])
def test_network_variants_run(variant) -> None:
    network = HSSNet(variant(TINY), rng=8)
    clip = np.random.default_rng(9).uniform(0, 1, (2, 1, 32, 32))
    assert network.predict(clip).shape == (2, 32, 32)


def test_image_level_network_is_frame_independent() -> None:
    network = HSSNet(image_level(TINY), rng=10)
    clip = np.random.default_rng(11).uniform(0, 1, (2, 1, 32, 32))
    base = network.predict(clip)
    clip[0] += 0.3
    np.testing.assert_array_equal(network.predict(clip)[1], base[1])


def test_block_config_validation() -> None:
    with pytest.raises(ConfigError):
        BlockConfig(channels=(4, 8, 12, 32))
    with pytest.raises(ConfigError):
        BlockConfig(encoder_blocks=(1, 1, 1))
    with pytest.raises(ConfigError):
        BlockConfig(enabled_scan_modes=())
    convs_only = BlockConfig(stage_types=("conv",) * 4, enabled_scan_modes=())
    assert convs_only.has_mamba is False
    assert TINY.without_mode(ScanMode.DIAGONAL).enabled_scan_modes == (
        ScanMode.TEMPORAL,
        ScanMode.SPATIAL,
        ScanMode.ANTI_DIAGONAL,
    )


def test_block_settings_round_trip(tmp_path, qt_app) -> None:
    path = tmp_path / "model.txt"
    config = TINY.without_mode(ScanMode.TEMPORAL)
    settings = open_settings(path)
    save_block_settings(settings, config)
    settings.sync()
    assert load_block_settings(open_settings(path)) == config

    broken = tmp_path / "broken.txt"
    broken.write_text("stage_types = conv, conv, lstm, mamba\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_block_settings(open_settings(broken))


def test_checkpoint_round_trip(tmp_path, qt_app) -> None:
    network = HSSNet(TINY, rng=12)
    extra = {"adam.m.head.weight": np.full((1, 4, 1, 1), 0.25)}
    save_checkpoint(
        tmp_path / "ckpt", network, epoch=3, step=12, extra=extra, metadata={"seed": 5}
    )
    checkpoint = load_checkpoint(tmp_path / "ckpt")
    assert (checkpoint.epoch, checkpoint.step) == (3, 12)
    assert checkpoint.metadata == {"seed": "5"}
    assert checkpoint.config == TINY
    stored = checkpoint.extra["adam.m.head.weight"]
    np.testing.assert_array_equal(stored, extra["adam.m.head.weight"])

    restored = restore_network(checkpoint)
    clip = np.random.default_rng(13).uniform(0, 1, (2, 1, 32, 32))
    np.testing.assert_array_equal(restored.predict(clip), network.predict(clip))


def test_checkpoint_errors(tmp_path, qt_app) -> None:
    network = HSSNet(TINY, rng=14)
    with pytest.raises(CheckpointError):
        save_checkpoint(tmp_path / "bad", network, extra={"head.weight": np.zeros(1)})
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "missing")

    save_checkpoint(tmp_path / "ok", network)
    checkpoint = load_checkpoint(tmp_path / "ok")
    check_compatible(checkpoint, TINY.without_mode(ScanMode.SPATIAL))
    with pytest.raises(CheckpointError):
        check_compatible(checkpoint, image_level(TINY))


def test_mode_change_only_touches_mode_line(tmp_path, qt_app) -> None:
    full = HSSNet(TINY, rng=15)
    reduced = HSSNet(TINY.without_mode(ScanMode.ANTI_DIAGONAL), rng=15)
    save_checkpoint(tmp_path / "full", full)
    save_checkpoint(tmp_path / "reduced", reduced)

    left = (tmp_path / "full" / "manifest.txt").read_text(encoding="utf-8").splitlines()
    right = (tmp_path / "reduced" / "manifest.txt").read_text(encoding="utf-8").splitlines()
    assert len(left) == len(right)
    changed = [a for a, b in zip(left, right) if a != b]
    assert len(changed) == 1
    assert changed[0].startswith("enabled_scan_modes")
    assert (tmp_path / "full" / "tensors.bin").read_bytes() == (
        tmp_path / "reduced" / "tensors.bin"
    ).read_bytes()
