from __future__ import annotations

from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from hssnet.data import generate
from hssnet.model import BlockConfig, HSSNet, stage_size
from hssnet.tensor import Tensor, no_grad
from hssnet.train import (
    TrainConfig,
    Trainer,
    evaluate,
    evaluate_network,
    load_train_config,
    run_ablation,
    train,
)

REPO_ROOT = Path(__file__).resolve().parents[1]

pytestmark = pytest.mark.slow


def _desk_config(tmp_path: Path) -> TrainConfig:
    config = load_train_config(REPO_ROOT / "configs" / "desk.txt")
    return replace(config, checkpoint_dir=tmp_path / "desk")


def test_full_size_stage_shapes() -> None:
    network = HSSNet(BlockConfig(), rng=0)
    with no_grad():
        features = network.encode(Tensor(np.zeros((10, 1, 256, 256))))
    assert [f.spatial for f in features] == [(64, 64), (32, 32), (16, 16), (8, 8)]
    assert [f.channels for f in features] == list(BlockConfig().channels)
    assert [stage_size(256, 256, stage) for stage in range(1, 5)] == [
        (64, 64),
        (32, 32),
        (16, 16),
        (8, 8),
    ]


def test_single_clip_overfits(tmp_path, qt_app) -> None:
    config = replace(
        _desk_config(tmp_path),
        epochs=200,
        clips_per_step=1,
        augment_enabled=False,
        lr_max=1e-3,
        lr_min=1e-4,
    )
    record = generate(config.synth, 0)
    trainer = Trainer(config, [record])
    trainer.run()
    result = evaluate_network(trainer.network, [record])
    assert result.segmentation.dice > 0.95


def _assert_desk_targets(config: TrainConfig) -> None:
    outcome = train(config)
    assert (len(outcome.train), len(outcome.val), len(outcome.test)) == (32, 16, 16)
    result = evaluate(outcome.checkpoint, outcome.test, config=config.block)
    assert result.segmentation.dice >= 0.90
    assert result.ef is not None
    assert result.ef.corr is not None and result.ef.corr >= 0.80
    assert abs(result.ef.bias) <= 5.0


def test_desk_run_meets_targets(tmp_path, qt_app) -> None:
    _assert_desk_targets(_desk_config(tmp_path))


def test_default_block_counts_meet_targets(tmp_path, qt_app) -> None:
    config = replace(_desk_config(tmp_path), block=BlockConfig())
    assert config.block.encoder_blocks == (2, 2, 4, 2)
    assert config.block.decoder_blocks == (1, 1, 2, 1)
    _assert_desk_targets(config)


def test_hierarchical_variant_tracks_ef_best(tmp_path, qt_app) -> None:
    rows = {row.variant: row for row in run_ablation(_desk_config(tmp_path))}
    best = rows["hierarchical"].corr
    assert best is not None
    for variant in ("image_level", "video_level"):
        corr = rows[variant].corr
        assert corr is None or corr < best
