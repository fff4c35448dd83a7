from __future__ import annotations

from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from hssnet.data import AugmentConfig, SynthSpec, generate_corpus, generate_pair
from hssnet.errors import CheckpointError, ConfigError, DataError, ShapeError
from hssnet.metrics import ClipMetrics, read_metrics_csv
from hssnet.model import BlockConfig, HSSNet, image_level, save_checkpoint
from hssnet.scan import ScanMode
from hssnet.settings import open_settings
from hssnet.tensor import Tensor
from hssnet.train import (
    AblationRow,
    AdamState,
    Trainer,
    TrainConfig,
    TrainState,
    ablation_variants,
    adam_step,
    evaluate,
    evaluate_predictions,
    format_ablation_table,
    load_train_config,
    load_train_settings,
    lr_schedule,
    read_train_log,
    run_ablation,
    save_train_settings,
    train,
    write_ablation_table,
    write_ef_scatter,
)

REPO_ROOT = Path(__file__).resolve().parents[1]

TINY_BLOCK = BlockConfig(
    channels=(4, 8, 16, 32),
    encoder_blocks=(1, 1, 1, 1),
    decoder_blocks=(1, 1, 1, 1),
    ffn_ratio=2,
    conv_ratio=2,
    d_state=2,
)
TINY_SYNTH = replace(SynthSpec().scaled(32), frames=4)


def _tiny_config(tmp_path: Path, **changes: object) -> TrainConfig:
    config = TrainConfig(
        epochs=2,
        clips_per_step=1,
        seed=3,
        block=TINY_BLOCK,
        synth=TINY_SYNTH,
        corpus_size=4,
        checkpoint_dir=tmp_path / "run",
        augment=AugmentConfig(probability=0.5),
    )
    return replace(config, **changes)


def _tiny_records(count: int = 4, seed: int = 0):
    return generate_corpus(TINY_SYNTH, count, base_seed=seed)


def test_lr_schedule_shape() -> None:
    cfg = TrainConfig()
    assert lr_schedule(0, 100, cfg) == 1e-4
    assert lr_schedule(100, 100, cfg) == 1e-5
    assert lr_schedule(50, 100, cfg) == pytest.approx(5.5e-5)
    values = [lr_schedule(step, 100, cfg) for step in range(101)]
    assert all(a >= b for a, b in zip(values, values[1:]))
    with pytest.raises(ConfigError):
        lr_schedule(101, 100, cfg)
    with pytest.raises(ConfigError):
        lr_schedule(0, 0, cfg)


def test_adam_first_step_moves_by_learning_rate() -> None:
    weight = Tensor(np.zeros(3), requires_grad=True)
    state = AdamState()
    assert adam_step({"w": weight}, {"w": np.array([0.5, -2.0, 0.0])}, state, lr=1e-3)
    np.testing.assert_allclose(weight.data, [-1e-3, 1e-3, 0.0], rtol=1e-6)
    assert state.step == 1
    np.testing.assert_allclose(state.m["w"], [0.05, -0.2, 0.0])


def test_adam_skips_non_finite_steps() -> None:
    weight = Tensor(np.ones(2), requires_grad=True)
    state = AdamState()
    assert not adam_step({"w": weight}, {"w": np.array([np.nan, 1.0])}, state, lr=0.1)
    np.testing.assert_array_equal(weight.data, [1.0, 1.0])
    assert (state.step, state.skipped) == (0, 1)
    assert state.m == {}
    with pytest.raises(ShapeError):
        adam_step({"w": weight}, {}, state, lr=0.1)


def test_adam_state_tensor_names() -> None:
    state = AdamState(step=4, m={"a": np.ones(2)}, v={"a": np.full(2, 3.0)})
    tensors = state.to_tensors()
    assert sorted(tensors) == ["adam.m.a", "adam.v.a"]
    restored = AdamState.from_tensors(tensors, step=4)
    np.testing.assert_array_equal(restored.v["a"], state.v["a"])
    assert restored.step == 4


def test_desk_config_loads(qt_app) -> None:
    config = load_train_config(REPO_ROOT / "configs" / "desk.txt")
    assert config.epochs == 120
    assert config.clips_per_step == 2
    assert config.block.encoder_blocks == (1, 1, 1, 1)
    assert config.synth.image_size == 64
    assert config.synth.frames == 10
    assert config.checkpoint_dir == REPO_ROOT / "configs" / ".." / "runs" / "desk"


def test_train_config_file(tmp_path, qt_app) -> None:
    path = tmp_path / "train.txt"
    path.write_text(
        "epochs = 3\n"
        "lr_max = 2e-4\n"
        "data_dir = clips\n"
        "enabled_scan_modes = temporal, spatial\n"
        "[synth]\n"
        "image_size = 32\n"
        "[augment]\n"
        "probability = 0.1\n",
        encoding="utf-8",
    )
    config = load_train_config(path)
    assert config.epochs == 3
    assert config.lr_max == pytest.approx(2e-4)
    assert config.data_dir == tmp_path / "clips"
    assert config.block.enabled_scan_modes == (ScanMode.TEMPORAL, ScanMode.SPATIAL)
    assert config.synth.semi_long == pytest.approx(10.0)
    assert config.augment.probability == pytest.approx(0.1)

    saved = tmp_path / "saved.txt"
    settings = open_settings(saved)
    save_train_settings(settings, _tiny_config(tmp_path))
    settings.sync()
    assert load_train_settings(open_settings(saved)) == _tiny_config(tmp_path)

    with pytest.raises(ConfigError):
        load_train_config(tmp_path / "absent.txt")
    broken = tmp_path / "broken.txt"
    broken.write_text("lr_max = 1e-5\nlr_min = 1e-4\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_train_config(broken)


def test_trainer_rejects_empty_split(tmp_path) -> None:
    with pytest.raises(DataError):
        Trainer(_tiny_config(tmp_path), [])


def test_resumed_run_matches_uninterrupted_run(tmp_path, qt_app) -> None:
    records = _tiny_records()
    train_split, val_split = records[:2], records[2:3]

    full = Trainer(_tiny_config(tmp_path / "full"), train_split, val_split)
    history = full.run()
    assert full.state is TrainState.FINISHED
    assert [r.epoch for r in history] == [1, 2]
    assert [r.step for r in history] == [2, 4]
    assert history[-1].lr < history[0].lr
    assert read_train_log(tmp_path / "full" / "run" / "train_log.csv") == history

    config = _tiny_config(tmp_path / "split")
    first = Trainer(config, train_split, val_split)
    first.run(until_epoch=1)
    assert first.epoch == 1
    second = Trainer(config, train_split, val_split)
    resumed = second.run(resume=True)

    assert resumed == history
    assert read_train_log(config.log_path) == history
    full_state = full.network.state_dict()
    for name, value in second.network.state_dict().items():
        np.testing.assert_array_equal(value, full_state[name])
    assert second.optimizer.step == full.optimizer.step


def test_resume_rejects_other_seed(tmp_path, qt_app) -> None:
    records = _tiny_records(2)
    config = _tiny_config(tmp_path, epochs=1, augment_enabled=False)
    Trainer(config, records).run()
    other = Trainer(replace(config, seed=99), records)
    with pytest.raises(CheckpointError):
        other.run(resume=True)
    assert other.state is TrainState.FAILED


def test_evaluation_with_oracle_masks() -> None:
    records = generate_corpus(TINY_SYNTH.scaled(64), 3, base_seed=1)
    records += list(generate_pair(SynthSpec().scaled(64), 7, pair_id="pair_q"))
    oracle = [(record.ed_mask, record.es_mask) for record in records]
    result = evaluate_predictions(records, oracle)
    assert result.segmentation.dice == 1.0
    assert result.segmentation.hd95 == 0.0
    assert result.ef is not None
    assert result.ef.count == 4
    assert result.ef.bias == pytest.approx(0.0, abs=1e-12)
    assert result.corr == pytest.approx(1.0)
    assert result.rows[-1].ef_pred == result.rows[-2].ef_pred
    assert result.ef_missing == 0


def test_evaluation_handles_empty_predictions() -> None:
    records = generate_corpus(TINY_SYNTH, 2, base_seed=2)
    empty = np.zeros(records[0].image_shape, dtype=bool)
    result = evaluate_predictions(records, [(empty, empty)] * 2)
    assert result.segmentation.dice == 0.0
    assert result.segmentation.hd95 is None
    assert result.segmentation.hd95_missing == 4
    assert result.ef is None
    assert result.ef_missing == 2
    assert all(row.ef_pred is None and row.ef_true is not None for row in result.rows)


def test_evaluate_checkpoint(tmp_path, qt_app) -> None:
    records = _tiny_records(2)
    save_checkpoint(tmp_path / "ckpt", HSSNet(TINY_BLOCK, rng=0))
    result = evaluate(tmp_path / "ckpt", records, output_csv=tmp_path / "metrics.csv")
    rows = read_metrics_csv(tmp_path / "metrics.csv")
    assert [row.clip_id for row in rows] == [r.clip_id for r in records]
    assert len(result.rows) == 2
    assert 0.0 <= result.segmentation.dice <= 1.0
    with pytest.raises(CheckpointError):
        evaluate(tmp_path / "ckpt", records, config=image_level(TINY_BLOCK))


def test_ef_scatter_and_tables(tmp_path) -> None:
    rows = [
        ClipMetrics("clip_0000", 0.9, 0.9, 1.0, 1.0, 55.0, 52.0),
        ClipMetrics("clip_0001", 0.8, 0.7, 2.0, None, 40.0, 45.0),
        ClipMetrics("pair_0000_a4c", 0.9, 0.9, 1.0, 1.0, 60.0, 61.0),
        ClipMetrics("pair_0000_a2c", 0.9, 0.9, 1.0, 1.0, 60.0, 61.0),
        ClipMetrics("clip_0002", 0.1, 0.1, None, None, 50.0, None),
    ]
    stats = write_ef_scatter(rows, tmp_path / "plots" / "ef.svg")
    assert stats.count == 3
    assert stats.bias == pytest.approx(1.0)
    assert "<svg" in (tmp_path / "plots" / "ef.svg").read_text(encoding="utf-8")
    with pytest.raises(DataError):
        write_ef_scatter(rows[-1:], tmp_path / "none.svg")

    table = [
        AblationRow("hierarchical", 0.8, 1.5, 4.0, 0.9, 2.5, 8),
        AblationRow("image_level", None, None, None, 0.7, None, 0),
    ]
    path = write_ablation_table(tmp_path / "ablation.csv", table)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "variant,corr,bias,std,dice,hd95,ef_count"
    assert lines[2] == "image_level,,,,0.7,,0"
    text = format_ablation_table(table)
    assert "hierarchical" in text and "image_level" in text
    assert "0.800" in text and "-" in text.splitlines()[2]


def test_ablation_variants() -> None:
    names = [name for name, _ in ablation_variants(TINY_BLOCK)]
    assert names == ["hierarchical", "image_level", "video_level"]
    with_modes = dict(ablation_variants(TINY_BLOCK, include_mode_removals=True))
    assert len(with_modes) == 7
    assert ScanMode.DIAGONAL not in with_modes["without_diagonal"].enabled_scan_modes
    assert with_modes["video_level"].has_mamba
    assert not with_modes["image_level"].has_mamba


def test_train_and_ablation_end_to_end(tmp_path, qt_app) -> None:
    config = _tiny_config(tmp_path, epochs=1)
    outcome = train(config)
    assert (len(outcome.train), len(outcome.val), len(outcome.test)) == (2, 1, 1)
    assert (outcome.checkpoint / "manifest.txt").is_file()
    assert len(outcome.history) == 1

    rows = run_ablation(config, _tiny_records())
    assert [row.variant for row in rows] == ["hierarchical", "image_level", "video_level"]
    assert (tmp_path / "run" / "ablation.csv").is_file()
    assert (tmp_path / "run" / "video_level" / "test_metrics.csv").is_file()
