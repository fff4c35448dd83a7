from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from hssnet.data import (
    AugmentConfig,
    AugmentPlan,
    ClipRecord,
    ClipRepository,
    SynthSpec,
    View,
    apply_plan,
    augment,
    ease_profile,
    generate,
    generate_corpus,
    generate_pair,
    generate_pair_corpus,
    load_augment_settings,
    load_synth_settings,
    plan_augmentation,
    read_mask,
    read_pgm,
    save_augment_settings,
    save_synth_settings,
    spatial_transform,
    split_corpus,
    write_pgm,
)
from hssnet.ef import ef_from_masks, extract_geometry, volume_single_plane
from hssnet.errors import ConfigError, DataError
from hssnet.metrics import dice_metric
from hssnet.settings import open_settings

SMALL = SynthSpec().scaled(64)
CLEAN = replace(SynthSpec(), speckle_sigma=0.0)


def test_generation_is_deterministic() -> None:
    first = generate(SMALL, 3)
    second = generate(SMALL, 3)
    np.testing.assert_array_equal(first.frames, second.frames)
    np.testing.assert_array_equal(first.ed_mask, second.ed_mask)
    assert not np.array_equal(first.frames, generate(SMALL, 4).frames)
    assert first.frames.shape == (SMALL.frames, 1, 64, 64)
    assert first.frames.min() >= 0.0 and first.frames.max() <= 1.0


def test_noiseless_cavity_matches_masks() -> None:
    record = generate(CLEAN, 0)
    np.testing.assert_array_equal(record.frames[0, 0] == CLEAN.cavity_level, record.ed_mask)
    np.testing.assert_array_equal(record.frames[-1, 0] == CLEAN.cavity_level, record.es_mask)
    assert record.es_mask.sum() < record.ed_mask.sum()
    assert not np.any(record.es_mask & ~record.ed_mask)


def test_ground_truth_masks_reproduce_ef() -> None:
    record = generate(CLEAN, 1)
    report = ef_from_masks(record.ed_mask, record.es_mask)
    assert record.true_ef == pytest.approx(CLEAN.single_plane_ef)
    assert report.ef == pytest.approx(CLEAN.single_plane_ef, abs=2.0)

    a4c, a2c = generate_pair(CLEAN, 2, pair_id="pair_x")
    assert (a4c.clip_id, a2c.clip_id) == ("pair_x_a4c", "pair_x_a2c")
    assert (a4c.view, a2c.view) == (View.A4C, View.A2C)
    biplane = ef_from_masks(a4c.ed_mask, a4c.es_mask, a2c.ed_mask, a2c.es_mask)
    assert a4c.true_ef == pytest.approx(CLEAN.biplane_ef)
    assert biplane.ef == pytest.approx(CLEAN.biplane_ef, abs=2.0)


def test_jittered_corpus_spreads_ef() -> None:
    records = generate_corpus(SMALL, 6, base_seed=10)
    assert [r.clip_id for r in records] == [f"clip_{i:04d}" for i in range(6)]
    efs = [r.true_ef for r in records]
    assert len(set(efs)) == 6
    assert all(ef is not None and 10.0 < ef < 80.0 for ef in efs)

    threaded = generate_corpus(SMALL, 6, base_seed=10, workers=3)
    for a, b in zip(records, threaded):
        np.testing.assert_array_equal(a.frames, b.frames)

    plain = generate_corpus(SMALL, 2, jitter=False)
    assert plain[0].true_ef == plain[1].true_ef == pytest.approx(SMALL.single_plane_ef)


def test_pair_corpus_layout() -> None:
    records = generate_pair_corpus(SMALL, 2, base_seed=5)
    assert [r.clip_id for r in records] == [
        "pair_0000_a4c",
        "pair_0000_a2c",
        "pair_0001_a4c",
        "pair_0001_a2c",
    ]
    assert records[0].pair_id == records[1].pair_id == "pair_0000"
    assert records[0].true_ef == records[1].true_ef


def test_split_corpus() -> None:
    train, val, test = split_corpus(list(range(64)))
    assert (len(train), len(val), len(test)) == (32, 16, 16)
    assert train[-1] == 31 and val[0] == 32 and test[0] == 48
    with pytest.raises(DataError):
        split_corpus([1, 2], (0.5, -0.1, 0.6))


def test_spec_validation() -> None:
    with pytest.raises(DataError):
        SynthSpec(frames=1)
    with pytest.raises(DataError):
        SynthSpec(contraction_long=1.0)
    with pytest.raises(DataError):
        generate(replace(SMALL, semi_long=40.0), 0)
    assert ease_profile(5)[0] == 0.0
    assert ease_profile(5)[-1] == pytest.approx(1.0)
    assert np.all(np.diff(ease_profile(7)) > 0.0)


def test_record_validation() -> None:
    frames = np.zeros((3, 4, 4))
    mask = np.zeros((4, 4))
    record = ClipRecord("c", frames, mask, mask)
    assert record.frames.shape == (3, 1, 4, 4)
    with pytest.raises(DataError):
        ClipRecord("c", frames[:1], mask, mask)
    with pytest.raises(DataError):
        ClipRecord("c", frames + 2.0, mask, mask)
    with pytest.raises(DataError):
        ClipRecord("c", frames, np.full((4, 4), 0.5), mask)
    with pytest.raises(DataError):
        ClipRecord("c", frames, np.zeros((3, 3)), mask)


def test_augmentation_off_is_identity() -> None:
    record = generate(SMALL, 0)
    assert augment(record, 9, AugmentConfig(probability=0.0)) is record
    assert plan_augmentation(9) == plan_augmentation(9)
    assert plan_augmentation(np.random.SeedSequence([1, 2, 3])) == plan_augmentation(
        np.random.SeedSequence([1, 2, 3])
    )


def test_rotation_moves_frames_and_masks_together() -> None:
    record = generate(replace(SMALL, speckle_sigma=0.0), 0)
    plan = AugmentPlan(rotation_deg=25.0, scale=1.1, use_rotation=True, use_scale=True)
    moved = apply_plan(record, plan)
    assert moved.ed_mask.dtype == bool
    assert not np.array_equal(moved.ed_mask, record.ed_mask)
    dark = moved.frames[0, 0] < 0.5 * (SMALL.cavity_level + SMALL.background_level)
    assert dice_metric(dark, moved.ed_mask) > 0.9
    dark_es = moved.frames[-1, 0] < 0.5 * (SMALL.cavity_level + SMALL.background_level)
    assert dice_metric(dark_es, moved.es_mask) > 0.9


def test_intensity_changes_frames_only() -> None:
    record = generate(SMALL, 0)
    plan = AugmentPlan(gamma=1.4, contrast=1.2, use_gamma=True, use_contrast=True)
    moved = apply_plan(record, plan)
    np.testing.assert_array_equal(moved.ed_mask, record.ed_mask)
    np.testing.assert_array_equal(moved.es_mask, record.es_mask)
    assert not np.allclose(moved.frames, record.frames)
    assert moved.frames.min() >= 0.0 and moved.frames.max() <= 1.0


def test_pgm_round_trip(tmp_path, qt_app) -> None:
    pixels = np.arange(12 * 10, dtype=np.uint8).reshape(12, 10)
    path = write_pgm(tmp_path / "img" / "a.pgm", pixels)
    assert path.read_bytes().startswith(b"P5")
    np.testing.assert_array_equal(read_pgm(path), pixels)
    assert read_mask(path).sum() == int((pixels > 127).sum())
    with pytest.raises(DataError):
        write_pgm(tmp_path / "b.pgm", pixels.astype(np.float64))
    with pytest.raises(DataError):
        read_pgm(tmp_path / "missing.pgm")


def test_repository_round_trip(tmp_path, qt_app) -> None:
    repo = ClipRepository.open(tmp_path / "clips")
    assert repo.list_ids() == []
    with pytest.raises(DataError):
        repo.load_all()

    a4c, a2c = generate_pair(SMALL, 4, pair_id="pair_a")
    single = generate(SMALL, 6, clip_id="clip_b")
    for record in (a4c, a2c):
        repo.save(record, SMALL)
    repo.save(single)
    assert repo.list_ids() == ["clip_b", "pair_a_a2c", "pair_a_a4c"]

    loaded = repo.load("pair_a_a2c")
    assert loaded.view is View.A2C
    assert loaded.pair_id == "pair_a"
    assert loaded.true_ef == a2c.true_ef
    np.testing.assert_array_equal(loaded.ed_mask, a2c.ed_mask)
    np.testing.assert_allclose(loaded.frames, a2c.frames, atol=0.5 / 255.0 + 1e-12)
    assert repo.load("clip_b").pair_id is None
    assert len(repo.load_all()) == 3
    with pytest.raises(DataError):
        repo.load("nope")


def test_synth_settings(tmp_path, qt_app) -> None:
    path = tmp_path / "synth.txt"
    path.write_text("image_size = 64\nframes = 6\nspeckle_sigma = 0.05\n", encoding="utf-8")
    spec = load_synth_settings(open_settings(path))
    assert (spec.image_size, spec.frames) == (64, 6)
    assert spec.semi_long == pytest.approx(20.0)
    assert spec.speckle_sigma == pytest.approx(0.05)

    saved = tmp_path / "saved.txt"
    settings = open_settings(saved)
    save_synth_settings(settings, replace(SMALL, center_row=30.0))
    settings.sync()
    assert load_synth_settings(open_settings(saved)) == replace(SMALL, center_row=30.0)

    broken = tmp_path / "broken.txt"
    broken.write_text("frames = 1\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_synth_settings(open_settings(broken))


def test_augment_settings(tmp_path, qt_app) -> None:
    path = tmp_path / "augment.txt"
    config = AugmentConfig(probability=0.25, gamma_range=(0.8, 1.2), rotation_deg=5.0)
    settings = open_settings(path)
    save_augment_settings(settings, config)
    settings.sync()
    assert load_augment_settings(open_settings(path)) == config

    broken = tmp_path / "broken.txt"
    broken.write_text("[augment]\nscale_min = 2.0\nscale_max = 1.0\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_augment_settings(open_settings(broken))


def test_rotation_only_plan_matches_rotated_masks() -> None:
    record = generate(SMALL, 5)
    plan = AugmentPlan(rotation_deg=-17.0, use_rotation=True)
    moved = apply_plan(record, plan)
    rotated_ed = spatial_transform(record.ed_mask, plan, is_mask=True)
    rotated_es = spatial_transform(record.es_mask, plan, is_mask=True)
    assert dice_metric(moved.ed_mask, rotated_ed) == 1.0
    assert dice_metric(moved.es_mask, rotated_es) == 1.0


@pytest.mark.parametrize("scale", [0.9, 1.1])
def test_scale_only_plan_scales_volume_cubically(scale: float) -> None:
    record = generate(SynthSpec().scaled(128), 0)
    moved = apply_plan(record, AugmentPlan(scale=scale, use_scale=True))
    before = volume_single_plane(extract_geometry(record.ed_mask))
    after = volume_single_plane(extract_geometry(moved.ed_mask))
    assert after / before == pytest.approx(scale**3, rel=0.03)


def test_corpus_masks_reproduce_true_ef() -> None:
    records = generate_corpus(SMALL, 32, base_seed=0)
    errors = [
        abs(ef_from_masks(record.ed_mask, record.es_mask).ef - record.true_ef)
        for record in records
        if record.true_ef is not None
    ]
    assert len(errors) == 32
    assert float(np.mean(errors)) <= 2.0
