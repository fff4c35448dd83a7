from __future__ import annotations

import json

import numpy as np
import pytest

from hssnet.cli import EXIT_CONFIG, EXIT_DATA, EXIT_OK, main
from hssnet.data import ClipRepository, write_pgm
from hssnet.data.pgm import mask_to_pixels
from hssnet.metrics import ClipMetrics, write_metrics_csv

MODEL_KEYS = (
    "channels = 4, 8, 16, 32\n"
    "encoder_blocks = 1, 1, 1, 1\n"
    "decoder_blocks = 1, 1, 1, 1\n"
    "ffn_ratio = 2\n"
    "conv_ratio = 2\n"
    "d_state = 2\n"
)


def _rectangle(height: int, width: int) -> np.ndarray:
    mask = np.zeros((64, 64), dtype=bool)
    mask[10 : 10 + height, 20 : 20 + width] = True
    return mask


def test_scan_dump_prints_permutation(capsys) -> None:
    code = main(["scan-dump", "--t", "2", "--rows", "2", "--cols", "2", "--mode", "spatial"])
    assert code == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "step,slot,t,row,col"
    assert [int(line.split(",")[1]) for line in lines[1:]] == [0, 4, 1, 5, 2, 6, 3, 7]
    assert lines[2] == "1,4,1,0,0"


def test_scan_dump_backward_and_bad_mode(capsys) -> None:
    grid = ["--t", "2", "--rows", "2", "--cols", "2"]
    main(["scan-dump", *grid, "--mode", "anti-diagonal", "--direction", "backward"])
    lines = capsys.readouterr().out.splitlines()
    assert [int(line.split(",")[1]) for line in lines[1:]] == [6, 2, 7, 3, 4, 0, 5, 1]
    with pytest.raises(SystemExit):
        main(["scan-dump", *grid, "--mode", "zigzag"])


def test_ef_command(tmp_path, capsys, qt_app) -> None:
    ed = write_pgm(tmp_path / "ed.pgm", mask_to_pixels(_rectangle(40, 20)))
    es = write_pgm(tmp_path / "es.pgm", mask_to_pixels(_rectangle(40, 10)))
    assert main(["ef", "--ed", str(ed), "--es", str(es)]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["clip_id"] == "ed"
    assert payload["method"] == "single_plane"
    assert payload["ef"] == pytest.approx(75.0)

    manifest = tmp_path / "jobs.txt"
    manifest.write_text("one ed.pgm es.pgm\ntwo ed.pgm es.pgm ed.pgm es.pgm\n", encoding="utf-8")
    assert main(["ef", "--manifest", str(manifest)]) == EXIT_OK
    reports = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
    assert [r["clip_id"] for r in reports] == ["one", "two"]
    assert reports[1]["method"] == "biplane"
    assert reports[1]["ef"] == pytest.approx(75.0)


def test_ef_command_errors(tmp_path, capsys, qt_app) -> None:
    assert main(["ef", "--ed", str(tmp_path / "ed.pgm")]) == EXIT_CONFIG
    assert "error:" in capsys.readouterr().err
    code = main(["ef", "--ed", str(tmp_path / "a.pgm"), "--es", str(tmp_path / "b.pgm")])
    assert code == EXIT_DATA
    empty = write_pgm(tmp_path / "empty.pgm", mask_to_pixels(np.zeros((8, 8))))
    assert main(["ef", "--ed", str(empty), "--es", str(empty)]) == EXIT_DATA


def test_synth_command(tmp_path, capsys, qt_app) -> None:
    spec = tmp_path / "spec.txt"
    spec.write_text("image_size = 32\nframes = 3\n", encoding="utf-8")
    out = tmp_path / "clips"
    args = ["synth", "--spec", str(spec), "--n", "2", "--out", str(out), "--pairs"]
    assert main(args) == EXIT_OK
    assert json.loads(capsys.readouterr().out) == {"out": str(out), "clips": 4}
    records = ClipRepository.open(out).load_all()
    assert [r.clip_id for r in records] == [
        "pair_0000_a2c",
        "pair_0000_a4c",
        "pair_0001_a2c",
        "pair_0001_a4c",
    ]
    assert records[0].frames.shape == (3, 1, 32, 32)


def test_report_command(tmp_path, capsys) -> None:
    metrics = write_metrics_csv(
        tmp_path / "metrics.csv",
        [
            ClipMetrics("clip_0000", 0.9, 0.8, 1.0, 1.0, 50.0, 48.0),
            ClipMetrics("clip_0001", 0.9, 0.8, 1.0, 1.0, 60.0, 62.0),
        ],
    )
    out = tmp_path / "ef.svg"
    assert main(["report", "--metrics", str(metrics), "--out", str(out)]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["corr"] == pytest.approx(1.0)
    assert payload["bias"] == pytest.approx(0.0)
    assert out.is_file()
    missing = tmp_path / "nope.csv"
    assert main(["report", "--metrics", str(missing), "--out", str(out)]) == EXIT_DATA


def test_train_then_eval(tmp_path, capsys, qt_app) -> None:
    spec = tmp_path / "spec.txt"
    spec.write_text("image_size = 32\nframes = 3\n", encoding="utf-8")
    synth = ["synth", "--spec", str(spec), "--n", "4", "--out", str(tmp_path / "clips")]
    assert main(synth) == EXIT_OK
    capsys.readouterr()

    config = tmp_path / "train.txt"
    config.write_text(
        "epochs = 1\nclips_per_step = 2\nseed = 1\ndata_dir = clips\ncheckpoint_dir = run\n"
        + MODEL_KEYS,
        encoding="utf-8",
    )
    assert main(["train", "--config", str(config)]) == EXIT_OK
    summary = json.loads(capsys.readouterr().out)
    assert summary["epochs"] == 1
    assert summary["checkpoint"] == str(tmp_path / "run")

    out = tmp_path / "test_metrics.csv"
    args = ["eval", "--ckpt", str(tmp_path / "run"), "--data", str(tmp_path / "clips")]
    assert main([*args, "--config", str(config), "--out", str(out)]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["clips"] == 1
    assert len(out.read_text(encoding="utf-8").splitlines()) == 2

    missing = ["eval", "--ckpt", str(tmp_path / "missing"), "--data", str(tmp_path / "clips")]
    assert main(missing) == EXIT_CONFIG
    no_data = ["eval", "--ckpt", str(tmp_path / "run"), "--data", str(tmp_path / "none")]
    assert main(no_data) == EXIT_DATA
