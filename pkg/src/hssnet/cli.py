"""Command-line front end.

Typical usage:
  hssnet synth --n 64 --out data/desk
  hssnet train --config configs/desk.txt
  hssnet eval --ckpt runs/hssnet --data data/desk --out runs/hssnet/test_metrics.csv
  hssnet ef --ed ed_mask.pgm --es es_mask.pgm
  hssnet scan-dump --t 2 --rows 2 --cols 2 --mode spatial
  hssnet report --metrics runs/hssnet/test_metrics.csv --out ef.svg
  hssnet ablate --config configs/desk.txt
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
from pathlib import Path
import sys
from typing import Sequence

from . import __version__
from .data import (
    ClipRepository,
    SynthSpec,
    generate_corpus,
    generate_pair_corpus,
    load_synth_settings,
    read_mask,
    split_corpus,
)
from .ef import DEFAULT_N_DISKS, EFJob, ef_from_masks, read_ef_manifest, report_to_json
from .errors import CheckpointError, ConfigError, DataError
from .metrics import read_metrics_csv
from .scan import PatchGrid, ScanDirection, make_order, parse_mode
from .settings import open_settings, require_file
from .train import (
    evaluate,
    format_ablation_table,
    load_train_config,
    run_ablation,
    train,
    write_ef_scatter,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3

logger = logging.getLogger(__name__)


def _positive(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return number


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hssnet", description="HSS-Net desk-scale toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--verbose", action="store_true", help="Also log to stderr")
    commands = parser.add_subparsers(dest="command", required=True)

    train_cmd = commands.add_parser("train", help="Train a network from a config file")
    train_cmd.add_argument("--config", required=True, help="key = value training config")
    train_cmd.add_argument("--resume", action="store_true", help="Continue from the checkpoint")

    eval_cmd = commands.add_parser("eval", help="Score a checkpoint on stored clips")
    eval_cmd.add_argument("--ckpt", required=True, help="Checkpoint directory")
    eval_cmd.add_argument("--data", required=True, help="Clip directory")
    eval_cmd.add_argument("--config", help="Training config; restricts scoring to its test split")
    eval_cmd.add_argument("--out", help="Per-clip metrics CSV")

    ef_cmd = commands.add_parser("ef", help="Ejection fraction from ED/ES masks")
    ef_cmd.add_argument("--ed", help="ED mask (PGM)")
    ef_cmd.add_argument("--es", help="ES mask (PGM)")
    ef_cmd.add_argument("--ed2", help="ED mask of the orthogonal view")
    ef_cmd.add_argument("--es2", help="ES mask of the orthogonal view")
    ef_cmd.add_argument("--manifest", help="Batch file: clip_id ed es [ed2 es2] per line")
    ef_cmd.add_argument("--disks", type=_positive, default=DEFAULT_N_DISKS)

    scan_cmd = commands.add_parser("scan-dump", help="Print a scan permutation as CSV")
    scan_cmd.add_argument("--t", type=_positive, required=True, dest="frames")
    scan_cmd.add_argument("--rows", type=_positive, required=True)
    scan_cmd.add_argument("--cols", type=_positive, required=True)
    scan_cmd.add_argument("--mode", type=parse_mode, required=True)
    scan_cmd.add_argument(
        "--direction",
        choices=[direction.value for direction in ScanDirection],
        default=ScanDirection.FORWARD.value,
    )

    synth_cmd = commands.add_parser("synth", help="Write synthetic clips to disk")
    synth_cmd.add_argument("--spec", help="key = value synthetic anatomy settings")
    synth_cmd.add_argument("--n", type=_positive, required=True, help="Clips (or pairs)")
    synth_cmd.add_argument("--out", required=True, help="Output directory")
    synth_cmd.add_argument("--seed", type=int, default=0)
    synth_cmd.add_argument("--pairs", action="store_true", help="Write A4C/A2C pairs")
    synth_cmd.add_argument("--no-jitter", action="store_true", help="Same anatomy for all")
    synth_cmd.add_argument("--workers", type=_positive, default=1)

    report_cmd = commands.add_parser("report", help="SVG scatter of predicted vs true EF")
    report_cmd.add_argument("--metrics", required=True, help="Metrics CSV from eval")
    report_cmd.add_argument("--out", required=True, help="Output SVG")

    ablate_cmd = commands.add_parser("ablate", help="Train and compare ablation variants")
    ablate_cmd.add_argument("--config", required=True)
    ablate_cmd.add_argument(
        "--modes", action="store_true", help="Also drop each scan mode in turn"
    )
    return parser


def _cmd_train(args: argparse.Namespace) -> int:
    config = load_train_config(args.config)
    result = train(config, resume=args.resume)
    last = result.history[-1] if result.history else None
    print(
        json.dumps(
            {
                "checkpoint": str(result.checkpoint),
                "log": str(result.log_path),
                "epochs": last.epoch if last else 0,
                "loss": last.loss if last else None,
                "val_dice": last.val_dice if last else None,
                "val_ef_corr": last.val_ef_corr if last else None,
            }
        )
    )
    return EXIT_OK


def _cmd_eval(args: argparse.Namespace) -> int:
    records = ClipRepository.open(args.data).load_all()
    block = None
    if args.config:
        config = load_train_config(args.config)
        block = config.block
        records = split_corpus(records, config.split)[2]
        if not records:
            raise DataError("test split is empty")
    result = evaluate(args.ckpt, records, config=block, output_csv=args.out)
    ef = result.ef
    print(
        json.dumps(
            {
                "clips": len(result.rows),
                "dice": result.segmentation.dice,
                "hd95": result.segmentation.hd95,
                "hd95_missing": result.segmentation.hd95_missing,
                "corr": ef.corr if ef else None,
                "bias": ef.bias if ef else None,
                "std": ef.std if ef else None,
                "ef_missing": result.ef_missing,
            }
        )
    )
    return EXIT_OK


def _ef_jobs(args: argparse.Namespace) -> list[EFJob]:
    if args.manifest:
        return read_ef_manifest(args.manifest)
    if not args.ed or not args.es:
        raise ConfigError("ef needs --ed and --es, or --manifest")
    if bool(args.ed2) != bool(args.es2):
        raise ConfigError("--ed2 and --es2 must be given together")
    return [
        EFJob(
            clip_id=Path(args.ed).stem,
            ed=Path(args.ed),
            es=Path(args.es),
            ed_a2c=Path(args.ed2) if args.ed2 else None,
            es_a2c=Path(args.es2) if args.es2 else None,
        )
    ]


def _cmd_ef(args: argparse.Namespace) -> int:
    for job in _ef_jobs(args):
        second = (
            (read_mask(job.ed_a2c), read_mask(job.es_a2c))
            if job.ed_a2c is not None and job.es_a2c is not None
            else (None, None)
        )
        report = ef_from_masks(read_mask(job.ed), read_mask(job.es), *second, n_disks=args.disks)
        print(report_to_json(report, job.clip_id))
    return EXIT_OK


def _cmd_scan_dump(args: argparse.Namespace) -> int:
    grid = PatchGrid(args.frames, args.rows, args.cols)
    order = make_order(grid, args.mode, ScanDirection(args.direction))
    area = grid.rows * grid.cols
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(("step", "slot", "t", "row", "col"))
    for step, slot in enumerate(order.perm.tolist()):
        t, rest = divmod(slot, area)
        row, col = divmod(rest, grid.cols)
        writer.writerow((step, slot, t, row, col))
    return EXIT_OK


def _cmd_synth(args: argparse.Namespace) -> int:
    spec = SynthSpec()
    if args.spec:
        spec = load_synth_settings(open_settings(require_file(args.spec)))
    jitter = not args.no_jitter
    if args.pairs:
        records = generate_pair_corpus(spec, args.n, args.seed, jitter=jitter)
    else:
        records = generate_corpus(spec, args.n, args.seed, jitter=jitter, workers=args.workers)
    repository = ClipRepository.open(args.out)
    for record in records:
        repository.save(record, None if jitter else spec)
    print(json.dumps({"out": str(args.out), "clips": len(records)}))
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    stats = write_ef_scatter(read_metrics_csv(args.metrics), args.out)
    print(
        json.dumps(
            {"out": str(args.out), "corr": stats.corr, "bias": stats.bias, "std": stats.std}
        )
    )
    return EXIT_OK


def _cmd_ablate(args: argparse.Namespace) -> int:
    config = load_train_config(args.config)
    rows = run_ablation(config, include_mode_removals=args.modes)
    print(format_ablation_table(rows))
    return EXIT_OK


_COMMANDS = {
    "train": _cmd_train,
    "eval": _cmd_eval,
    "ef": _cmd_ef,
    "scan-dump": _cmd_scan_dump,
    "synth": _cmd_synth,
    "report": _cmd_report,
    "ablate": _cmd_ablate,
}


def run(args: argparse.Namespace) -> int:
    """Dispatch a parsed command; library errors become exit codes."""
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, CheckpointError) as exc:
        logger.error("command failed command=%s error=%s", args.command, exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        logger.error("command failed command=%s error=%s", args.command, exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main(argv: Sequence[str] | None = None) -> int:
    return run(build_parser().parse_args(argv))

