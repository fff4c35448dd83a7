from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
import csv
from dataclasses import dataclass, field
from enum import Enum
import logging
import math
from pathlib import Path
from typing import Sequence

import numpy as np

from ..data import ClipRecord, ClipRepository, augment, generate_corpus, split_corpus
from ..errors import CheckpointError, DataError
from ..metrics import clip_loss
from ..model import HSSNet, check_compatible, load_checkpoint, save_checkpoint
from ..tensor import Tensor, ops
from .config import TrainConfig
from .evaluate import evaluate_network
from .optim import AdamState, adam_step, lr_schedule

LOG_COLUMNS = ("epoch", "step", "lr", "loss", "val_dice", "val_ef_corr", "skipped")


class TrainState(str, Enum):
    IDLE = "idle"
    RUNNING = "running"
    FINISHED = "finished"
    FAILED = "failed"


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    step: int
    lr: float
    loss: float
    val_dice: float | None
    val_ef_corr: float | None
    skipped: int = 0


@dataclass(frozen=True)
class TrainResult:
    checkpoint: Path
    log_path: Path
    history: list[EpochRecord]
    train: list[ClipRecord] = field(default_factory=list)
    val: list[ClipRecord] = field(default_factory=list)
    test: list[ClipRecord] = field(default_factory=list)


def _cell(value: float | None) -> str:
    return "" if value is None else repr(float(value))


def _optional(value: str) -> float | None:
    return float(value) if value else None


def read_train_log(path: str | Path) -> list[EpochRecord]:
    source = Path(path)
    if not source.is_file():
        return []
    try:
        with source.open(newline="", encoding="utf-8") as handle:
            return [
                EpochRecord(
                    epoch=int(row["epoch"]),
                    step=int(row["step"]),
                    lr=float(row["lr"]),
                    loss=float(row["loss"]),
                    val_dice=_optional(row["val_dice"]),
                    val_ef_corr=_optional(row["val_ef_corr"]),
                    skipped=int(row["skipped"]),
                )
                for row in csv.DictReader(handle)
            ]
    except (KeyError, ValueError) as exc:
        raise DataError(f"malformed training log {source}: {exc}") from exc


def write_train_log(path: str | Path, history: Sequence[EpochRecord]) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(LOG_COLUMNS)
        for record in history:
            writer.writerow(
                [
                    record.epoch,
                    record.step,
                    repr(record.lr),
                    repr(record.loss),
                    _cell(record.val_dice),
                    _cell(record.val_ef_corr),
                    record.skipped,
                ]
            )


class Trainer:
    """Adam + cosine annealing over whole clips; loss sees the ED and ES frames only.

    Every random choice is derived from ``(seed, epoch, clip index)``, so a run resumed from
    its per-epoch checkpoint continues exactly like an uninterrupted one.
    """

    def __init__(
        self,
        config: TrainConfig,
        train_records: Sequence[ClipRecord],
        val_records: Sequence[ClipRecord] = (),
    ) -> None:
        if not train_records:
            raise DataError("training split is empty")
        self._logger = logging.getLogger(__name__)
        self._config = config
        self._train = list(train_records)
        self._val = list(val_records)
        self._state = TrainState.IDLE
        self.network = HSSNet(config.block, rng=np.random.default_rng(config.seed))
        self.optimizer = AdamState()
        self.epoch = 0
        self.step = 0
        self.history: list[EpochRecord] = []

    @property
    def state(self) -> TrainState:
        return self._state

    @property
    def steps_per_epoch(self) -> int:
        return math.ceil(len(self._train) / self._config.clips_per_step)

    @property
    def total_steps(self) -> int:
        return self._config.epochs * self.steps_per_epoch

    def run(self, resume: bool = False, until_epoch: int | None = None) -> list[EpochRecord]:
        """Train to ``config.epochs`` (or ``until_epoch``); returns the full epoch history."""
        self._set_state(TrainState.RUNNING, reason="resume" if resume else "start")
        try:
            if resume:
                self._resume()
            else:
                write_train_log(self._config.log_path, [])
            last = self._config.epochs if until_epoch is None else until_epoch
            last = min(last, self._config.epochs)
            while self.epoch < last:
                self._run_epoch()
        except Exception as exc:
            self._set_state(TrainState.FAILED, reason=type(exc).__name__)
            raise
        self._set_state(TrainState.FINISHED, reason=f"epoch={self.epoch}")
        return list(self.history)

    def _epoch_batch(self, epoch: int) -> list[ClipRecord]:
        order = np.random.default_rng([self._config.seed, epoch]).permutation(len(self._train))
        if not self._config.augment_enabled:
            return [self._train[index] for index in order]

        def _prepare(index: int) -> ClipRecord:
            seed = np.random.SeedSequence([self._config.seed, epoch, int(index)])
            return augment(self._train[index], seed, self._config.augment)

        if self._config.workers > 1:
            with ThreadPoolExecutor(max_workers=self._config.workers) as pool:
                return list(pool.map(_prepare, order))
        return [_prepare(index) for index in order]

    def _batch_loss(self, batch: Sequence[ClipRecord]) -> Tensor:
        modes = self._config.block.enabled_scan_modes
        losses = [
            clip_loss(
                self.network(Tensor(record.frames), modes),
                record.ed_mask,
                record.es_mask,
                self._config.alpha,
            )
            for record in batch
        ]
        total = losses[0]
        for loss in losses[1:]:
            total = ops.add(total, loss)
        return ops.mul(total, 1.0 / len(losses))

    def _run_epoch(self) -> None:
        cfg = self._config
        clips = self._epoch_batch(self.epoch)
        params = dict(self.network.named_parameters())
        losses: list[float] = []
        lr = cfg.lr_max
        for start in range(0, len(clips), cfg.clips_per_step):
            lr = lr_schedule(self.step, self.total_steps, cfg)
            loss = self._batch_loss(clips[start : start + cfg.clips_per_step])
            loss.backward()
            grads = {
                name: param.grad if param.grad is not None else np.zeros_like(param.data)
                for name, param in params.items()
            }
            adam_step(params, grads, self.optimizer, lr)
            self.network.zero_grad()
            losses.append(loss.item())
            self.step += 1
        self.epoch += 1

        val_dice: float | None = None
        val_corr: float | None = None
        if self._val:
            result = evaluate_network(self.network, self._val, cfg.block.enabled_scan_modes)
            val_dice, val_corr = result.segmentation.dice, result.corr
        record = EpochRecord(
            epoch=self.epoch,
            step=self.step,
            lr=lr,
            loss=float(np.mean(losses)),
            val_dice=val_dice,
            val_ef_corr=val_corr,
            skipped=self.optimizer.skipped,
        )
        self.history.append(record)
        write_train_log(cfg.log_path, self.history)
        self._save()
        self._logger.info(
            "train epoch done epoch=%s step=%s lr=%s loss=%s val_dice=%s val_ef_corr=%s",
            record.epoch,
            record.step,
            record.lr,
            record.loss,
            record.val_dice,
            record.val_ef_corr,
        )

    def _save(self) -> None:
        save_checkpoint(
            self._config.checkpoint_dir,
            self.network,
            epoch=self.epoch,
            step=self.step,
            extra=self.optimizer.to_tensors(),
            metadata={
                "seed": self._config.seed,
                "adam_step": self.optimizer.step,
                "adam_skipped": self.optimizer.skipped,
            },
        )

    def _resume(self) -> None:
        stored = load_checkpoint(self._config.checkpoint_dir)
        check_compatible(stored, self._config.block)
        try:
            seed = int(stored.metadata.get("seed", self._config.seed))
            adam_count = int(stored.metadata.get("adam_step", stored.step))
            skipped = int(stored.metadata.get("adam_skipped", 0))
        except ValueError as exc:
            raise CheckpointError(f"bad run metadata: {exc}") from exc
        if seed != self._config.seed:
            raise CheckpointError(f"checkpoint seed={seed} differs from config seed")
        self.network.load_state_dict(stored.state)
        self.optimizer = AdamState.from_tensors(stored.extra, step=adam_count, skipped=skipped)
        self.epoch, self.step = stored.epoch, stored.step
        self.history = [
            record
            for record in read_train_log(self._config.log_path)
            if record.epoch <= self.epoch
        ]
        write_train_log(self._config.log_path, self.history)
        self._logger.info("train resumed epoch=%s step=%s", self.epoch, self.step)

    def _set_state(self, state: TrainState, reason: str) -> None:
        if self._state == state:
            return
        self._logger.info(
            "train state change from=%s to=%s reason=%s",
            self._state.value,
            state.value,
            reason,
        )
        self._state = state


def load_records(config: TrainConfig) -> list[ClipRecord]:
    """Clips from ``data_dir`` when set, otherwise a freshly synthesized corpus."""
    if config.data_dir is not None:
        return ClipRepository.open(config.data_dir).load_all()
    return generate_corpus(
        config.synth, config.corpus_size, config.seed, workers=config.workers
    )


def train(
    config: TrainConfig,
    records: Sequence[ClipRecord] | None = None,
    *,
    resume: bool = False,
) -> TrainResult:
    records = list(records) if records is not None else load_records(config)
    if not records:
        raise DataError("data source is empty")
    train_split, val_split, test_split = split_corpus(records, config.split)
    logging.getLogger(__name__).info(
        "train data split train=%s val=%s test=%s",
        len(train_split),
        len(val_split),
        len(test_split),
    )
    trainer = Trainer(config, train_split, val_split)
    history = trainer.run(resume=resume)
    return TrainResult(
        checkpoint=config.checkpoint_dir,
        log_path=config.log_path,
        history=history,
        train=train_split,
        val=val_split,
        test=test_split,
    )
