from __future__ import annotations

from dataclasses import dataclass, field
import logging
from pathlib import Path
from typing import Mapping

import numpy as np

from ..errors import CheckpointError, ConfigError
from ..settings import open_settings, read_int, read_list, read_str, write_values
from ..tensor import load_tensors, save_tensors
from .config import BlockConfig, load_block_settings, save_block_settings
from .network import HSSNet

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
MANIFEST_NAME = "manifest.txt"
TENSORS_NAME = "tensors.bin"
METADATA_PREFIX = "run/"


@dataclass(frozen=True)
class Checkpoint:
    config: BlockConfig
    state: dict[str, np.ndarray]
    extra: dict[str, np.ndarray] = field(default_factory=dict)
    epoch: int = 0
    step: int = 0
    metadata: dict[str, str] = field(default_factory=dict)


def save_checkpoint(
    path: str | Path,
    network: HSSNet,
    *,
    epoch: int = 0,
    step: int = 0,
    extra: Mapping[str, np.ndarray] | None = None,
    metadata: Mapping[str, object] | None = None,
) -> Path:
    """Write ``manifest.txt`` and ``tensors.bin`` into the checkpoint directory.

    Tensors are stored in manifest order: network parameters first, then ``extra``
    (optimizer moments and the like).
    """
    directory = Path(path)
    directory.mkdir(parents=True, exist_ok=True)
    state = network.state_dict()
    extra = dict(extra or {})
    clash = set(state) & set(extra)
    if clash:
        raise CheckpointError(f"extra tensor names clash with parameters: {sorted(clash)[:3]}")
    names = list(state) + list(extra)
    save_tensors(directory / TENSORS_NAME, [*state.values(), *extra.values()])

    manifest = directory / MANIFEST_NAME
    manifest.unlink(missing_ok=True)
    settings = open_settings(manifest)
    write_values(
        settings,
        {
            "format_version": FORMAT_VERSION,
            "epoch": epoch,
            "step": step,
            "parameter_count": len(state),
            "tensor_names": names,
        },
    )
    save_block_settings(settings, network.config)
    for key, value in (metadata or {}).items():
        write_values(settings, {f"{METADATA_PREFIX}{key}": value})
    settings.sync()
    logger.info(
        "checkpoint saved path=%s epoch=%s step=%s tensors=%s", directory, epoch, step, len(names)
    )
    return directory


def load_checkpoint(path: str | Path) -> Checkpoint:
    directory = Path(path)
    manifest = directory / MANIFEST_NAME
    tensors_path = directory / TENSORS_NAME
    if not manifest.is_file() or not tensors_path.is_file():
        raise CheckpointError(f"checkpoint incomplete at {directory}")
    settings = open_settings(manifest)
    try:
        version = read_int(settings, "format_version", 0)
        config = load_block_settings(settings)
        epoch = read_int(settings, "epoch", 0, minimum=0)
        step = read_int(settings, "step", 0, minimum=0)
        parameter_count = read_int(settings, "parameter_count", 0, minimum=0)
    except ConfigError as exc:
        raise CheckpointError(f"bad manifest {manifest}: {exc}") from exc
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint format_version={version}")
    names = read_list(settings, "tensor_names", [])
    arrays = load_tensors(tensors_path)
    if len(arrays) != len(names) or parameter_count > len(names):
        raise CheckpointError(
            f"manifest lists {len(names)} tensors but {len(arrays)} were stored"
        )
    settings.beginGroup(METADATA_PREFIX.rstrip("/"))
    metadata = {key: read_str(settings, key, "") for key in settings.childKeys()}
    settings.endGroup()
    pairs = list(zip(names, arrays))
    logger.info("checkpoint loaded path=%s epoch=%s step=%s", directory, epoch, step)
    return Checkpoint(
        config=config,
        state=dict(pairs[:parameter_count]),
        extra=dict(pairs[parameter_count:]),
        epoch=epoch,
        step=step,
        metadata=metadata,
    )


def restore_network(checkpoint: Checkpoint) -> HSSNet:
    network = HSSNet(checkpoint.config, rng=0)
    network.load_state_dict(checkpoint.state)
    return network


def check_compatible(checkpoint: Checkpoint, config: BlockConfig) -> None:
    """Parameter layout must match; scan modes may differ since they hold no weights."""
    stored = checkpoint.config
    for name in (
        "channels",
        "encoder_blocks",
        "decoder_blocks",
        "ffn_ratio",
        "conv_ratio",
        "stage_types",
        "d_state",
        "share_direction_params",
    ):
        if getattr(stored, name) != getattr(config, name):
            raise CheckpointError(
                f"checkpoint {name}={getattr(stored, name)} does not match {getattr(config, name)}"
            )
