from __future__ import annotations

from dataclasses import dataclass, field
import logging
import math
from typing import Mapping, Protocol

import numpy as np

from ..errors import ConfigError, ShapeError
from ..tensor import Tensor

logger = logging.getLogger(__name__)

BETA1 = 0.9
BETA2 = 0.999
EPS = 1e-8
MOMENT_PREFIX = "adam.m."
VARIANCE_PREFIX = "adam.v."


class LRBounds(Protocol):
    lr_max: float
    lr_min: float


def lr_schedule(step: int, total_steps: int, cfg: LRBounds) -> float:
    """Cosine annealing from ``lr_max`` at step 0 to ``lr_min`` at ``total_steps``."""
    if total_steps <= 0:
        raise ConfigError(f"total_steps must be positive, got {total_steps}")
    if not 0 <= step <= total_steps:
        raise ConfigError(f"step {step} outside [0, {total_steps}]")
    if step == 0:
        return cfg.lr_max
    if step == total_steps:
        return cfg.lr_min
    cosine = 1.0 + math.cos(math.pi * step / total_steps)
    return cfg.lr_min + 0.5 * (cfg.lr_max - cfg.lr_min) * cosine


@dataclass
class AdamState:
    step: int = 0
    skipped: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)

    def to_tensors(self) -> dict[str, np.ndarray]:
        out = {f"{MOMENT_PREFIX}{name}": value for name, value in self.m.items()}
        out.update({f"{VARIANCE_PREFIX}{name}": value for name, value in self.v.items()})
        return out

    @classmethod
    def from_tensors(
        cls, tensors: Mapping[str, np.ndarray], step: int = 0, skipped: int = 0
    ) -> "AdamState":
        state = cls(step=step, skipped=skipped)
        for key, value in tensors.items():
            if key.startswith(MOMENT_PREFIX):
                state.m[key[len(MOMENT_PREFIX):]] = np.array(value, dtype=np.float64)
            elif key.startswith(VARIANCE_PREFIX):
                state.v[key[len(VARIANCE_PREFIX):]] = np.array(value, dtype=np.float64)
        return state


def adam_step(
    params: Mapping[str, Tensor],
    grads: Mapping[str, np.ndarray],
    state: AdamState,
    lr: float,
) -> bool:
    """One bias-corrected Adam update; returns ``False`` when the step was skipped.

    Any non-finite gradient skips the whole step and increments ``state.skipped``.
    """
    for name, param in params.items():
        grad = grads.get(name)
        if grad is None or grad.shape != param.shape:
            raise ShapeError(f"gradient for {name} missing or mis-shaped")
    if not all(np.all(np.isfinite(grads[name])) for name in params):
        state.skipped += 1
        logger.warning("adam step skipped; non-finite gradient skipped=%s", state.skipped)
        return False
    state.step += 1
    t = state.step
    correction1 = 1.0 - BETA1**t
    correction2 = 1.0 - BETA2**t
    for name, param in params.items():
        grad = grads[name]
        m = state.m.get(name)
        v = state.v.get(name)
        m = BETA1 * (m if m is not None else np.zeros_like(grad)) + (1.0 - BETA1) * grad
        v = BETA2 * (v if v is not None else np.zeros_like(grad)) + (1.0 - BETA2) * grad * grad
        state.m[name], state.v[name] = m, v
        update = lr * (m / correction1) / (np.sqrt(v / correction2) + EPS)
        param.assign(param.data - update)
    return True
