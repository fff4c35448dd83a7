from __future__ import annotations

from typing import Callable

import numpy as np

from ..errors import GraphError, NonFiniteError
from .core import Tensor, backward, no_grad

ScalarFn = Callable[[Tensor], Tensor]


def fd_check(f: ScalarFn, x: Tensor, h: float = 1e-5) -> float:
    """Largest relative disagreement between reverse-mode and central-difference gradients.

    Each coordinate's error is ``|analytic - numeric| / max(1, |analytic|)``.
    """
    probe = Tensor(x.data, requires_grad=True)
    out = f(probe)
    if out.size != 1:
        raise GraphError(f"fd_check needs a scalar-valued function, got shape={out.shape}")
    if out.requires_grad:
        backward(out)
    analytic = probe.grad if probe.grad is not None else np.zeros_like(probe.data)

    base = x.data
    numeric = np.zeros_like(base)
    with no_grad():
        for index in range(base.size):
            plus = base.copy()
            minus = base.copy()
            plus.flat[index] += h
            minus.flat[index] -= h
            upper = f(Tensor(plus)).item()
            lower = f(Tensor(minus)).item()
            if not (np.isfinite(upper) and np.isfinite(lower)):
                raise NonFiniteError(f"fd_check probe {index} produced a non-finite value")
            numeric.flat[index] = (upper - lower) / (2.0 * h)
    if base.size == 0:
        return 0.0
    error = np.abs(analytic - numeric) / np.maximum(1.0, np.abs(analytic))
    return float(error.max())
