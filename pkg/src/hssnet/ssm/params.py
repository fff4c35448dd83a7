from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..errors import ShapeError
from ..tensor import Module, Tensor, parameter, uniform_init

DEFAULT_D_STATE = 8
DT_MIN = 1e-3
DT_MAX = 1e-1


@dataclass(eq=False)
class SSMParams(Module):
    """Selective state-space parameters for one scan direction.

    ``A = -exp(A_log)`` is a negative real diagonal. ``W_delta_rank`` and ``W_delta``
    form the low-rank step projection; ``delta_bias`` keeps ``softplus`` output in the
    intended step range at initialization.
    """

    d_model: int
    d_state: int
    A_log: Tensor
    D: Tensor
    W_delta_rank: Tensor
    W_delta: Tensor
    delta_bias: Tensor
    W_B: Tensor
    W_C: Tensor

    def __post_init__(self) -> None:
        c, n = self.d_model, self.d_state
        rank = self.W_delta_rank.shape[0]
        expected = {
            "A_log": (c, n),
            "D": (c,),
            "W_delta_rank": (rank, c),
            "W_delta": (c, rank),
            "delta_bias": (c,),
            "W_B": (n, c),
            "W_C": (n, c),
        }
        for name, shape in expected.items():
            actual = getattr(self, name).shape
            if actual != shape:
                raise ShapeError(f"SSMParams.{name} has shape {actual}, expected {shape}")

    @property
    def delta_rank(self) -> int:
        return self.W_delta_rank.shape[0]

    def replace(self, **changes: object) -> "SSMParams":
        return replace(self, **changes)


def delta_rank_for(d_model: int) -> int:
    return max(1, d_model // 16)


def inverse_softplus(values: np.ndarray) -> np.ndarray:
    return values + np.log(-np.expm1(-values))


def init_ssm_params(
    d_model: int,
    rng: np.random.Generator,
    d_state: int = DEFAULT_D_STATE,
) -> SSMParams:
    rank = delta_rank_for(d_model)
    a_log = np.tile(np.log(np.arange(1, d_state + 1, dtype=np.float64)), (d_model, 1))
    dt = np.exp(rng.uniform(np.log(DT_MIN), np.log(DT_MAX), size=d_model))
    return SSMParams(
        d_model=d_model,
        d_state=d_state,
        A_log=parameter(a_log),
        D=parameter(np.ones(d_model)),
        W_delta_rank=uniform_init(rng, (rank, d_model), d_model),
        W_delta=uniform_init(rng, (d_model, rank), rank),
        delta_bias=parameter(inverse_softplus(dt)),
        W_B=uniform_init(rng, (d_state, d_model), d_model),
        W_C=uniform_init(rng, (d_state, d_model), d_model),
    )
