from __future__ import annotations

from typing import Iterator, Mapping

import numpy as np

from ..errors import CheckpointError
from .core import Tensor


class Module:
    """Container that discovers parameters from its public attributes.

    Parameters are leaf tensors with ``requires_grad``; nested modules and lists of modules
    are walked in attribute order, which fixes the checkpoint tensor order.
    """

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Tensor]]:
        for name, value in vars(self).items():
            if name.startswith("_"):
                continue
            yield from _walk(f"{prefix}{name}", value)

    def parameters(self) -> list[Tensor]:
        return [tensor for _, tensor in self.named_parameters()]

    def zero_grad(self) -> None:
        for tensor in self.parameters():
            tensor.zero_grad()

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: tensor.numpy() for name, tensor in self.named_parameters()}

    def load_state_dict(self, state: Mapping[str, np.ndarray]) -> None:
        params = dict(self.named_parameters())
        missing = sorted(set(params) - set(state))
        unexpected = sorted(set(state) - set(params))
        if missing or unexpected:
            raise CheckpointError(
                f"state mismatch missing={missing[:5]} unexpected={unexpected[:5]}"
            )
        for name, tensor in params.items():
            if tuple(state[name].shape) != tensor.shape:
                raise CheckpointError(
                    f"shape mismatch for {name}: {tuple(state[name].shape)} != {tensor.shape}"
                )
            tensor.assign(state[name])


def _walk(name: str, value: object) -> Iterator[tuple[str, Tensor]]:
    if isinstance(value, Tensor):
        if value.requires_grad and value.is_leaf:
            yield name, value
    elif isinstance(value, Module):
        yield from value.named_parameters(f"{name}.")
    elif isinstance(value, (list, tuple)):
        for index, item in enumerate(value):
            yield from _walk(f"{name}.{index}", item)


def parameter(values: np.ndarray) -> Tensor:
    return Tensor(values, requires_grad=True)


def uniform_init(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> Tensor:
    bound = 1.0 / np.sqrt(max(fan_in, 1))
    return parameter(rng.uniform(-bound, bound, size=shape))


def zeros_init(shape: tuple[int, ...]) -> Tensor:
    return parameter(np.zeros(shape))
