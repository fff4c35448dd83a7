from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass
import logging
from typing import Any, Callable, Iterator, Sequence

import numpy as np

from ..errors import GraphError, NonFiniteError, ShapeError

logger = logging.getLogger(__name__)

ArrayLike = Any
BackwardFn = Callable[[np.ndarray], Sequence["np.ndarray | None"]]

_GRAD_ENABLED = True


@contextmanager
def no_grad() -> Iterator[None]:
    """Run forward computations without recording them on the tape."""
    global _GRAD_ENABLED
    previous = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = previous


def grad_enabled() -> bool:
    return _GRAD_ENABLED


@dataclass(eq=False)
class Node:
    op: str
    parents: tuple["Tensor", ...]
    backward: BackwardFn


class Tensor:
    """Dense float64 array with an optional gradient buffer.

    Leaves created with ``requires_grad=True`` start with a zero gradient, so a leaf that
    never reaches a loss still reports ``grad`` as zeros after ``backward``.
    """

    __slots__ = ("_data", "grad", "requires_grad", "_node")

    def __init__(
        self,
        data: ArrayLike,
        requires_grad: bool = False,
        *,
        _node: Node | None = None,
        _copy: bool = True,
    ) -> None:
        array = np.array(data, dtype=np.float64) if _copy else np.asarray(data, dtype=np.float64)
        if not np.all(np.isfinite(array)):
            op = _node.op if _node is not None else "constructor"
            raise NonFiniteError(f"non-finite values produced by {op} shape={array.shape}")
        self._data = array
        self.requires_grad = bool(requires_grad)
        self._node = _node
        self.grad: np.ndarray | None = (
            np.zeros_like(array) if self.requires_grad and _node is None else None
        )

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self._data.shape)

    @property
    def ndim(self) -> int:
        return int(self._data.ndim)

    @property
    def size(self) -> int:
        return int(self._data.size)

    @property
    def is_leaf(self) -> bool:
        return self._node is None

    def numpy(self) -> np.ndarray:
        return self._data.copy()

    def item(self) -> float:
        if self.size != 1:
            raise ShapeError(f"item() needs a single element, got shape={self.shape}")
        return float(self._data.reshape(-1)[0])

    def detach(self) -> "Tensor":
        return Tensor(self._data)

    def assign(self, values: ArrayLike) -> None:
        """Replace a leaf's values; used by optimizers and checkpoint loading."""
        if not self.is_leaf:
            raise GraphError("only leaf tensors can be assigned")
        array = np.array(values, dtype=np.float64)
        if array.shape != self._data.shape:
            raise ShapeError(f"assign shape {array.shape} does not match {self._data.shape}")
        if not np.all(np.isfinite(array)):
            raise NonFiniteError("assign received non-finite values")
        self._data = array

    def zero_grad(self) -> None:
        if self.requires_grad and self.is_leaf:
            self.grad = np.zeros_like(self._data)

    def backward(self) -> None:
        backward(self)

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{flag})"

    def __len__(self) -> int:
        return self.shape[0] if self.shape else 0

    def __add__(self, other: ArrayLike) -> "Tensor":
        from . import ops

        return ops.add(self, other)

    def __radd__(self, other: ArrayLike) -> "Tensor":
        from . import ops

        return ops.add(other, self)

    def __sub__(self, other: ArrayLike) -> "Tensor":
        from . import ops

        return ops.sub(self, other)

    def __rsub__(self, other: ArrayLike) -> "Tensor":
        from . import ops

        return ops.sub(other, self)

    def __mul__(self, other: ArrayLike) -> "Tensor":
        from . import ops

        return ops.mul(self, other)

    def __rmul__(self, other: ArrayLike) -> "Tensor":
        from . import ops

        return ops.mul(other, self)

    def __truediv__(self, other: ArrayLike) -> "Tensor":
        from . import ops

        return ops.div(self, other)

    def __neg__(self) -> "Tensor":
        from . import ops

        return ops.neg(self)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        from . import ops

        return ops.matmul(self, other)

    def sum(self, axis: int | tuple[int, ...] | None = None, keepdims: bool = False) -> "Tensor":
        from . import ops

        return ops.sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis: int | tuple[int, ...] | None = None, keepdims: bool = False) -> "Tensor":
        from . import ops

        return ops.mean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape: int) -> "Tensor":
        from . import ops

        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return ops.reshape(self, shape)

    def transpose(self, *axes: int) -> "Tensor":
        from . import ops

        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return ops.transpose(self, axes or None)


def as_tensor(value: ArrayLike) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def record(
    op: str,
    data: np.ndarray,
    parents: Sequence[Tensor],
    backward_fn: BackwardFn,
) -> Tensor:
    """Wrap a forward result and, when any parent needs gradients, put it on the tape.

    ``backward_fn`` receives the output gradient and returns one gradient per parent
    (``None`` for parents that need none).
    """
    needs_grad = _GRAD_ENABLED and any(parent.requires_grad for parent in parents)
    if not needs_grad:
        return Tensor(data, _copy=False)
    node = Node(op=op, parents=tuple(parents), backward=backward_fn)
    return Tensor(data, requires_grad=True, _node=node, _copy=False)


def _topological_order(root: Tensor) -> list[Tensor]:
    order: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        tensor, expanded = stack.pop()
        if expanded:
            order.append(tensor)
            continue
        if id(tensor) in visited:
            continue
        visited.add(id(tensor))
        stack.append((tensor, True))
        node = tensor._node
        if node is None:
            continue
        for parent in node.parents:
            if parent.requires_grad and id(parent) not in visited:
                stack.append((parent, False))
    return order


def backward(loss: Tensor) -> None:
    """Reverse-mode sweep from a scalar loss; leaf gradients accumulate additively."""
    if loss.size != 1:
        raise GraphError(f"backward needs a scalar loss, got shape={loss.shape}")
    if not loss.requires_grad:
        raise GraphError("loss is not on the recorded graph")
    order = _topological_order(loss)
    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    for tensor in reversed(order):
        grad = grads.pop(id(tensor), None)
        if grad is None:
            continue
        node = tensor._node
        if node is None:
            if tensor.grad is None:
                tensor.grad = np.zeros_like(tensor.data)
            tensor.grad = tensor.grad + grad
            continue
        parent_grads = node.backward(grad)
        if len(parent_grads) != len(node.parents):
            raise GraphError(f"{node.op} returned {len(parent_grads)} grads")
        for parent, parent_grad in zip(node.parents, parent_grads):
            if parent_grad is None or not parent.requires_grad:
                continue
            if parent_grad.shape != parent.data.shape:
                raise GraphError(
                    f"{node.op} produced grad shape {parent_grad.shape} for {parent.data.shape}"
                )
            key = id(parent)
            if key in grads:
                grads[key] = grads[key] + parent_grad
            else:
                grads[key] = parent_grad
