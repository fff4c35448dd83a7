from __future__ import annotations

from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import special

from ..errors import ShapeError
from .core import ArrayLike, Tensor, as_tensor, record

Axis = int | tuple[int, ...] | None

SOFTPLUS_LINEAR_THRESHOLD = 30.0


def broadcast_shape(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    """Result shape when one operand is a leading-singleton extension of the other.

    Broadcasting is limited to missing or size-1 *leading* extents: after dropping its
    leading ones, the smaller operand's shape must equal the trailing part of the other's.
    """
    if a == b:
        return a
    small, large = (a, b) if len(_strip_leading_ones(a)) <= len(_strip_leading_ones(b)) else (b, a)
    core = _strip_leading_ones(small)
    if core and tuple(large[len(large) - len(core):]) != core:
        raise ShapeError(f"incompatible shapes {a} and {b}")
    if len(small) > len(large):
        return tuple(small[: len(small) - len(large)]) + tuple(large)
    return tuple(large)


def _strip_leading_ones(shape: tuple[int, ...]) -> tuple[int, ...]:
    index = 0
    while index < len(shape) and shape[index] == 1:
        index += 1
    return tuple(shape[index:])


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if grad.shape == shape:
        return grad
    core = _strip_leading_ones(shape)
    extra = grad.ndim - len(core)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    return grad.reshape(shape)


def _binary(
    a: ArrayLike, b: ArrayLike
) -> tuple[Tensor, Tensor, tuple[int, ...]]:
    ta, tb = as_tensor(a), as_tensor(b)
    return ta, tb, broadcast_shape(ta.shape, tb.shape)


def add(a: ArrayLike, b: ArrayLike) -> Tensor:
    ta, tb, shape = _binary(a, b)
    out = (ta.data + tb.data).reshape(shape)

    def _backward(grad: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return _unbroadcast(grad, ta.shape), _unbroadcast(grad, tb.shape)

    return record("add", out, (ta, tb), _backward)


def sub(a: ArrayLike, b: ArrayLike) -> Tensor:
    ta, tb, shape = _binary(a, b)
    out = (ta.data - tb.data).reshape(shape)

    def _backward(grad: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return _unbroadcast(grad, ta.shape), _unbroadcast(-grad, tb.shape)

    return record("sub", out, (ta, tb), _backward)


def mul(a: ArrayLike, b: ArrayLike) -> Tensor:
    ta, tb, shape = _binary(a, b)
    out = (ta.data * tb.data).reshape(shape)

    def _backward(grad: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return (
            _unbroadcast(grad * tb.data, ta.shape),
            _unbroadcast(grad * ta.data, tb.shape),
        )

    return record("mul", out, (ta, tb), _backward)


def div(a: ArrayLike, b: ArrayLike) -> Tensor:
    ta, tb, shape = _binary(a, b)
    out = (ta.data / tb.data).reshape(shape)

    def _backward(grad: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return (
            _unbroadcast(grad / tb.data, ta.shape),
            _unbroadcast(-grad * ta.data / (tb.data * tb.data), tb.shape),
        )

    return record("div", out, (ta, tb), _backward)


def neg(x: ArrayLike) -> Tensor:
    tx = as_tensor(x)
    return record("neg", -tx.data, (tx,), lambda grad: (-grad,))


def exp(x: ArrayLike) -> Tensor:
    tx = as_tensor(x)
    out = np.exp(tx.data)
    return record("exp", out, (tx,), lambda grad: (grad * out,))


def log(x: ArrayLike) -> Tensor:
    tx = as_tensor(x)
    if np.any(tx.data <= 0.0):
        raise ShapeError("log needs strictly positive input")
    out = np.log(tx.data)
    return record("log", out, (tx,), lambda grad: (grad / tx.data,))


def sigmoid(x: ArrayLike) -> Tensor:
    tx = as_tensor(x)
    out = special.expit(tx.data)
    return record("sigmoid", out, (tx,), lambda grad: (grad * out * (1.0 - out),))


def silu(x: ArrayLike) -> Tensor:
    tx = as_tensor(x)
    gate = special.expit(tx.data)
    out = tx.data * gate

    def _backward(grad: np.ndarray) -> tuple[np.ndarray]:
        return (grad * (gate + tx.data * gate * (1.0 - gate)),)

    return record("silu", out, (tx,), _backward)


def softplus(x: ArrayLike) -> Tensor:
    tx = as_tensor(x)
    capped = np.minimum(tx.data, SOFTPLUS_LINEAR_THRESHOLD)
    out = np.where(
        tx.data > SOFTPLUS_LINEAR_THRESHOLD,
        tx.data,
        np.log1p(np.exp(capped)),
    )
    return record("softplus", out, (tx,), lambda grad: (grad * special.expit(tx.data),))


def clamp(x: ArrayLike, low: float, high: float) -> Tensor:
    tx = as_tensor(x)
    out = np.clip(tx.data, low, high)
    inside = (tx.data >= low) & (tx.data <= high)
    return record("clamp", out, (tx,), lambda grad: (grad * inside,))


def _normalize_axis(axis: Axis, ndim: int) -> tuple[int, ...]:
    if axis is None:
        return tuple(range(ndim))
    axes = (axis,) if isinstance(axis, int) else tuple(axis)
    return tuple(a % ndim for a in axes)


def sum(x: ArrayLike, axis: Axis = None, keepdims: bool = False) -> Tensor:  # noqa: A001
    tx = as_tensor(x)
    axes = _normalize_axis(axis, tx.ndim)
    out = np.sum(tx.data, axis=axes, keepdims=keepdims)

    def _backward(grad: np.ndarray) -> tuple[np.ndarray]:
        if not keepdims:
            grad = np.expand_dims(grad, axes)
        return (np.broadcast_to(grad, tx.shape).copy(),)

    return record("sum", np.asarray(out), (tx,), _backward)


def mean(x: ArrayLike, axis: Axis = None, keepdims: bool = False) -> Tensor:
    tx = as_tensor(x)
    axes = _normalize_axis(axis, tx.ndim)
    count = int(np.prod([tx.shape[a] for a in axes])) if axes else 1
    return mul(sum(tx, axis=axes, keepdims=keepdims), 1.0 / count)


def reshape(x: ArrayLike, shape: Sequence[int]) -> Tensor:
    tx = as_tensor(x)
    try:
        out = tx.data.reshape(tuple(shape))
    except ValueError as exc:
        raise ShapeError(f"cannot reshape {tx.shape} to {tuple(shape)}") from exc
    return record("reshape", out, (tx,), lambda grad: (grad.reshape(tx.shape),))


def transpose(x: ArrayLike, axes: Sequence[int] | None = None) -> Tensor:
    tx = as_tensor(x)
    order = tuple(reversed(range(tx.ndim))) if axes is None else tuple(axes)
    inverse = tuple(np.argsort(order))
    out = np.transpose(tx.data, order)
    return record("transpose", out, (tx,), lambda grad: (np.transpose(grad, inverse),))


def take(x: ArrayLike, indices: Sequence[int] | np.ndarray, axis: int) -> Tensor:
    """Gather along ``axis``; repeated indices accumulate in the backward pass."""
    tx = as_tensor(x)
    index = np.asarray(indices, dtype=np.int64)
    axis = axis % tx.ndim
    if index.size and (index.min() < -tx.shape[axis] or index.max() >= tx.shape[axis]):
        raise ShapeError(f"index out of range for axis {axis} of {tx.shape}")
    out = np.take(tx.data, index, axis=axis)

    def _backward(grad: np.ndarray) -> tuple[np.ndarray]:
        full = np.zeros_like(tx.data)
        np.add.at(np.moveaxis(full, axis, 0), index, np.moveaxis(grad, axis, 0))
        return (full,)

    return record("take", out, (tx,), _backward)


def matmul(a: ArrayLike, b: ArrayLike) -> Tensor:
    """``a[..., K] @ b[K, M]``; the right operand is always a matrix."""
    ta, tb = as_tensor(a), as_tensor(b)
    if tb.ndim != 2 or ta.ndim < 1 or ta.shape[-1] != tb.shape[0]:
        raise ShapeError(f"matmul shapes {ta.shape} and {tb.shape} are incompatible")
    out = ta.data @ tb.data

    def _backward(grad: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        grad_a = grad @ tb.data.T
        flat_a = ta.data.reshape(-1, ta.shape[-1])
        flat_g = grad.reshape(-1, tb.shape[1])
        return grad_a, flat_a.T @ flat_g

    return record("matmul", out, (ta, tb), _backward)


def linear(x: ArrayLike, weight: Tensor, bias: Tensor | None = None) -> Tensor:
    """Affine map over the last axis with ``weight`` laid out as ``[out, in]``."""
    out = matmul(x, transpose(weight))
    if bias is not None:
        out = add(out, bias)
    return out


def layer_norm(
    x: ArrayLike,
    normalized_extent: int,
    gamma: ArrayLike,
    beta: ArrayLike,
    eps: float = 1e-5,
) -> Tensor:
    tx, tg, tb = as_tensor(x), as_tensor(gamma), as_tensor(beta)
    if normalized_extent <= 0 or tx.ndim == 0 or tx.shape[-1] == 0:
        raise ShapeError("layer_norm needs a non-empty normalization axis")
    if tx.shape[-1] != normalized_extent:
        raise ShapeError(f"last extent {tx.shape[-1]} != normalized_extent {normalized_extent}")
    if tg.shape != (normalized_extent,) or tb.shape != (normalized_extent,):
        raise ShapeError("gamma and beta must have shape [normalized_extent]")
    centered = tx.data - tx.data.mean(axis=-1, keepdims=True)
    variance = (centered * centered).mean(axis=-1, keepdims=True)
    denom = variance + eps
    rstd = np.divide(1.0, np.sqrt(denom), out=np.zeros_like(denom), where=denom > 0.0)
    xhat = centered * rstd
    out = xhat * tg.data + tb.data
    lead = tuple(range(tx.ndim - 1))

    def _backward(grad: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        gxhat = grad * tg.data
        grad_x = rstd * (
            gxhat
            - gxhat.mean(axis=-1, keepdims=True)
            - xhat * (gxhat * xhat).mean(axis=-1, keepdims=True)
        )
        return grad_x, (grad * xhat).sum(axis=lead), grad.sum(axis=lead)

    return record("layer_norm", out, (tx, tg, tb), _backward)


def upsample_nearest(x: ArrayLike, factor: int) -> Tensor:
    tx = as_tensor(x)
    if tx.ndim != 4 or factor < 1:
        raise ShapeError(f"upsample_nearest needs [N,C,H,W] and factor >= 1, got {tx.shape}")
    out = np.repeat(np.repeat(tx.data, factor, axis=2), factor, axis=3)
    n, c, h, w = tx.shape

    def _backward(grad: np.ndarray) -> tuple[np.ndarray]:
        return (grad.reshape(n, c, h, factor, w, factor).sum(axis=(3, 5)),)

    return record("upsample_nearest", out, (tx,), _backward)


def conv2d(
    x: ArrayLike,
    kernel: ArrayLike,
    bias: ArrayLike | None = None,
    stride: int = 1,
    padding: int = 0,
    groups: int = 1,
) -> Tensor:
    """Grouped 2-D cross-correlation over ``[N, C, H, W]`` inputs."""
    tx, tk = as_tensor(x), as_tensor(kernel)
    tb = as_tensor(bias) if bias is not None else None
    if stride <= 0:
        raise ShapeError(f"stride must be positive, got {stride}")
    if padding < 0 or groups <= 0:
        raise ShapeError("padding must be >= 0 and groups > 0")
    if tx.ndim != 4 or tk.ndim != 4:
        raise ShapeError(f"conv2d needs 4-D input and kernel, got {tx.shape} and {tk.shape}")
    n, channels, height, width = tx.shape
    out_channels, in_per_group, kh, kw = tk.shape
    if in_per_group * groups != channels or out_channels % groups != 0:
        raise ShapeError(
            f"kernel {tk.shape} with groups={groups} does not fit {channels} input channels"
        )
    if tb is not None and tb.shape != (out_channels,):
        raise ShapeError(f"bias shape {tb.shape} != ({out_channels},)")
    padded_h, padded_w = height + 2 * padding, width + 2 * padding
    if kh > padded_h or kw > padded_w:
        raise ShapeError(f"kernel {kh}x{kw} exceeds padded input {padded_h}x{padded_w}")
    out_h = (padded_h - kh) // stride + 1
    out_w = (padded_w - kw) // stride + 1
    out_per_group = out_channels // groups
    xp = np.pad(tx.data, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    depthwise = in_per_group == 1 and out_per_group == 1

    def _tap(array: np.ndarray, i: int, j: int) -> np.ndarray:
        rows = slice(i, i + stride * (out_h - 1) + 1, stride)
        cols = slice(j, j + stride * (out_w - 1) + 1, stride)
        return array[:, :, rows, cols]

    if depthwise:
        weights = tk.data[:, 0]
        out = np.zeros((n, out_channels, out_h, out_w))
        for i in range(kh):
            for j in range(kw):
                out += _tap(xp, i, j) * weights[:, i, j][None, :, None, None]
        windows = None
    else:
        windows = sliding_window_view(xp, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
        grouped = windows.reshape(n, groups, in_per_group, out_h, out_w, kh, kw)
        kernel_g = tk.data.reshape(groups, out_per_group, in_per_group, kh, kw)
        out = np.einsum("ngchwij,gocij->ngohw", grouped, kernel_g, optimize=True)
        out = out.reshape(n, out_channels, out_h, out_w)
    if tb is not None:
        out = out + tb.data[None, :, None, None]

    def _backward(grad: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
        grad_xp = np.zeros_like(xp)
        if depthwise:
            grad_k = np.zeros_like(tk.data)
            for i in range(kh):
                for j in range(kw):
                    grad_k[:, 0, i, j] = np.sum(grad * _tap(xp, i, j), axis=(0, 2, 3))
                    _tap(grad_xp, i, j)[...] += grad * weights[:, i, j][None, :, None, None]
        else:
            assert windows is not None
            grouped_grad = grad.reshape(n, groups, out_per_group, out_h, out_w)
            grouped_x = windows.reshape(n, groups, in_per_group, out_h, out_w, kh, kw)
            kernel_g = tk.data.reshape(groups, out_per_group, in_per_group, kh, kw)
            grad_k = np.einsum(
                "ngohw,ngchwij->gocij", grouped_grad, grouped_x, optimize=True
            ).reshape(tk.shape)
            grad_windows = np.einsum(
                "ngohw,gocij->ngchwij", grouped_grad, kernel_g, optimize=True
            ).reshape(n, channels, out_h, out_w, kh, kw)
            for i in range(kh):
                for j in range(kw):
                    _tap(grad_xp, i, j)[...] += grad_windows[..., i, j]
        grad_x = grad_xp[:, :, padding : padding + height, padding : padding + width]
        grad_b = grad.sum(axis=(0, 2, 3)) if tb is not None else None
        return grad_x, grad_k, grad_b

    parents: tuple[Tensor, ...] = (tx, tk) if tb is None else (tx, tk, tb)

    def _dispatch(grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        grads = _backward(grad)
        return grads if tb is not None else grads[:2]

    return record("conv2d", out, parents, _dispatch)
