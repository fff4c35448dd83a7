from __future__ import annotations

import numpy as np

from ..errors import NonFiniteError, ShapeError
from ..tensor import Tensor, record
from ..tensor import ops
from .params import SSMParams


def scan_states(
    delta: np.ndarray,
    a: np.ndarray,
    b: np.ndarray,
    x: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Hidden states ``h[L, C, N]`` and decays ``exp(delta*A)`` for a ``[L, C]`` input."""
    decay = np.exp(delta[:, :, None] * a[None, :, :])
    drive = delta[:, :, None] * b[:, None, :] * x[:, :, None]
    states = np.empty_like(drive)
    h = np.zeros(drive.shape[1:])
    for k in range(drive.shape[0]):
        h = decay[k] * h + drive[k]
        states[k] = h
    if not np.all(np.isfinite(states)):
        raise NonFiniteError("selective scan produced a non-finite state")
    return states, decay


def scan_recurrence(delta: Tensor, a: Tensor, b: Tensor, c: Tensor, x: Tensor) -> Tensor:
    """``y_k = sum_n C_k[n] h_k[n]`` with ``h_k = exp(delta_k A) h_{k-1} + delta_k B_k x_k``.

    Shapes: delta, x ``[L, C]``; a ``[C, N]``; b, c ``[L, N]``. Returns ``[L, C]``.
    """
    length, channels = x.shape
    if delta.shape != (length, channels) or a.shape[0] != channels:
        raise ShapeError(f"scan shapes disagree: delta={delta.shape} a={a.shape} x={x.shape}")
    if b.shape != (length, a.shape[1]) or c.shape != b.shape:
        raise ShapeError(f"scan B/C shapes {b.shape}/{c.shape} do not match L={length}")
    states, decay = scan_states(delta.data, a.data, b.data, x.data)
    out = np.einsum("lcn,ln->lc", states, c.data)

    def _backward(grad: np.ndarray) -> tuple[np.ndarray, ...]:
        grad_c = np.einsum("lc,lcn->ln", grad, states)
        grad_h = np.empty_like(states)
        carry = np.zeros(states.shape[1:])
        for k in range(length - 1, -1, -1):
            carry = grad[k][:, None] * c.data[k][None, :] + carry
            grad_h[k] = carry
            carry = carry * decay[k]
        previous = np.concatenate([np.zeros_like(states[:1]), states[:-1]], axis=0)
        grad_decay = grad_h * previous * decay
        grad_drive = grad_h * delta.data[:, :, None]
        grad_delta = np.einsum("lcn,cn->lc", grad_decay, a.data) + np.einsum(
            "lcn,ln->lc", grad_h, b.data
        ) * x.data
        grad_a = np.einsum("lcn,lc->cn", grad_decay, delta.data)
        grad_b = np.einsum("lcn,lc->ln", grad_drive, x.data)
        grad_x = np.einsum("lcn,ln->lc", grad_drive, b.data)
        return grad_delta, grad_a, grad_b, grad_c, grad_x

    return record("selective_scan", out, (delta, a, b, c, x), _backward)


def discretize(params: SSMParams, xt: Tensor) -> tuple[Tensor, Tensor, Tensor, Tensor]:
    """Input-dependent ``delta [L, C]``, ``A [C, N]``, ``B [L, N]``, ``C [L, N]``."""
    low_rank = ops.linear(xt, params.W_delta_rank)
    delta = ops.softplus(ops.linear(low_rank, params.W_delta, params.delta_bias))
    a = ops.neg(ops.exp(params.A_log))
    return delta, a, ops.linear(xt, params.W_B), ops.linear(xt, params.W_C)


def selective_scan(params: SSMParams, x: Tensor) -> Tensor:
    """S6 transform of a ``[C, L]`` sequence, including the ``D`` skip path."""
    if x.ndim != 2 or x.shape[0] != params.d_model or x.shape[1] < 1:
        raise ShapeError(f"selective_scan expects [{params.d_model}, L>=1], got {x.shape}")
    xt = ops.transpose(x)
    delta, a, b, c = discretize(params, xt)
    y = scan_recurrence(delta, a, b, c, xt)
    y = ops.add(y, ops.mul(xt, params.D))
    return ops.transpose(y)
