from .core import Tensor, as_tensor, backward, grad_enabled, no_grad, record
from .gradcheck import fd_check
from .module import Module, parameter, uniform_init, zeros_init
from .serialization import load_tensors, read_tensor, save_tensors, write_tensor

__all__ = [
    "Module",
    "Tensor",
    "as_tensor",
    "backward",
    "fd_check",
    "grad_enabled",
    "load_tensors",
    "no_grad",
    "parameter",
    "read_tensor",
    "record",
    "save_tensors",
    "uniform_init",
    "write_tensor",
    "zeros_init",
]
