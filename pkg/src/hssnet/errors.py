from __future__ import annotations


class HssNetError(Exception):
    """Base class for every error raised by the toolkit."""


class ShapeError(HssNetError, ValueError):
    pass


class NonFiniteError(HssNetError, FloatingPointError):
    pass


class GraphError(HssNetError, RuntimeError):
    pass


class ConfigError(HssNetError, ValueError):
    pass


class CheckpointError(HssNetError):
    pass


class DataError(HssNetError):
    pass


class GeometryError(DataError, ValueError):
    pass


class EmptyMaskError(GeometryError):
    pass
