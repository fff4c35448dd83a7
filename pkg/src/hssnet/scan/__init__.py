from .orders import (
    ALL_DIRECTIONS,
    ALL_MODES,
    PatchGrid,
    ScanDirection,
    ScanMode,
    ScanOrder,
    apply,
    direction_index,
    invert,
    make_order,
    parse_mode,
)

__all__ = [
    "ALL_DIRECTIONS",
    "ALL_MODES",
    "PatchGrid",
    "ScanDirection",
    "ScanMode",
    "ScanOrder",
    "apply",
    "direction_index",
    "invert",
    "make_order",
    "parse_mode",
]
