from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
import math

import numpy as np

from ..errors import GeometryError
from .geometry import DEFAULT_N_DISKS, LVGeometry, extract_geometry


class VolumeMethod(str, Enum):
    SINGLE_PLANE = "single_plane"
    BIPLANE = "biplane"


@dataclass(frozen=True)
class EFReport:
    """End-diastolic and end-systolic volumes (cubic pixels) and EF in percent."""

    edv: float
    esv: float
    ef: float
    method: VolumeMethod = VolumeMethod.SINGLE_PLANE


def volume_single_plane(geom: LVGeometry) -> float:
    """``(pi / 4) * (L / N) * sum(a_k^2)``."""
    return math.pi / 4.0 * (geom.length / geom.n_disks) * float(np.sum(geom.diameters**2))


def resample_diameters(diameters: np.ndarray, n_disks: int) -> np.ndarray:
    """Linear interpolation onto ``n_disks`` slabs at normalized slab centres."""
    source = (np.arange(diameters.size) + 0.5) / diameters.size
    target = (np.arange(n_disks) + 0.5) / n_disks
    return np.interp(target, source, diameters)


def volume_biplane(geom_a4c: LVGeometry, geom_a2c: LVGeometry) -> float:
    """``(pi / 4) * (L / N) * sum(a_k * b_k)`` with ``L`` the longer of the two axes.

    The shorter view's diameters are resampled onto the longer view's slabs.
    """
    if geom_a4c.n_disks != geom_a2c.n_disks:
        raise GeometryError(
            f"disk counts differ: a4c={geom_a4c.n_disks} a2c={geom_a2c.n_disks}"
        )
    n = geom_a4c.n_disks
    longer, shorter = (
        (geom_a4c, geom_a2c) if geom_a4c.length >= geom_a2c.length else (geom_a2c, geom_a4c)
    )
    a = longer.diameters
    b = resample_diameters(shorter.diameters, n)
    return math.pi / 4.0 * (longer.length / n) * float(np.sum(a * b))


def ejection_fraction(edv: float, esv: float) -> float:
    if edv <= 0.0:
        raise GeometryError(f"end-diastolic volume must be positive, got {edv}")
    return 100.0 * (edv - esv) / edv


def ef_from_masks(
    ed_mask: np.ndarray,
    es_mask: np.ndarray,
    ed_mask_a2c: np.ndarray | None = None,
    es_mask_a2c: np.ndarray | None = None,
    n_disks: int = DEFAULT_N_DISKS,
) -> EFReport:
    """Single-plane EF, or biplane when both second-view masks are given."""
    ed = extract_geometry(ed_mask, n_disks)
    es = extract_geometry(es_mask, n_disks)
    if ed_mask_a2c is None and es_mask_a2c is None:
        edv, esv = volume_single_plane(ed), volume_single_plane(es)
        method = VolumeMethod.SINGLE_PLANE
    elif ed_mask_a2c is not None and es_mask_a2c is not None:
        edv = volume_biplane(ed, extract_geometry(ed_mask_a2c, n_disks))
        esv = volume_biplane(es, extract_geometry(es_mask_a2c, n_disks))
        method = VolumeMethod.BIPLANE
    else:
        raise GeometryError("biplane EF needs both ED and ES masks of the second view")
    return EFReport(edv=edv, esv=esv, ef=ejection_fraction(edv, esv), method=method)
