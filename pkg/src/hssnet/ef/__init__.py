from .geometry import DEFAULT_N_DISKS, LVGeometry, extract_geometry, largest_component
from .json_io import EFJob, read_ef_manifest, report_to_json
from .volume import (
    EFReport,
    VolumeMethod,
    ef_from_masks,
    ejection_fraction,
    resample_diameters,
    volume_biplane,
    volume_single_plane,
)

__all__ = [
    "DEFAULT_N_DISKS",
    "EFJob",
    "EFReport",
    "LVGeometry",
    "VolumeMethod",
    "ef_from_masks",
    "ejection_fraction",
    "extract_geometry",
    "largest_component",
    "read_ef_manifest",
    "report_to_json",
    "resample_diameters",
    "volume_biplane",
    "volume_single_plane",
]
