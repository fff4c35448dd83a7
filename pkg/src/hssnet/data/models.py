from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from ..errors import DataError

DEFAULT_IMAGE_SIZE = 256
DEFAULT_FRAMES = 10


class View(str, Enum):
    A4C = "a4c"
    A2C = "a2c"


@dataclass(frozen=True)
class SynthSpec:
    """Anatomy and acquisition settings of one synthetic apical clip.

    Lengths are in pixels of an ``image_size`` square. The long semi-axis runs along the
    image rows before ``tilt_deg`` is applied. ``semi_depth`` and ``contraction_depth``
    only matter for biplane pairs, where they give the second view's width.
    """

    image_size: int = DEFAULT_IMAGE_SIZE
    frames: int = DEFAULT_FRAMES
    semi_long: float = 80.0
    semi_short: float = 48.0
    semi_depth: float = 48.0
    contraction_long: float = 0.85
    contraction_short: float = 0.75
    contraction_depth: float = 0.75
    center_row: float | None = None
    center_col: float | None = None
    tilt_deg: float = 0.0
    wall_thickness: float = 8.0
    speckle_sigma: float = 0.2
    occlusion_prob: float = 0.0
    cavity_level: float = 0.1
    wall_level: float = 0.85
    background_level: float = 0.35

    def __post_init__(self) -> None:
        if self.image_size < 8:
            raise DataError(f"image_size must be >= 8, got {self.image_size}")
        if self.frames < 2:
            raise DataError(f"a clip needs at least 2 frames, got {self.frames}")
        if min(self.semi_long, self.semi_short, self.semi_depth) <= 0.0:
            raise DataError("semi-axes must be positive")
        for name in ("contraction_long", "contraction_short", "contraction_depth"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise DataError(f"{name} must lie in (0, 1), got {value}")
        if self.wall_thickness < 0.0 or self.speckle_sigma < 0.0:
            raise DataError("wall_thickness and speckle_sigma must be non-negative")
        if not 0.0 <= self.occlusion_prob <= 1.0:
            raise DataError(f"occlusion_prob must lie in [0, 1], got {self.occlusion_prob}")
        levels = {self.cavity_level, self.wall_level, self.background_level}
        if len(levels) != 3 or not all(0.0 <= level <= 1.0 for level in levels):
            raise DataError("cavity, wall and background levels must be distinct and in [0, 1]")

    @property
    def center(self) -> tuple[float, float]:
        middle = (self.image_size - 1) / 2.0
        return (
            middle if self.center_row is None else self.center_row,
            middle if self.center_col is None else self.center_col,
        )

    @property
    def single_plane_ef(self) -> float:
        """EF of the prolate spheroid swept by the A4C ellipse."""
        return 100.0 * (1.0 - self.contraction_long * self.contraction_short**2)

    @property
    def biplane_ef(self) -> float:
        """EF of the tri-axial ellipsoid seen by an A4C/A2C pair."""
        return 100.0 * (
            1.0 - self.contraction_long * self.contraction_short * self.contraction_depth
        )

    def scaled(self, image_size: int) -> "SynthSpec":
        """Same anatomy on a different canvas; lengths scale with the image."""
        factor = image_size / self.image_size
        center_row, center_col = self.center
        return replace(
            self,
            image_size=image_size,
            semi_long=self.semi_long * factor,
            semi_short=self.semi_short * factor,
            semi_depth=self.semi_depth * factor,
            wall_thickness=self.wall_thickness * factor,
            center_row=None if self.center_row is None else center_row * factor,
            center_col=None if self.center_col is None else center_col * factor,
        )


@dataclass(frozen=True, eq=False)
class ClipRecord:
    """``T`` grayscale frames in ``[0, 1]`` with ED (first) and ES (last) masks."""

    clip_id: str
    frames: np.ndarray
    ed_mask: np.ndarray
    es_mask: np.ndarray
    true_ef: float | None = None
    view: View = View.A4C
    pair_id: str | None = None
    meta: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        frames = np.asarray(self.frames, dtype=np.float64)
        if frames.ndim == 3:
            frames = frames[:, None]
        if frames.ndim != 4 or frames.shape[1] != 1 or frames.shape[0] < 2:
            raise DataError(
                f"{self.clip_id}: frames must be [T>=2, 1, H, W], got {frames.shape}"
            )
        if frames.size and (frames.min() < 0.0 or frames.max() > 1.0):
            raise DataError(f"{self.clip_id}: frame values must lie in [0, 1]")
        masks = []
        for name in ("ed_mask", "es_mask"):
            mask = np.asarray(getattr(self, name))
            if mask.shape != frames.shape[2:]:
                raise DataError(
                    f"{self.clip_id}: {name} shape {mask.shape} != {frames.shape[2:]}"
                )
            if not np.all((mask == 0) | (mask == 1)):
                raise DataError(f"{self.clip_id}: {name} must be binary")
            masks.append(mask.astype(bool))
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "ed_mask", masks[0])
        object.__setattr__(self, "es_mask", masks[1])
        object.__setattr__(self, "view", View(self.view))

    @property
    def frame_count(self) -> int:
        return int(self.frames.shape[0])

    @property
    def image_shape(self) -> tuple[int, int]:
        return int(self.frames.shape[2]), int(self.frames.shape[3])

    def with_arrays(
        self, frames: np.ndarray, ed_mask: np.ndarray, es_mask: np.ndarray
    ) -> "ClipRecord":
        return replace(self, frames=frames, ed_mask=ed_mask, es_mask=es_mask)


@dataclass(frozen=True)
class AugmentConfig:
    probability: float = 0.5
    gamma_range: tuple[float, float] = (0.7, 1.5)
    scale_range: tuple[float, float] = (0.9, 1.1)
    rotation_deg: float = 10.0
    contrast_range: tuple[float, float] = (0.8, 1.2)

    def __post_init__(self) -> None:
        if not 0.0 <= self.probability <= 1.0:
            raise DataError(f"probability must lie in [0, 1], got {self.probability}")
        for name in ("gamma_range", "scale_range", "contrast_range"):
            low, high = getattr(self, name)
            if not 0.0 < low <= high:
                raise DataError(f"{name} must satisfy 0 < low <= high, got {(low, high)}")
        if self.rotation_deg < 0.0:
            raise DataError("rotation_deg must be non-negative")


@dataclass(frozen=True)
class AugmentPlan:
    """Drawn augmentation values; a transform is applied only when its flag is set."""

    gamma: float = 1.0
    scale: float = 1.0
    rotation_deg: float = 0.0
    contrast: float = 1.0
    use_gamma: bool = False
    use_scale: bool = False
    use_rotation: bool = False
    use_contrast: bool = False

    @property
    def spatial(self) -> bool:
        return self.use_scale or self.use_rotation

    @property
    def intensity(self) -> bool:
        return self.use_gamma or self.use_contrast

    @property
    def is_identity(self) -> bool:
        return not (self.spatial or self.intensity)
