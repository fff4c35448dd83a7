from __future__ import annotations

import logging
import math

import numpy as np
from scipy import ndimage

from .models import AugmentConfig, AugmentPlan, ClipRecord

logger = logging.getLogger(__name__)


def plan_augmentation(
    seed: int | np.random.SeedSequence, config: AugmentConfig | None = None
) -> AugmentPlan:
    """Draw every value and every flag, so a plan depends only on ``seed``."""
    config = config or AugmentConfig()
    rng = np.random.default_rng(seed)
    values = (
        rng.uniform(*config.gamma_range),
        rng.uniform(*config.scale_range),
        rng.uniform(-config.rotation_deg, config.rotation_deg),
        rng.uniform(*config.contrast_range),
    )
    flags = rng.random(4) < config.probability
    return AugmentPlan(
        gamma=float(values[0]),
        scale=float(values[1]),
        rotation_deg=float(values[2]),
        contrast=float(values[3]),
        use_gamma=bool(flags[0]),
        use_scale=bool(flags[1]),
        use_rotation=bool(flags[2]),
        use_contrast=bool(flags[3]),
    )


def _inverse_map(plan: AugmentPlan, shape: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    """Matrix and offset taking output pixel coordinates to input coordinates."""
    scale = plan.scale if plan.use_scale else 1.0
    theta = math.radians(plan.rotation_deg if plan.use_rotation else 0.0)
    cos, sin = math.cos(theta), math.sin(theta)
    matrix = np.array([[cos, sin], [-sin, cos]]) / scale
    center = (np.asarray(shape, dtype=np.float64) - 1.0) / 2.0
    return matrix, center - matrix @ center


def spatial_transform(
    image: np.ndarray, plan: AugmentPlan, *, is_mask: bool = False
) -> np.ndarray:
    """Rotate and scale a 2-D array about its centre.

    Masks use nearest-neighbour sampling and stay binary; frames use bilinear sampling.
    """
    if not plan.spatial:
        return np.array(image, copy=True)
    matrix, offset = _inverse_map(plan, image.shape)
    if is_mask:
        moved = ndimage.affine_transform(
            np.asarray(image, dtype=np.float64), matrix, offset=offset, order=0, cval=0.0
        )
        return moved > 0.5
    moved = ndimage.affine_transform(
        np.asarray(image, dtype=np.float64), matrix, offset=offset, order=1, mode="nearest"
    )
    return np.clip(moved, 0.0, 1.0)


def intensity_transform(frames: np.ndarray, plan: AugmentPlan) -> np.ndarray:
    out = np.asarray(frames, dtype=np.float64)
    if plan.use_gamma:
        out = np.power(out, plan.gamma)
    if plan.use_contrast:
        mean = out.mean()
        out = (out - mean) * plan.contrast + mean
    return np.clip(out, 0.0, 1.0)


def apply_plan(record: ClipRecord, plan: AugmentPlan) -> ClipRecord:
    if plan.is_identity:
        return record
    frames = record.frames
    ed_mask, es_mask = record.ed_mask, record.es_mask
    if plan.spatial:
        frames = np.stack(
            [spatial_transform(frame[0], plan)[None] for frame in frames], axis=0
        )
        ed_mask = spatial_transform(ed_mask, plan, is_mask=True)
        es_mask = spatial_transform(es_mask, plan, is_mask=True)
    if plan.intensity:
        frames = intensity_transform(frames, plan)
    return record.with_arrays(frames, ed_mask, es_mask)


def augment(
    record: ClipRecord, seed: int | np.random.SeedSequence, config: AugmentConfig | None = None
) -> ClipRecord:
    """Gamma, scaling, rotation and contrast, each applied with the configured probability.

    Spatial transforms move frames and masks together; intensity transforms touch frames only.
    """
    plan = plan_augmentation(seed, config)
    logger.debug("augment clip=%s plan=%s", record.clip_id, plan)
    return apply_plan(record, plan)
