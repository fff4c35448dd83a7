from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
import logging
import math
from typing import Sequence, TypeVar

import numpy as np

from ..errors import DataError
from .models import ClipRecord, SynthSpec, View

logger = logging.getLogger(__name__)

OCCLUSION_DIM = 0.35
OCCLUSION_WIDTH_DEG = (15.0, 35.0)

T = TypeVar("T")


def ease_profile(frames: int) -> np.ndarray:
    """Cosine-eased interpolation weights, 0 at ED and 1 at ES."""
    phase = np.arange(frames, dtype=np.float64) / (frames - 1)
    return 0.5 * (1.0 - np.cos(math.pi * phase))


def _ellipse_field(spec: SynthSpec, semi_long: float, semi_short: float) -> np.ndarray:
    """``(u/a)^2 + (v/b)^2`` over the pixel grid with the long axis tilted from the rows."""
    rows, cols = np.indices((spec.image_size, spec.image_size), dtype=np.float64)
    center_row, center_col = spec.center
    dr, dc = rows - center_row, cols - center_col
    theta = math.radians(spec.tilt_deg)
    along = dr * math.cos(theta) + dc * math.sin(theta)
    across = -dr * math.sin(theta) + dc * math.cos(theta)
    return (along / semi_long) ** 2 + (across / semi_short) ** 2


def _check_bounds(spec: SynthSpec, semi_long: float, semi_short: float) -> None:
    theta = math.radians(spec.tilt_deg)
    half_rows = math.hypot(semi_long * math.cos(theta), semi_short * math.sin(theta))
    half_cols = math.hypot(semi_long * math.sin(theta), semi_short * math.cos(theta))
    center_row, center_col = spec.center
    last = spec.image_size - 1
    if (
        center_row - half_rows < 0
        or center_row + half_rows > last
        or center_col - half_cols < 0
        or center_col + half_cols > last
    ):
        raise DataError(
            f"ellipse {semi_long:.1f}x{semi_short:.1f} at {spec.center} exceeds the "
            f"{spec.image_size}px image"
        )


def _occlusion(spec: SynthSpec, rng: np.random.Generator) -> np.ndarray | None:
    if spec.occlusion_prob <= 0.0 or rng.random() >= spec.occlusion_prob:
        return None
    rows, cols = np.indices((spec.image_size, spec.image_size), dtype=np.float64)
    center_row, center_col = spec.center
    angle = np.degrees(np.arctan2(rows - center_row, cols - center_col))
    start = rng.uniform(-180.0, 180.0)
    width = rng.uniform(*OCCLUSION_WIDTH_DEG)
    offset = np.mod(angle - start, 360.0)
    return offset < width


def render_view(
    spec: SynthSpec, semi_short: float, contraction_short: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Frames ``[T, 1, H, W]`` and the ED/ES cavity masks of one view."""
    weights = ease_profile(spec.frames)
    long_axes = spec.semi_long * (1.0 - (1.0 - spec.contraction_long) * weights)
    short_axes = semi_short * (1.0 - (1.0 - contraction_short) * weights)
    wall = spec.wall_thickness
    _check_bounds(spec, spec.semi_long + wall, semi_short + wall)
    wedge = _occlusion(spec, rng)

    frames = np.empty((spec.frames, 1, spec.image_size, spec.image_size))
    masks: list[np.ndarray] = []
    for index, (a, b) in enumerate(zip(long_axes, short_axes)):
        cavity = _ellipse_field(spec, a, b) <= 1.0
        outer = _ellipse_field(spec, a + wall, b + wall) <= 1.0
        image = np.full(cavity.shape, spec.background_level)
        image[outer] = spec.wall_level
        image[cavity] = spec.cavity_level
        if spec.speckle_sigma > 0.0:
            image = image * (1.0 + spec.speckle_sigma * rng.standard_normal(image.shape))
        if wedge is not None:
            image = np.where(wedge, image * OCCLUSION_DIM, image)
        frames[index, 0] = np.clip(image, 0.0, 1.0)
        if index in (0, spec.frames - 1):
            masks.append(cavity)
    return frames, masks[0], masks[1]


def generate(spec: SynthSpec, seed: int, clip_id: str | None = None) -> ClipRecord:
    """Deterministic A4C clip for ``seed``; ``true_ef`` is the spheroid EF."""
    rng = np.random.default_rng(seed)
    frames, ed_mask, es_mask = render_view(spec, spec.semi_short, spec.contraction_short, rng)
    return ClipRecord(
        clip_id=clip_id or f"synth_{seed}",
        frames=frames,
        ed_mask=ed_mask,
        es_mask=es_mask,
        true_ef=spec.single_plane_ef,
        view=View.A4C,
    )


def generate_pair(
    spec: SynthSpec, seed: int, pair_id: str | None = None
) -> tuple[ClipRecord, ClipRecord]:
    """Orthogonal A4C and A2C clips of one tri-axial ellipsoid."""
    pair_id = pair_id or f"pair_{seed}"
    streams = [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(2)]
    views = (
        (View.A4C, spec.semi_short, spec.contraction_short),
        (View.A2C, spec.semi_depth, spec.contraction_depth),
    )
    records = []
    for rng, (view, semi, contraction) in zip(streams, views):
        frames, ed_mask, es_mask = render_view(spec, semi, contraction, rng)
        records.append(
            ClipRecord(
                clip_id=f"{pair_id}_{view.value}",
                frames=frames,
                ed_mask=ed_mask,
                es_mask=es_mask,
                true_ef=spec.biplane_ef,
                view=view,
                pair_id=pair_id,
            )
        )
    return records[0], records[1]


def jitter_spec(base: SynthSpec, rng: np.random.Generator) -> SynthSpec:
    """Per-clip anatomy around ``base`` so EF spreads over a plausible range."""
    size = base.image_size
    center_row, center_col = base.center
    return replace(
        base,
        semi_long=base.semi_long * rng.uniform(0.88, 1.05),
        semi_short=base.semi_short * rng.uniform(0.85, 1.08),
        semi_depth=base.semi_depth * rng.uniform(0.85, 1.08),
        contraction_long=rng.uniform(0.78, 0.95),
        contraction_short=rng.uniform(0.6, 0.92),
        contraction_depth=rng.uniform(0.6, 0.92),
        tilt_deg=base.tilt_deg + rng.uniform(-10.0, 10.0),
        center_row=center_row + rng.uniform(-0.03, 0.03) * size,
        center_col=center_col + rng.uniform(-0.03, 0.03) * size,
    )


def generate_corpus(
    base: SynthSpec,
    count: int,
    base_seed: int = 0,
    *,
    jitter: bool = True,
    workers: int = 1,
) -> list[ClipRecord]:
    """``count`` clips seeded ``base_seed + index``; order does not depend on ``workers``."""
    if count < 1:
        raise DataError(f"corpus size must be positive, got {count}")

    def _one(index: int) -> ClipRecord:
        seed = base_seed + index
        spec = jitter_spec(base, np.random.default_rng([seed, 1])) if jitter else base
        return generate(spec, seed, clip_id=f"clip_{index:04d}")

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_one, range(count)))
    else:
        records = [_one(index) for index in range(count)]
    logger.info(
        "synthetic corpus generated count=%s base_seed=%s workers=%s", count, base_seed, workers
    )
    return records


def generate_pair_corpus(
    base: SynthSpec, count: int, base_seed: int = 0, *, jitter: bool = True
) -> list[ClipRecord]:
    """``count`` A4C/A2C pairs flattened in pair order, seeded like ``generate_corpus``."""
    if count < 1:
        raise DataError(f"corpus size must be positive, got {count}")
    records: list[ClipRecord] = []
    for index in range(count):
        seed = base_seed + index
        spec = jitter_spec(base, np.random.default_rng([seed, 1])) if jitter else base
        records.extend(generate_pair(spec, seed, pair_id=f"pair_{index:04d}"))
    logger.info("synthetic pair corpus generated pairs=%s base_seed=%s", count, base_seed)
    return records


def split_corpus(
    records: Sequence[T],
    fractions: tuple[float, float, float] = (0.5, 0.25, 0.25),
) -> tuple[list[T], list[T], list[T]]:
    """Contiguous train/val/test split; 64 clips give 32/16/16."""
    if len(fractions) != 3 or any(f < 0.0 for f in fractions) or sum(fractions) <= 0.0:
        raise DataError(f"invalid split fractions {fractions}")
    total = sum(fractions)
    n = len(records)
    train_end = int(round(n * fractions[0] / total))
    val_end = train_end + int(round(n * fractions[1] / total))
    val_end = min(val_end, n)
    return list(records[:train_end]), list(records[train_end:val_end]), list(records[val_end:])
