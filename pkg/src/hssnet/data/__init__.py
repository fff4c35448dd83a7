from .augment import (
    apply_plan,
    augment,
    intensity_transform,
    plan_augmentation,
    spatial_transform,
)
from .models import AugmentConfig, AugmentPlan, ClipRecord, SynthSpec, View
from .pgm import read_mask, read_pgm, write_pgm
from .repository import ClipRepository
from .settings import (
    load_augment_settings,
    load_synth_settings,
    save_augment_settings,
    save_synth_settings,
)
from .synth import (
    ease_profile,
    generate,
    generate_corpus,
    generate_pair,
    generate_pair_corpus,
    jitter_spec,
    split_corpus,
)

__all__ = [
    "AugmentConfig",
    "AugmentPlan",
    "ClipRecord",
    "ClipRepository",
    "SynthSpec",
    "View",
    "apply_plan",
    "augment",
    "ease_profile",
    "generate",
    "generate_corpus",
    "generate_pair",
    "generate_pair_corpus",
    "intensity_transform",
    "jitter_spec",
    "load_augment_settings",
    "load_synth_settings",
    "plan_augmentation",
    "read_mask",
    "read_pgm",
    "save_augment_settings",
    "save_synth_settings",
    "spatial_transform",
    "split_corpus",
    "write_pgm",
]
