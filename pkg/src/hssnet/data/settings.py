from __future__ import annotations

from dataclasses import asdict

from PySide6 import QtCore

from ..errors import ConfigError, DataError
from ..settings import read_float, read_int, write_values
from .models import AugmentConfig, SynthSpec

_SYNTH_INT_KEYS = ("image_size", "frames")
_OPTIONAL_KEYS = ("center_row", "center_col")


def load_synth_settings(
    settings: QtCore.QSettings, prefix: str = "", base: SynthSpec | None = None
) -> SynthSpec:
    """Keys not present keep ``base`` anatomy rescaled to the configured ``image_size``."""
    base = base or SynthSpec()
    size = read_int(settings, f"{prefix}image_size", base.image_size, minimum=1)
    try:
        defaults = base.scaled(size) if size != base.image_size else base
    except DataError as exc:
        raise ConfigError(str(exc)) from exc
    values: dict[str, object] = {}
    for name, default in asdict(defaults).items():
        key = f"{prefix}{name}"
        if name in _SYNTH_INT_KEYS:
            values[name] = read_int(settings, key, int(default), minimum=1)
        elif name in _OPTIONAL_KEYS:
            values[name] = read_float(settings, key, 0.0) if settings.contains(key) else default
        else:
            values[name] = read_float(settings, key, float(default))
    try:
        return SynthSpec(**values)  # type: ignore[arg-type]
    except DataError as exc:
        raise ConfigError(str(exc)) from exc


def save_synth_settings(settings: QtCore.QSettings, spec: SynthSpec, prefix: str = "") -> None:
    write_values(settings, {f"{prefix}{name}": value for name, value in asdict(spec).items()})


def _read_range(
    settings: QtCore.QSettings, key: str, default: tuple[float, float]
) -> tuple[float, float]:
    return (
        read_float(settings, f"{key}_min", default[0]),
        read_float(settings, f"{key}_max", default[1]),
    )


def load_augment_settings(settings: QtCore.QSettings, prefix: str = "augment/") -> AugmentConfig:
    defaults = AugmentConfig()
    try:
        return AugmentConfig(
            probability=read_float(
                settings, f"{prefix}probability", defaults.probability, minimum=0.0, maximum=1.0
            ),
            gamma_range=_read_range(settings, f"{prefix}gamma", defaults.gamma_range),
            scale_range=_read_range(settings, f"{prefix}scale", defaults.scale_range),
            rotation_deg=read_float(
                settings, f"{prefix}rotation_deg", defaults.rotation_deg, minimum=0.0
            ),
            contrast_range=_read_range(settings, f"{prefix}contrast", defaults.contrast_range),
        )
    except DataError as exc:
        raise ConfigError(str(exc)) from exc


def save_augment_settings(
    settings: QtCore.QSettings, config: AugmentConfig, prefix: str = "augment/"
) -> None:
    write_values(
        settings,
        {
            f"{prefix}probability": config.probability,
            f"{prefix}gamma_min": config.gamma_range[0],
            f"{prefix}gamma_max": config.gamma_range[1],
            f"{prefix}scale_min": config.scale_range[0],
            f"{prefix}scale_max": config.scale_range[1],
            f"{prefix}rotation_deg": config.rotation_deg,
            f"{prefix}contrast_min": config.contrast_range[0],
            f"{prefix}contrast_max": config.contrast_range[1],
        },
    )
