from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

from PySide6 import QtCore

from .errors import ConfigError

SETTINGS_FORMAT = QtCore.QSettings.Format.IniFormat


def open_settings(path: str | Path) -> QtCore.QSettings:
    """``key = value`` text file; keys without a section land in ``General``."""
    return QtCore.QSettings(str(path), SETTINGS_FORMAT)


def require_file(path: str | Path) -> Path:
    resolved = Path(path)
    if not resolved.is_file():
        raise ConfigError(f"config file not found: {resolved}")
    return resolved


def read_str(settings: QtCore.QSettings, key: str, default: str) -> str:
    value = settings.value(key, default)
    if isinstance(value, list):
        value = ", ".join(str(item) for item in value)
    return str(value).strip()


def read_int(
    settings: QtCore.QSettings,
    key: str,
    default: int,
    *,
    minimum: int | None = None,
) -> int:
    raw = settings.value(key, default)
    try:
        value = int(str(raw).strip())
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from exc
    if minimum is not None and value < minimum:
        raise ConfigError(f"{key}: must be >= {minimum}, got {value}")
    return value


def read_float(
    settings: QtCore.QSettings,
    key: str,
    default: float,
    *,
    minimum: float | None = None,
    maximum: float | None = None,
) -> float:
    raw = settings.value(key, default)
    try:
        value = float(str(raw).strip())
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from exc
    if minimum is not None and value < minimum:
        raise ConfigError(f"{key}: must be >= {minimum}, got {value}")
    if maximum is not None and value > maximum:
        raise ConfigError(f"{key}: must be <= {maximum}, got {value}")
    return value


def read_bool(settings: QtCore.QSettings, key: str, default: bool) -> bool:
    raw = settings.value(key, default)
    if isinstance(raw, bool):
        return raw
    text = str(raw).strip().lower()
    if text in {"1", "true", "yes", "on"}:
        return True
    if text in {"0", "false", "no", "off"}:
        return False
    raise ConfigError(f"{key}: expected a boolean, got {raw!r}")


def read_list(settings: QtCore.QSettings, key: str, default: Sequence[str]) -> list[str]:
    """Comma-separated value; QSettings already splits unquoted lists."""
    raw = settings.value(key, list(default))
    if raw is None:
        return list(default)
    items: Iterable[object] = raw if isinstance(raw, list) else str(raw).split(",")
    return [str(item).strip() for item in items if str(item).strip()]


def read_int_list(
    settings: QtCore.QSettings, key: str, default: Sequence[int], *, length: int | None = None
) -> tuple[int, ...]:
    items = read_list(settings, key, [str(value) for value in default])
    try:
        values = tuple(int(item) for item in items)
    except ValueError as exc:
        raise ConfigError(f"{key}: expected integers, got {items!r}") from exc
    if length is not None and len(values) != length:
        raise ConfigError(f"{key}: expected {length} values, got {len(values)}")
    return values


def write_values(settings: QtCore.QSettings, values: dict[str, object]) -> None:
    """Store scalars as text and sequences as QSettings string lists."""
    for key, value in values.items():
        if isinstance(value, (list, tuple)):
            settings.setValue(key, [str(item) for item in value])
        elif isinstance(value, bool):
            settings.setValue(key, "true" if value else "false")
        elif value is None:
            settings.remove(key)
        else:
            settings.setValue(key, repr(value) if isinstance(value, float) else str(value))
