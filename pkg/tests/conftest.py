from __future__ import annotations

import os

import pytest
from PySide6 import QtCore

_APP: QtCore.QCoreApplication | None = None


@pytest.fixture
def qt_app() -> QtCore.QCoreApplication:
    global _APP
    instance = QtCore.QCoreApplication.instance()
    if instance is None:
        _APP = QtCore.QCoreApplication([])
        instance = _APP
    return instance


def pytest_collection_modifyitems(config: pytest.Config, items: list[pytest.Item]) -> None:
    if os.environ.get("HSSNET_SLOW") == "1":
        return
    skip = pytest.mark.skip(reason="acceptance-scale run; set HSSNET_SLOW=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)
