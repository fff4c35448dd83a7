from __future__ import annotations

import faulthandler
import logging
import sys
import threading

from hssnet import app, dev_pipeline_check


def test_pipeline_check_runs(qt_app) -> None:
    dev_pipeline_check.main()


def test_app_main_logs_to_cache_dir(tmp_path, monkeypatch, capsys) -> None:
    monkeypatch.setenv("XDG_CACHE_HOME", str(tmp_path))
    monkeypatch.setattr(app, "_LOGGING_CONFIGURED", False)
    monkeypatch.setattr(sys, "excepthook", sys.excepthook)
    monkeypatch.setattr(threading, "excepthook", threading.excepthook)
    root = logging.getLogger()
    before = list(root.handlers)
    args = ["scan-dump", "--t", "1", "--rows", "1", "--cols", "2", "--mode", "spatial"]
    try:
        code = app.main(args)
    finally:
        faulthandler.disable()
        for handler in root.handlers[len(before) :]:
            handler.close()
            root.removeHandler(handler)
        if app._FAULT_HANDLER_FILE is not None:
            app._FAULT_HANDLER_FILE.close()
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines == ["step,slot,t,row,col", "0,0,0,0,0", "1,1,0,0,1"]
    log_text = (tmp_path / "hssnet" / "hssnet.log").read_text(encoding="utf-8")
    assert "starting hssnet" in log_text
    assert "command=scan-dump" in log_text
