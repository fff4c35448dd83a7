from __future__ import annotations

import faulthandler
import logging
from logging.handlers import RotatingFileHandler
import os
from pathlib import Path
import sys
import threading
import traceback
from types import TracebackType
from typing import IO, Sequence

from . import __version__
from .cli import build_parser, run

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
DEBUG_ENV = "HSSNET_DEBUG"

_LOGGING_CONFIGURED = False
_FAULT_HANDLER_FILE: IO[str] | None = None


def _log_path() -> Path:
    cache_root = Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache"))
    return cache_root / "hssnet" / "hssnet.log"


def _debug_enabled() -> bool:
    return os.environ.get(DEBUG_ENV) == "1"


def _configure_logging(verbose: bool = False) -> None:
    global _LOGGING_CONFIGURED
    if _LOGGING_CONFIGURED:
        return
    root = logging.getLogger()
    root.setLevel(logging.INFO)

    log_file = _log_path()
    try:
        log_file.parent.mkdir(parents=True, exist_ok=True)
    except OSError:
        logging.basicConfig(level=logging.INFO, format=LOG_FORMAT)
        _LOGGING_CONFIGURED = True
        return

    formatter = logging.Formatter(LOG_FORMAT)
    file_handler = RotatingFileHandler(
        filename=log_file,
        maxBytes=2 * 1024 * 1024,
        backupCount=3,
        encoding="utf-8",
    )
    file_handler.setFormatter(formatter)
    root.addHandler(file_handler)

    if verbose or _debug_enabled():
        stderr_handler = logging.StreamHandler(sys.stderr)
        stderr_handler.setFormatter(formatter)
        root.addHandler(stderr_handler)

    _LOGGING_CONFIGURED = True


def _install_exception_hooks() -> None:
    logger = logging.getLogger(__name__)

    def _unhandled_exception(
        exc_type: type[BaseException],
        exc: BaseException,
        tb: TracebackType | None,
    ) -> None:
        logger.error(
            "Uncaught exception:\n%s",
            "".join(traceback.format_exception(exc_type, exc, tb)),
        )
        sys.__excepthook__(exc_type, exc, tb)

    def _thread_exception(args: threading.ExceptHookArgs) -> None:
        logger.error(
            "Uncaught thread exception in %s:\n%s",
            getattr(args.thread, "name", "unknown"),
            "".join(traceback.format_exception(args.exc_type, args.exc_value, args.exc_traceback)),
        )

    sys.excepthook = _unhandled_exception
    threading.excepthook = _thread_exception


def _enable_fault_handler() -> None:
    global _FAULT_HANDLER_FILE
    try:
        _FAULT_HANDLER_FILE = _log_path().open("a", encoding="utf-8")
        faulthandler.enable(file=_FAULT_HANDLER_FILE, all_threads=True)
    except OSError:
        logging.getLogger(__name__).exception("Failed to enable faulthandler")


def _log_startup(command: str) -> None:
    logging.getLogger(__name__).info(
        "starting hssnet version=%s command=%s executable=%s python=%s argv=%s cwd=%s "
        "HSSNET_DEBUG=%s",
        __version__,
        command,
        sys.executable,
        sys.version.split()[0],
        sys.argv,
        os.getcwd(),
        os.environ.get(DEBUG_ENV, ""),
    )


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(verbose=args.verbose)
    _install_exception_hooks()
    _enable_fault_handler()
    _log_startup(args.command)
    return run(args)
