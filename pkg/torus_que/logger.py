"""
Logging Configuration - Centralized logging setup for torus_que

Console output is kept short; the rotating file log carries timestamps and
source locations for long sweeps.
"""

import logging
import logging.handlers
import sys
from pathlib import Path

from torus_que.constants import (
    LOG_BACKUP_COUNT,
    LOG_CONSOLE_FORMAT,
    LOG_DATE_FORMAT,
    LOG_DIR_NAME,
    LOG_FILE_FORMAT,
    LOG_FILE_NAME,
    LOG_MAX_BYTES,
    LOGGER_NAME,
)


def default_log_path() -> Path:
    """~/.torus-que/run.log, creating the directory"""
    log_dir = Path.home() / LOG_DIR_NAME
    log_dir.mkdir(parents=True, exist_ok=True)
    return log_dir / LOG_FILE_NAME


def _console_handler(level: int) -> logging.Handler:
    handler = logging.StreamHandler(sys.stdout)
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(LOG_CONSOLE_FORMAT))
    return handler


def _file_handler(path: Path, level: int) -> logging.Handler:
    handler = logging.handlers.RotatingFileHandler(
        path,
        maxBytes=LOG_MAX_BYTES,
        backupCount=LOG_BACKUP_COUNT,
        encoding="utf-8",
    )
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(LOG_FILE_FORMAT, datefmt=LOG_DATE_FORMAT))
    return handler


def setup_logging(
    log_file: str | Path | None = None,
    console_level: int = logging.INFO,
    file_level: int = logging.DEBUG,
) -> logging.Logger:
    """Attach console and rotating-file handlers to the torus_que logger

    Calling it again replaces the handlers, so a sweep driven from a notebook
    can re-target its log file.

    Args:
        log_file: Log file path; None uses default_log_path()
        console_level: Level for stdout (default: INFO)
        file_level: Level for the file (default: DEBUG)

    Returns:
        The package logger
    """
    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(logging.DEBUG)
    logger.propagate = False
    for handler in list(logger.handlers):
        handler.close()
        logger.removeHandler(handler)

    logger.addHandler(_console_handler(console_level))

    # A missing file log is not fatal; sweeps still report on the console
    try:
        path = Path(log_file) if log_file is not None else default_log_path()
        logger.addHandler(_file_handler(path, file_level))
        logger.debug(f"Logging to file: {path}")
    except OSError as e:
        logger.warning(f"Could not create log file {log_file}: {e}")

    return logger


def get_logger(name: str) -> logging.Logger:
    """Child of the torus_que logger; module names pass through unchanged"""
    if name == LOGGER_NAME or name.startswith(f"{LOGGER_NAME}."):
        return logging.getLogger(name)
    return logging.getLogger(f"{LOGGER_NAME}.{name}")
