"""Logging setup for the lfphillips CLI and library.

Usage:
    from lfphillips.logging import configure_logging

    configure_logging(level="INFO", fmt="json")
    logging.getLogger(__name__).info("Fitting model...")

Library modules only call ``logging.getLogger(__name__)``; handlers are
installed once by the CLI (or by the user) through ``configure_logging``.
"""

import json
import logging
import sys
from datetime import UTC, datetime
from typing import Any

ROOT_LOGGER = "lfphillips"


def _short_name(record: logging.LogRecord) -> str:
    return record.name.removeprefix(f"{ROOT_LOGGER}.")


class JsonFormatter(logging.Formatter):
    """One JSON object per line for log collectors."""

    def format(self, record: logging.LogRecord) -> str:
        entry: dict[str, Any] = {
            "timestamp": datetime.now(UTC).isoformat(),
            "level": record.levelname,
            "message": record.getMessage(),
            "logger": record.name,
        }
        if record.exc_info:
            entry["exception"] = self.formatException(record.exc_info)
        if hasattr(record, "extra_data"):
            entry["extra"] = record.extra_data
        # numpy scalars in extra data fall back to str
        return json.dumps(entry, ensure_ascii=False, default=str)


class PrettyFormatter(logging.Formatter):
    """Coloured terminal lines: time, level, module and message."""

    COLORS = {
        "DEBUG": "\033[36m",
        "INFO": "\033[32m",
        "WARNING": "\033[33m",
        "ERROR": "\033[31m",
        "CRITICAL": "\033[35m",
    }
    RESET = "\033[0m"

    def __init__(self, color: bool = True) -> None:
        super().__init__()
        self.color = color

    def format(self, record: logging.LogRecord) -> str:
        level = f"{record.levelname:8}"
        if self.color:
            level = f"{self.COLORS.get(record.levelname, '')}{level}{self.RESET}"
        timestamp = datetime.now().strftime("%H:%M:%S")
        line = f"[{timestamp}] {level} {_short_name(record)}: {record.getMessage()}"

        if hasattr(record, "extra_data"):
            line += " (" + " ".join(f"{k}={v}" for k, v in record.extra_data.items()) + ")"
        if record.exc_info:
            line += "\n" + self.formatException(record.exc_info)
        return line


def configure_logging(level: str | int = logging.INFO, fmt: str = "pretty") -> logging.Logger:
    """
    Install stdout/stderr handlers on the package root logger.

    DEBUG, INFO and WARNING go to stdout; ERROR and CRITICAL go to stderr.
    Calling it again replaces the previously installed handlers. Colours are
    used only when stdout is a terminal.

    Args:
        level: Logging level name or number.
        fmt:   "pretty" for terminals, "json" for log collectors.

    Returns:
        The configured package root logger.
    """
    if fmt == "json":
        formatter: logging.Formatter = JsonFormatter()
    else:
        formatter = PrettyFormatter(color=sys.stdout.isatty())

    logger = logging.getLogger(ROOT_LOGGER)
    logger.setLevel(level)
    logger.propagate = False
    for handler in list(logger.handlers):
        logger.removeHandler(handler)

    routes = (
        (sys.stdout, logging.DEBUG, lambda r: r.levelno < logging.ERROR),
        (sys.stderr, logging.ERROR, None),
    )
    for stream, threshold, keep in routes:
        handler = logging.StreamHandler(stream)
        handler.setLevel(threshold)
        if keep is not None:
            handler.addFilter(keep)
        handler.setFormatter(formatter)
        logger.addHandler(handler)

    return logger


def log_with_data(logger: logging.Logger, msg: str, level: int = logging.INFO, **data: Any) -> None:
    """Log a message with structured data (``extra`` in JSON, ``k=v`` pairs when pretty)."""
    if logger.isEnabledFor(level):
        logger.log(level, msg, extra={"extra_data": data})
