"""
Logging for coxplasso.

Every module logger lives under the ``coxplasso`` package logger and
propagates to it, so one stderr handler (and, when enabled, one rotating
file) serves the whole package. stdout stays free for command output:
JSON documents, tables and score files written with ``--out -``.

Loggers outside the package (scripts run as ``__main__``) get their own
handler through :func:`setup_logger`.
"""

import logging
import logging.handlers
from pathlib import Path
import sys

PACKAGE_LOGGER = 'coxplasso'
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


class ColoredFormatter(logging.Formatter):
    """Formatter that colors the level name when stderr is a terminal."""

    COLORS = {
        'DEBUG': '\033[36m',
        'INFO': '\033[32m',
        'WARNING': '\033[33m',
        'ERROR': '\033[31m',
        'CRITICAL': '\033[35m',
    }
    RESET = '\033[0m'

    def __init__(self, fmt: str = LOG_FORMAT, datefmt: str = DATE_FORMAT):
        super().__init__(fmt, datefmt=datefmt)
        self.use_color = hasattr(sys.stderr, 'isatty') and sys.stderr.isatty()

    def format(self, record: logging.LogRecord) -> str:
        color = self.COLORS.get(record.levelname) if self.use_color else None
        if color is None:
            return super().format(record)

        # records are shared between handlers; restore the plain name
        plain = record.levelname
        record.levelname = f"{color}{plain}{self.RESET}"
        try:
            return super().format(record)
        finally:
            record.levelname = plain


def _console_handler() -> logging.Handler:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(ColoredFormatter())
    return handler


def _file_handler(log_dir: str, name: str, max_bytes: int, backup_count: int) -> logging.Handler:
    path = Path(log_dir).expanduser()
    path.mkdir(parents=True, exist_ok=True)
    handler = logging.handlers.RotatingFileHandler(
        path / f"{name.replace('.', '_')}.log",
        maxBytes=max_bytes,
        backupCount=backup_count,
    )
    handler.setLevel(logging.DEBUG)
    handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT))
    return handler


def _in_package(name: str) -> bool:
    return name == PACKAGE_LOGGER or name.startswith(PACKAGE_LOGGER + '.')


def setup_logger(
    name: str,
    log_dir: str = "logs",
    log_level: str = "INFO",
    console_output: bool = True,
    file_output: bool = False,
    max_bytes: int = 10_000_000,
    backup_count: int = 5
) -> logging.Logger:
    """
    Attach handlers to a logger that does not have any yet.

    Args:
        name: Logger name
        log_dir: Directory for the rotating log file
        log_level: Level name (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        console_output: Log to stderr
        file_output: Also log to ``<log_dir>/<name>.log``
        max_bytes: Size at which the log file rotates
        backup_count: Rotated files kept

    Returns:
        The configured logger; an already configured one is returned as is
    """
    logger = logging.getLogger(name)
    if logger.handlers:
        return logger

    logger.setLevel(log_level.upper())
    if console_output:
        logger.addHandler(_console_handler())
    if file_output:
        logger.addHandler(_file_handler(log_dir, name, max_bytes, backup_count))
    logger.propagate = False
    return logger


def get_logger(name: str) -> logging.Logger:
    """
    Get a logger for a module.

    Package modules share the handlers of the ``coxplasso`` logger; any
    other name is set up with default handlers on first use.

    Args:
        name: Logger name (typically __name__)

    Returns:
        Logger instance
    """
    if _in_package(name):
        return logging.getLogger(name)
    return setup_logger(name)


def set_log_level(level: str) -> None:
    """Set the level of the package logger, inherited by every module logger."""
    logging.getLogger(PACKAGE_LOGGER).setLevel(level.upper())


def configure_logging(config) -> logging.Logger:
    """
    Apply a LoggingConfig to the package logger.

    Replaces the package handlers, so calling it again with a new config
    does not duplicate output.

    Args:
        config: LoggingConfig (level, directory, console/file switches, rotation)

    Returns:
        The package logger
    """
    logger = logging.getLogger(PACKAGE_LOGGER)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    logger.setLevel(config.log_level.upper())
    if config.console_output:
        logger.addHandler(_console_handler())
    if config.file_output:
        logger.addHandler(
            _file_handler(config.log_dir, PACKAGE_LOGGER, config.max_bytes, config.backup_count)
        )
    if not logger.handlers:
        logger.addHandler(logging.NullHandler())
    return logger


setup_logger(PACKAGE_LOGGER)
