"""
Logging Configuration
Colored console logging plus an optional rotating log file
"""

import logging
import logging.handlers
from pathlib import Path
from typing import Optional

import colorlog

DEFAULT_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def configure_logging(level: str = "INFO", fmt: str = DEFAULT_FORMAT,
                      log_file: Optional[str] = None, max_bytes: int = 10485760,
                      backup_count: int = 5, color: bool = True) -> logging.Logger:
    """
    Install handlers on the root logger.

    Only entry points call this; library modules just use
    logging.getLogger(__name__).

    Args:
        level (str): Log level name (DEBUG, INFO, WARNING, ERROR)
        fmt (str): Record format without color codes
        log_file (str, optional): Rotating log file path
        max_bytes (int): Rotation size for the log file
        backup_count (int): Number of rotated files to keep
        color (bool): Use colorlog for the console handler

    Returns:
        logging.Logger: The configured root logger
    """
    root = logging.getLogger()
    root.setLevel(level.upper())

    for handler in list(root.handlers):
        root.removeHandler(handler)

    if color:
        console = colorlog.StreamHandler()
        console.setFormatter(colorlog.ColoredFormatter(
            "%(log_color)s" + fmt,
            log_colors={
                'DEBUG': 'cyan',
                'INFO': 'green',
                'WARNING': 'yellow',
                'ERROR': 'red',
                'CRITICAL': 'red,bg_white',
            }
        ))
    else:
        console = logging.StreamHandler()
        console.setFormatter(logging.Formatter(fmt))
    root.addHandler(console)

    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.handlers.RotatingFileHandler(
            log_file, maxBytes=max_bytes, backupCount=backup_count
        )
        file_handler.setFormatter(logging.Formatter(fmt))
        root.addHandler(file_handler)

    return root


def configure_from_app_config(app_config: dict, level_override: Optional[str] = None) -> logging.Logger:
    """Configure logging from the `logging` section of config.yaml."""
    section = app_config.get('logging', {})
    return configure_logging(
        level=level_override or section.get('level', 'INFO'),
        fmt=section.get('format', DEFAULT_FORMAT),
        log_file=section.get('file'),
        max_bytes=section.get('max_bytes', 10485760),
        backup_count=section.get('backup_count', 5),
        color=section.get('color', True),
    )
