"""Logging configuration for the pipeline.

Every record carries a ``stage`` field. It is ``-`` outside a pipeline stage and
the stage tag (``train:stacking``) inside :func:`src.utils.errors.stage`.
"""

import sys

from loguru import logger

from src.config import settings

CONSOLE_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | "
    "<magenta>{extra[stage]: <18}</magenta> | <cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - "
    "<level>{message}</level>"
)
FILE_FORMAT = "{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {extra[stage]: <18} | {name}:{function}:{line} - {message}"


def setup_logger():
    """Configure the application logger."""
    logger.remove()
    logger.configure(extra={"stage": "-"})

    # stderr keeps stdout free for CLI tables
    logger.add(
        sys.stderr,
        format=CONSOLE_FORMAT,
        level=settings.log_level,
        colorize=True,
    )

    logger.add(
        settings.log_file,
        format=FILE_FORMAT,
        level=settings.log_level,
        rotation="10 MB",
        retention="7 days",
        compression="zip",
    )

    return logger


def progress_enabled() -> bool:
    """Whether tqdm progress bars should be shown."""
    verbose = logger.level(settings.log_level.upper()).no <= logger.level("INFO").no
    return verbose and sys.stdout.isatty()


# Initialize logger
app_logger = setup_logger()
