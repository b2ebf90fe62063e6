from __future__ import annotations

import logging
from typing import List, Optional


LOG_FORMAT = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"

_PACKAGE_LOGGERS: List[str] = []


def setup_logging(level: int = logging.INFO, name: Optional[str] = None) -> logging.Logger:
    logger = logging.getLogger(name)
    if not logger.handlers:
        handler = logging.StreamHandler()
        formatter = logging.Formatter(LOG_FORMAT)
        handler.setFormatter(formatter)
        logger.addHandler(handler)
    logger.setLevel(level)
    logger.propagate = False
    if name is not None and name not in _PACKAGE_LOGGERS:
        _PACKAGE_LOGGERS.append(name)
    return logger


def set_level(level: int | str) -> None:
    """Apply one level to every logger created through setup_logging."""
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
    for name in _PACKAGE_LOGGERS:
        logging.getLogger(name).setLevel(level)
