# SPDX-FileCopyrightText: 2024 pairlab developers
# SPDX-License-Identifier: Apache-2.0
from __future__ import annotations

import logging
import sys

LOG_FORMAT = "%(asctime)s %(levelname)-8s %(name)s: %(message)s"


def get_logger(name: str = "pairlab", level: int | str | None = None) -> logging.Logger:
    """
    Get logger with a stderr handler attached

    Parameters
    ----------
    name : str, optional
        Logger name

    level : :obj:`int` or :obj:`str`, optional
        Logging level. If not set, level is taken from settings

    Returns
    -------
    logger : :obj:`logging.Logger`
        Configured logger

    Examples
    --------
    .. code:: python

        logger = get_logger()
        logger = get_logger(level="DEBUG")
    """

    if level is None:
        from .settings import get_settings  # pylint: disable=import-outside-toplevel

        level = get_settings().log_level

    logger = logging.getLogger(name)
    logger.setLevel(level)

    if not any(getattr(handler, "_pairlab", False) for handler in logger.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._pairlab = True  # type: ignore[attr-defined]  # pylint: disable=protected-access
        logger.addHandler(handler)

    return logger
