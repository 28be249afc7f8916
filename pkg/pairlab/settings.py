# SPDX-FileCopyrightText: 2024 pairlab developers
# SPDX-License-Identifier: Apache-2.0
from __future__ import annotations

from pydantic import BaseSettings, validator  # pylint: disable=no-name-in-module

DEFAULT_BUDGET = 10**8


class Settings(BaseSettings):
    """Runtime configuration read from ``PAIRLAB_*`` environment variables

    Parameters
    ----------
    threads : int, optional
        Maximum number of worker processes used by the experiment harness.
        Read from ``PAIRLAB_THREADS``.

    search_budget : int, optional
        Largest search space the exhaustive decoder accepts.
        Read from ``PAIRLAB_SEARCH_BUDGET``.

    walk_budget : int, optional
        Largest number of walk steps the cycle method may enumerate.
        Read from ``PAIRLAB_WALK_BUDGET``.

    log_level : str, optional
        Default level of the ``pairlab`` logger configured by the CLI.
        Read from ``PAIRLAB_LOG_LEVEL``.

    Examples
    --------
    .. code:: python

        settings = Settings()
        settings = Settings(threads=4)
    """

    threads: int = 1
    search_budget: int = DEFAULT_BUDGET
    walk_budget: int = DEFAULT_BUDGET
    log_level: str = "WARNING"

    class Config:
        env_prefix = "PAIRLAB_"
        frozen = True

    @validator("threads", "search_budget", "walk_budget")
    def positive(cls, val):  # pylint: disable=no-self-argument
        if val < 1:
            raise ValueError("must be at least 1")
        return val

    @validator("log_level")
    def upper_level(cls, val):  # pylint: disable=no-self-argument
        return val.upper()


def get_settings() -> Settings:
    return Settings()
