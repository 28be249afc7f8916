# SPDX-FileCopyrightText: 2024 pairlab developers
# SPDX-License-Identifier: Apache-2.0
from __future__ import annotations

from pathlib import Path

VERSION_FILE = Path(__file__).with_name("VERSION")
UNKNOWN_VERSION = "0.0.0"


def get_version() -> str:
    """Version written by setuptools-git-versioning, ``0.0.0`` when the file is missing."""
    try:
        return VERSION_FILE.read_text().strip()
    except FileNotFoundError:
        return UNKNOWN_VERSION
