# SPDX-FileCopyrightText: 2024 pairlab developers
# SPDX-License-Identifier: Apache-2.0
from __future__ import annotations

from pydantic import BaseModel  # pylint: disable=no-name-in-module


class FrozenModel(BaseModel):
    """Immutable model shared between workers"""

    class Config:
        frozen = True
        allow_population_by_field_name = True


class ListableBase(BaseModel):
    __root__: list

    class Config:
        frozen = True

    def __iter__(self):
        return iter(self.__root__)

    def __getitem__(self, item):
        return self.__root__[item]

    def __contains__(self, item):
        return item in self.__root__

    def __len__(self):
        return len(self.__root__)
