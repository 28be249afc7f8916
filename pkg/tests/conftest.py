from __future__ import annotations

import logging
import os
import random
import zlib

import pytest

log = logging.getLogger(__name__)


@pytest.fixture(scope="function", autouse=True)
def random_seed(request) -> int:
    """Seed ``rand_int`` from the test id, ``PAIRLAB_TEST_SEED`` replays a logged seed"""

    seed = int(os.environ.get("PAIRLAB_TEST_SEED", zlib.crc32(request.node.nodeid.encode())))
    log.info(f"{request.node.nodeid}: random seed {seed}")
    random.seed(seed)
    return seed
