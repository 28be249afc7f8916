from __future__ import annotations

import json
import logging
import os
import random
from pathlib import Path
from typing import Callable, List

import pytest

from pairlab.cli import main

log = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 60
MONTE_CARLO_TIMEOUT = 600


def rand_int(a: int = 0, b: int = 100) -> int:
    return random.randint(a, b)


def read_json(path: str | os.PathLike) -> dict:
    with open(path) as f:
        return json.load(f)


@pytest.fixture(scope="function")
def workdir(tmp_path, monkeypatch) -> Path:
    for name in ("THREADS", "SEARCH_BUDGET", "WALK_BUDGET", "LOG_LEVEL"):
        monkeypatch.delenv(f"PAIRLAB_{name}", raising=False)
    return tmp_path


@pytest.fixture(scope="function")
def pairlab(workdir) -> Callable[..., int]:
    """Run the command line with paths relative to the working directory"""

    def run(*argv: str) -> int:
        args: List[str] = [str(arg) for arg in argv]
        log.debug(f"pairlab {' '.join(args)}")
        return main(args)

    return run


@pytest.fixture(scope="function")
def pipeline(workdir, pairlab) -> Callable[[str], Path]:
    """Scripted gen, corrupt and recover run writing into a fresh subdirectory"""

    def run(name: str) -> Path:
        out = workdir / name
        out.mkdir()
        assert pairlab("gen", "--model", "er", "--q", "0.6", "--n", "9", "--seed", "11", "-o", out / "g.txt") == 0
        assert (
            pairlab(
                "corrupt",
                "--graph",
                out / "g.txt",
                "--M",
                "3",
                "--p",
                "0.7",
                "--seed",
                "12",
                "--truth-out",
                out / "truth.txt",
                "-o",
                out / "obs.txt",
            )
            == 0
        )
        for alg in ("exhaustive", "spectral"):
            assert (
                pairlab(
                    "recover",
                    "--graph",
                    out / "g.txt",
                    "--obs",
                    out / "obs.txt",
                    "--alg",
                    alg,
                    "--truth",
                    out / "truth.txt",
                    "-o",
                    out / f"{alg}.json",
                )
                == 0
            )
        assert (
            pairlab(
                "recover",
                "--graph",
                out / "g.txt",
                "--obs",
                out / "obs.txt",
                "--alg",
                "local",
                "--restarts",
                "2",
                "--seed",
                "13",
                "-o",
                out / "local.json",
            )
            == 0
        )
        return out

    return run
