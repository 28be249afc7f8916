# SPDX-FileCopyrightText: 2024 pairlab developers
# SPDX-License-Identifier: Apache-2.0
"""Monte Carlo experiments: trials, threshold estimates and parameter sweeps."""
from __future__ import annotations

import csv
import io
import itertools
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from enum import Enum
from functools import partial
from typing import Iterator, List, Optional, Tuple

import numpy as np
from pydantic import (  # pylint: disable=no-name-in-module
    Field,
    ValidationError,
    parse_obj_as,
    root_validator,
    validator,
)
from scipy import stats

from .channel import corrupt
from .exceptions import (
    FormatError,
    InvalidParameter,
    NoCrossing,
    PairlabError,
    SearchSpaceTooLarge,
    UnsupportedOp,
)
from .graphs import GraphModel, gen_graph
from .group import Assignment, GroupSpec, RelationOp
from .internal import FrozenModel, ListableBase
from .rates import RatePrediction, degree_scale, predict
from .recover import (
    DEFAULT_REFINE_ROUNDS,
    SPECTRAL_MAX_MODULUS,
    Diagnostics,
    RecoveryResult,
    RecoveryStatus,
    recover_cycle,
    recover_exhaustive,
    recover_local_search,
    recover_spectral,
    success,
)
from .settings import get_settings

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "model",
    "n",
    "param",
    "M",
    "op",
    "p",
    "algorithm",
    "trials",
    "successes",
    "mean_runtime_ms",
    "master_seed",
    "error",
)
CROSSING = 0.5


# pylint: disable=invalid-name
class AlgorithmName(Enum):
    """Decoder used by a trial"""

    EXHAUSTIVE = "exhaustive"
    CYCLE = "cycle"
    SPECTRAL = "spectral"
    LOCAL = "local"


class AlgorithmSpec(FrozenModel):
    """Decoder with its parameters

    Parameters
    ----------
    name : :obj:`str` or :obj:`AlgorithmName`
        Decoder

    k : int, optional
        Cycle length of the cycle decoder

    restarts : int, optional
        Extra random starts of the local search

    refine_rounds : int, optional
        Ascent sweeps after spectral rounding

    budget : int, optional
        Search or walk budget, default is taken from settings

    Examples
    --------
    .. code:: python

        spec = AlgorithmSpec(name="cycle", k=3)
        spec = AlgorithmSpec.parse_obj({"name": "local", "restarts": 5})
    """

    name: AlgorithmName
    k: int = 3
    restarts: int = 0
    refine_rounds: int = DEFAULT_REFINE_ROUNDS
    budget: Optional[int] = None

    @validator("restarts", "refine_rounds")
    def non_negative(cls, val):  # pylint: disable=no-self-argument
        if val < 0:
            raise ValueError("must be non-negative")
        return val

    @property
    def label(self) -> str:
        if self.name == AlgorithmName.CYCLE:
            return f"cycle(k={self.k})"
        if self.name == AlgorithmName.LOCAL:
            return f"local(r={self.restarts})"
        return self.name.value

    def __str__(self):
        return self.label

    def check(self, n: int, group: GroupSpec, op: RelationOp) -> None:
        """Raise if the decoder cannot run on instances of this size, group and relation."""
        if self.name in (AlgorithmName.CYCLE, AlgorithmName.SPECTRAL) and not op.acts_as_difference(group):
            raise UnsupportedOp(f"{self.name.value} decoder needs the difference relation, got {op}")

        if self.name == AlgorithmName.SPECTRAL and group.modulus > SPECTRAL_MAX_MODULUS:
            raise InvalidParameter(f"spectral decoder needs M <= 2**20, got {group.modulus}")

        if self.name == AlgorithmName.CYCLE:
            k_max = max(3, int(np.floor(np.log2(n))))
            if not 3 <= self.k <= k_max:
                raise InvalidParameter(f"cycle length must lie in [3, {k_max}] for n={n}, got {self.k}")

        if self.name == AlgorithmName.EXHAUSTIVE:
            budget = self.budget if self.budget is not None else get_settings().search_budget
            free = n - 1 if op.acts_as_difference(group) else n
            if group.modulus**free > budget:
                raise SearchSpaceTooLarge(f"search space {group.modulus}**{free} exceeds the budget {budget}")

    def run(self, graph, obs, op: RelationOp, group: GroupSpec, seed: int) -> RecoveryResult:
        if self.name == AlgorithmName.EXHAUSTIVE:
            return recover_exhaustive(graph, obs, op, group, budget=self.budget)
        if self.name == AlgorithmName.CYCLE:
            return recover_cycle(graph, obs, group, k=self.k, budget=self.budget)
        if self.name == AlgorithmName.SPECTRAL:
            return recover_spectral(graph, obs, group, refine_rounds=self.refine_rounds, seed=seed)
        return recover_local_search(graph, obs, op, group, restarts=self.restarts, seed=seed)


def _relation(val):
    if isinstance(val, str):
        return RelationOp.parse_tag(val)
    return val


class TrialConfig(FrozenModel):
    """One experiment cell

    Parameters
    ----------
    model : :obj:`GraphModel`
        Graph ensemble

    n : int
        Number of vertices

    group : :obj:`GroupSpec`
        Group

    op : :obj:`RelationOp` or str, optional
        Relation or its tag, difference by default

    p : float
        Non-corruption rate

    algorithm : :obj:`AlgorithmSpec`
        Decoder

    master_seed : int
        Seed every trial seed is derived from

    fixed_graph : bool, optional
        Use one graph for all trials instead of a fresh one per trial

    Examples
    --------
    .. code:: python

        cfg = TrialConfig(
            model=GraphModel.complete(),
            n=12,
            group=GroupSpec(modulus=2),
            p=0.5,
            algorithm=AlgorithmSpec(name="exhaustive"),
            master_seed=1,
        )
    """

    model: GraphModel
    n: int
    group: GroupSpec
    op: RelationOp = RelationOp.difference()
    p: float
    algorithm: AlgorithmSpec
    master_seed: int
    fixed_graph: bool = False

    _parse_op = validator("op", pre=True, allow_reuse=True)(_relation)

    @validator("n")
    def enough_vertices(cls, val):  # pylint: disable=no-self-argument
        if val < 3:
            raise ValueError(f"n must be at least 3, got {val}")
        return val

    @validator("p")
    def probability(cls, val):  # pylint: disable=no-self-argument
        if not 0 <= val <= 1:
            raise ValueError(f"p must lie in [0, 1], got {val}")
        return val

    @validator("master_seed")
    def non_negative_seed(cls, val):  # pylint: disable=no-self-argument
        if val < 0:
            raise ValueError(f"seed must be non-negative, got {val}")
        return val

    @root_validator(skip_on_failure=True)
    def algorithm_applies(cls, values):  # pylint: disable=no-self-argument
        group, op = values["group"], values["op"]
        values["op"] = op.reduced(group)
        values["algorithm"].check(values["n"], group, values["op"])
        return values

    def with_p(self, p: float) -> TrialConfig:
        return TrialConfig.parse_obj({**self.dict(), "p": p})


class TrialOutcome(FrozenModel):
    """Result of a single trial

    Attributes
    ----------
    trial : int
        Trial index

    success : bool
        Relation matrix recovered exactly

    score : int
        Compatibility score of the estimate

    runtime : float
        Wall time of the trial, seconds

    trial_seed : int
        Seed derived from the master seed and the trial index

    status : :obj:`RecoveryStatus`, optional
        Decoder status, missing if the trial raised

    diagnostics : :obj:`Diagnostics`, optional
        Decoder bookkeeping

    error : str, optional
        Error raised by the trial
    """

    trial: int
    success: bool
    score: int = 0
    runtime: float = 0.0
    trial_seed: int
    status: Optional[RecoveryStatus] = None
    diagnostics: Optional[Diagnostics] = None
    error: Optional[str] = None


class TrialOutcomes(ListableBase):
    __root__: List[TrialOutcome]

    @property
    def successes(self) -> int:
        return sum(outcome.success for outcome in self)

    @property
    def errors(self) -> List[str]:
        return [outcome.error for outcome in self if outcome.error]


def trial_seed(master_seed: int, trial: int) -> int:
    """64-bit seed of trial ``trial``, independent of the other trials."""
    return int(np.random.SeedSequence([master_seed, trial]).generate_state(1, np.uint64)[0])


def stream_seeds(seed: int) -> List[int]:
    """Four independent 64-bit seeds: graph, ground truth, channel and decoder."""
    if seed < 0:
        raise InvalidParameter(f"seed must be non-negative, got {seed}")
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(4, np.uint64)]


def plant_assignment(n: int, group: GroupSpec, seed: int) -> Assignment:
    """
    Uniform random ground truth

    Examples
    --------
    .. code:: python

        truth = plant_assignment(12, GroupSpec(modulus=8), seed=3)
    """

    rng = np.random.default_rng(seed)
    return Assignment.from_array(rng.integers(0, group.modulus, size=n, dtype=np.int64))


def run_trial(cfg: TrialConfig, trial: int) -> TrialOutcome:
    """
    Generate, plant, corrupt, decode and score one instance

    Errors raised by any step are recorded in the outcome.
    """

    seed = trial_seed(cfg.master_seed, trial)
    graph_seed, truth_seed, channel_seed, decoder_seed = stream_seeds(seed)
    if cfg.fixed_graph:
        graph_seed = stream_seeds(cfg.master_seed)[0]

    start = time.perf_counter()
    try:
        graph = gen_graph(cfg.model, cfg.n, graph_seed)
        truth = plant_assignment(cfg.n, cfg.group, truth_seed)
        obs = corrupt(truth, cfg.op, graph, cfg.group, cfg.p, channel_seed)
        result = cfg.algorithm.run(graph, obs, cfg.op, cfg.group, decoder_seed)
    except PairlabError as e:
        log.warning(f"run_trial: trial {trial} of {cfg.algorithm} failed: {e}")
        return TrialOutcome(
            trial=trial,
            success=False,
            runtime=time.perf_counter() - start,
            trial_seed=seed,
            error=f"{type(e).__name__}: {e}",
        )

    recovered = result.recovered and success(result.assignment, truth, cfg.op, cfg.group)  # type: ignore[arg-type]
    return TrialOutcome(
        trial=trial,
        success=recovered,
        score=result.score,
        runtime=time.perf_counter() - start,
        trial_seed=seed,
        status=result.status,
        diagnostics=result.diagnostics,
    )


def run_trials(cfg: TrialConfig, trials: int, threads: int | None = None) -> Tuple[int, TrialOutcomes]:
    """
    Run independent trials of a configuration

    Parameters
    ----------
    cfg : :obj:`TrialConfig`
        Experiment cell

    trials : int
        Number of trials, at least 1

    threads : int, optional
        Worker processes, default is taken from settings. Outcomes do not
        depend on it

    Returns
    -------
    result : :obj:`tuple`
        Number of successes and the outcomes in trial order

    Examples
    --------
    .. code:: python

        successes, outcomes = run_trials(cfg, 200)
    """

    if trials < 1:
        raise InvalidParameter(f"trials must be at least 1, got {trials}")
    if threads is None:
        threads = get_settings().threads

    if threads == 1:
        outcomes = [run_trial(cfg, t) for t in range(trials)]
    else:
        with ProcessPoolExecutor(max_workers=threads) as executor:
            chunk = max(1, trials // (4 * threads))
            outcomes = list(executor.map(partial(run_trial, cfg), range(trials), chunksize=chunk))

    result = TrialOutcomes.parse_obj(outcomes)
    log.info(f"run_trials: {cfg.model} n={cfg.n} {cfg.group} p={cfg.p} {cfg.algorithm}: {result.successes}/{trials}")
    return result.successes, result


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
    """
    Wilson score interval of a binomial proportion

    Examples
    --------
    .. code:: python

        wilson_interval(10, 20)  # (0.299..., 0.700...)
    """

    if trials < 1 or not 0 <= successes <= trials:
        raise InvalidParameter(f"need 0 <= successes <= trials and trials >= 1, got {successes}/{trials}")
    if not 0 < confidence < 1:
        raise InvalidParameter(f"confidence must lie in (0, 1), got {confidence}")

    z = stats.norm.ppf(0.5 + confidence / 2)
    rate = successes / trials
    denominator = 1 + z**2 / trials
    center = (rate + z**2 / (2 * trials)) / denominator
    half = z / denominator * np.sqrt(rate * (1 - rate) / trials + z**2 / (4 * trials**2))
    return max(0.0, float(center - half)), min(1.0, float(center + half))


class ThresholdEstimate(FrozenModel):
    """Empirical location of the one-half success crossing

    Attributes
    ----------
    p_hat : float
        Interpolated crossing, or the last grid point if there is none

    ci_low, ci_high : float
        Crossings of the upper and lower Wilson curves

    trials_per_point : int
        Trials behind every grid point

    grid : :obj:`tuple` of float
        Probability grid

    rates : :obj:`tuple` of float
        Empirical success rate at every grid point

    crossed : bool
        Whether the success rate reached one half on the grid

    Examples
    --------
    .. code:: python

        estimate = estimate_threshold(cfg, [0.1, 0.2, 0.3], 100)
        estimate.raise_for_crossing()
    """

    p_hat: float
    ci_low: float
    ci_high: float
    trials_per_point: int
    grid: Tuple[float, ...]
    rates: Tuple[float, ...]
    crossed: bool = True

    @root_validator(skip_on_failure=True)
    def ordered(cls, values):  # pylint: disable=no-self-argument
        if not values["ci_low"] <= values["p_hat"] <= values["ci_high"]:
            raise ValueError("expected ci_low <= p_hat <= ci_high")
        return values

    def raise_for_crossing(self) -> None:
        """Raise :obj:`pairlab.exceptions.NoCrossing` if the success rate never reached one half."""
        if not self.crossed:
            raise NoCrossing(f"success rate stays below {CROSSING} up to p={self.grid[-1]}")


def _crossing(grid: List[float], curve: List[float]) -> float | None:
    for idx, value in enumerate(curve):
        if value < CROSSING:
            continue
        if idx == 0:
            return grid[0]
        low, high = curve[idx - 1], value
        return grid[idx - 1] + (CROSSING - low) * (grid[idx] - grid[idx - 1]) / (high - low)
    return None


def estimate_threshold(
    cfg: TrialConfig,
    p_grid: List[float],
    trials: int,
    threads: int | None = None,
) -> ThresholdEstimate:
    """
    Smallest non-corruption rate with empirical success of at least one half

    Success is estimated at every grid point; the crossing is linearly
    interpolated between the bracketing points. The confidence interval runs
    from the crossing of the upper Wilson curve to the crossing of the lower one.
    Without a crossing the estimate is flagged and open ended at 1.

    Parameters
    ----------
    cfg : :obj:`TrialConfig`
        Template, its ``p`` is replaced by the grid points

    p_grid : :obj:`list` of float
        Increasing probabilities in ``[0, 1]``

    trials : int
        Trials per grid point

    threads : int, optional
        Worker processes, default is taken from settings

    Examples
    --------
    .. code:: python

        estimate = estimate_threshold(cfg, [i / 50 for i in range(51)], 200)
    """

    grid = [float(p) for p in p_grid]
    if not grid or any(not 0 <= p <= 1 for p in grid) or any(a >= b for a, b in zip(grid, grid[1:])):
        raise InvalidParameter("probability grid must be non-empty, increasing and within [0, 1]")

    rates, upper, lower = [], [], []
    for p in grid:
        successes, _ = run_trials(cfg.with_p(p), trials, threads)
        low, high = wilson_interval(successes, trials)
        rates.append(successes / trials)
        upper.append(high)
        lower.append(low)

    p_hat = _crossing(grid, rates)
    ci_low = _crossing(grid, upper)
    ci_high = _crossing(grid, lower)

    crossed = p_hat is not None
    if not crossed:
        log.warning(f"estimate_threshold: success rate stays below {CROSSING} on the grid")
        p_hat = grid[-1]
    return ThresholdEstimate(
        p_hat=p_hat,
        ci_low=min(ci_low if ci_low is not None else grid[-1], p_hat),
        ci_high=max(ci_high if ci_high is not None else 1.0, p_hat),
        trials_per_point=trials,
        grid=grid,
        rates=rates,
        crossed=crossed,
    )


def predicted_rate(
    n: int,
    M: int,  # pylint: disable=invalid-name
    d_max: float | None = None,
    model: GraphModel | None = None,
) -> RatePrediction:
    """
    Minimax rate with unit constants, from a degree or from a graph model

    Exactly one of ``d_max`` and ``model`` is given; a model is reduced to its
    typical degree, e.g. ``n*q`` for Erdos-Renyi.

    Examples
    --------
    .. code:: python

        predicted_rate(1000, 2, model=GraphModel.erdos_renyi(1.0)).value  # 0.0588
        predicted_rate(1000, 10**6, d_max=999).regime  # Regime.CONNECTIVITY
    """

    if (d_max is None) == (model is None):
        raise InvalidParameter("give exactly one of d_max and model")
    degree = degree_scale(model, n) if model is not None else float(d_max)  # type: ignore[arg-type]
    return predict(n, M, degree)


class SweepGrid(FrozenModel):
    """Cartesian grid of experiment cells

    Parameters
    ----------
    models : :obj:`list` of :obj:`GraphModel`
        Graph ensembles

    n : :obj:`list` of int
        Vertex counts

    M : :obj:`list` of int
        Group sizes

    ops : :obj:`list` of :obj:`RelationOp` or str, optional
        Relations or their tags, difference by default

    p : :obj:`list` of float
        Non-corruption rates

    algorithms : :obj:`list` of :obj:`AlgorithmSpec`
        Decoders

    trials : int
        Trials per cell

    master_seed : int
        Seed shared by all cells

    fixed_graph : bool, optional
        One graph per cell instead of a fresh one per trial

    Examples
    --------
    .. code:: python

        grid = SweepGrid.parse_file("sweep.json")
        rows = sweep(grid, "results.csv")
    """

    models: List[GraphModel]
    n: List[int]
    moduli: List[int] = Field(alias="M")
    ops: List[RelationOp] = [RelationOp.difference()]
    p: List[float]
    algorithms: List[AlgorithmSpec]
    trials: int
    master_seed: int
    fixed_graph: bool = False

    @validator("ops", pre=True)
    def parse_tags(cls, val):  # pylint: disable=no-self-argument
        return parse_obj_as(List[RelationOp], [_relation(item) for item in val])

    @validator("trials")
    def positive_trials(cls, val):  # pylint: disable=no-self-argument
        if val < 1:
            raise ValueError(f"trials must be at least 1, got {val}")
        return val

    def cells(self) -> Iterator[Tuple[dict, Optional[TrialConfig], Optional[str]]]:
        """Cells in a fixed order with ``p`` varying fastest, with the config or the reason it is invalid."""
        for model, n, modulus, op, algorithm, p in itertools.product(
            self.models,
            self.n,
            self.moduli,
            self.ops,
            self.algorithms,
            self.p,
        ):
            key = {"model": model, "n": n, "M": modulus, "op": op, "algorithm": algorithm, "p": p}
            try:
                cfg = TrialConfig(
                    model=model,
                    n=n,
                    group=GroupSpec(modulus=modulus),
                    op=op,
                    p=p,
                    algorithm=algorithm,
                    master_seed=self.master_seed,
                    fixed_graph=self.fixed_graph,
                )
            except (ValidationError, PairlabError) as e:
                yield key, None, " ".join(str(e).split())
                continue
            yield key, cfg, None


class SweepRow(FrozenModel):
    """One CSV row of a sweep"""

    model: str
    n: int
    param: str
    M: int
    op: str
    p: float
    algorithm: str
    trials: int
    successes: int
    mean_runtime_ms: Optional[float] = None
    master_seed: int
    error: Optional[str] = None

    def to_csv(self) -> List[str]:
        runtime = "" if self.mean_runtime_ms is None else f"{self.mean_runtime_ms:.3f}"
        return [
            self.model,
            str(self.n),
            self.param,
            str(self.M),
            self.op,
            repr(self.p),
            self.algorithm,
            str(self.trials),
            str(self.successes),
            runtime,
            str(self.master_seed),
            self.error or "",
        ]


def _row(
    key: dict,
    grid: SweepGrid,
    threads: int | None,
    timing: bool,
    cfg: TrialConfig | None,
    error: str | None,
) -> SweepRow:
    model: GraphModel = key["model"]
    successes = 0
    runtime = None
    if cfg is not None:
        successes, outcomes = run_trials(cfg, grid.trials, threads)
        errors = outcomes.errors
        error = errors[0] if errors else None
        if timing:
            runtime = 1000 * sum(outcome.runtime for outcome in outcomes) / grid.trials

    return SweepRow(
        model=model.kind.value,
        n=key["n"],
        param=model.param_label,
        M=key["M"],
        op=key["op"].tag(GroupSpec(modulus=key["M"])) if cfg is not None else key["op"].tag(),
        p=key["p"],
        algorithm=key["algorithm"].label,
        trials=grid.trials if cfg is not None else 0,
        successes=successes,
        mean_runtime_ms=runtime,
        master_seed=grid.master_seed,
        error=error,
    )


def _existing_rows(path: str | os.PathLike) -> int | None:
    """Number of data rows already written, ``None`` when the file has no header yet."""
    if not os.path.exists(path):
        return None
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows:
        return None
    if tuple(rows[0]) != CSV_COLUMNS:
        raise FormatError(f"{path} does not start with the sweep header")
    return len(rows) - 1


def sweep(
    grid: SweepGrid,
    path: str | os.PathLike | None = None,
    threads: int | None = None,
    timing: bool = False,
) -> List[SweepRow]:
    """
    Run every cell of a grid and write one CSV row per cell

    Parameters
    ----------
    grid : :obj:`SweepGrid`
        Cells to run

    path : str, optional
        CSV file. If it already holds rows, those cells are skipped and the
        remaining rows are appended

    threads : int, optional
        Worker processes per cell, default is taken from settings

    timing : bool, optional
        Fill the ``mean_runtime_ms`` column, which makes the CSV depend on the machine

    Returns
    -------
    rows : :obj:`list` of :obj:`SweepRow`
        Rows computed by this call

    Examples
    --------
    .. code:: python

        rows = sweep(SweepGrid.parse_file("sweep.json"), "results.csv")
    """

    existing = _existing_rows(path) if path is not None else None
    done = existing or 0
    if done:
        log.info(f"sweep: resuming after {done} cells")

    rows = []
    sink = open(path, "a", newline="") if path is not None else None  # pylint: disable=consider-using-with
    try:
        writer = csv.writer(sink, lineterminator="\n") if sink is not None else None
        if writer is not None and existing is None:
            writer.writerow(CSV_COLUMNS)

        for idx, (key, cfg, error) in enumerate(grid.cells()):
            if idx < done:
                continue
            row = _row(key, grid, threads, timing, cfg, error)
            rows.append(row)
            if writer is not None:
                writer.writerow(row.to_csv())
                sink.flush()  # type: ignore[union-attr]
    finally:
        if sink is not None:
            sink.close()

    return rows


def format_rows(rows: List[SweepRow]) -> str:
    """Rows as CSV text with the header."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(row.to_csv() for row in rows)
    return buffer.getvalue()
