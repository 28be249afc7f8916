from __future__ import annotations

import logging

import pytest
from pydantic import ValidationError

from pairlab.channel import corrupt
from pairlab.exceptions import InvalidParameter, NoCrossing
from pairlab.graphs import GraphModel, gen_graph
from pairlab.group import GroupSpec, RelationOp
from pairlab.harness import (
    CSV_COLUMNS,
    AlgorithmName,
    AlgorithmSpec,
    SweepGrid,
    TrialConfig,
    _crossing,
    estimate_threshold,
    format_rows,
    plant_assignment,
    predicted_rate,
    run_trial,
    run_trials,
    stream_seeds,
    sweep,
    trial_seed,
    wilson_interval,
)
from pairlab.rates import Regime
from pairlab.recover import RecoveryStatus, recover_spectral

from .conftest import DEFAULT_TIMEOUT, rand_int

log = logging.getLogger(__name__)


def trial_config(**kwargs) -> TrialConfig:
    params = {
        "model": GraphModel.complete(),
        "n": 8,
        "group": GroupSpec(modulus=3),
        "p": 1.0,
        "algorithm": AlgorithmSpec(name="exhaustive"),
        "master_seed": 1,
    }
    params.update(kwargs)
    return TrialConfig(**params)


def sweep_grid(**kwargs) -> SweepGrid:
    params = {
        "models": [{"kind": "complete"}, {"kind": "er", "q": 0.6}],
        "n": [6],
        "M": [2, 3],
        "p": [0.5, 1.0],
        "algorithms": [{"name": "exhaustive"}, {"name": "local", "restarts": 1}],
        "trials": 4,
        "master_seed": 11,
    }
    params.update(kwargs)
    return SweepGrid.parse_obj(params)


@pytest.mark.timeout(DEFAULT_TIMEOUT)
@pytest.mark.parametrize(
    "algorithm, label",
    [
        (AlgorithmSpec(name="exhaustive"), "exhaustive"),
        (AlgorithmSpec(name="cycle", k=4), "cycle(k=4)"),
        (AlgorithmSpec(name="spectral"), "spectral"),
        (AlgorithmSpec(name="local", restarts=5), "local(r=5)"),
    ],
)
def test_algorithm_spec_label(algorithm, label):
    assert algorithm.label == label
    assert str(algorithm) == label


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_algorithm_spec_invalid():
    with pytest.raises(ValidationError):
        AlgorithmSpec(name="sdp")

    with pytest.raises(ValidationError):
        AlgorithmSpec(name="local", restarts=-1)


@pytest.mark.timeout(DEFAULT_TIMEOUT)
@pytest.mark.parametrize(
    "kwargs",
    [
        {"algorithm": AlgorithmSpec(name="cycle"), "op": "sum"},
        {"algorithm": AlgorithmSpec(name="spectral"), "op": RelationOp.affine(2, 1)},
        {"algorithm": AlgorithmSpec(name="spectral"), "group": GroupSpec(modulus=2**21)},
        {"algorithm": AlgorithmSpec(name="cycle", k=4)},
        {"algorithm": AlgorithmSpec(name="exhaustive"), "n": 30},
        {"algorithm": AlgorithmSpec(name="exhaustive", budget=100)},
        {"op": RelationOp.affine(3, 1)},
        {"n": 2},
        {"p": 1.5},
        {"master_seed": -1},
    ],
)
def test_trial_config_invalid(kwargs):
    with pytest.raises(ValidationError):
        trial_config(**kwargs)


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_trial_config():
    cfg = trial_config(op="affine:4:5", group=GroupSpec(modulus=3))

    assert cfg.op == RelationOp.affine(1, 2)
    assert cfg.with_p(0.25).p == 0.25
    assert cfg.with_p(0.25).op == cfg.op


@pytest.mark.timeout(DEFAULT_TIMEOUT)
@pytest.mark.parametrize("algorithm", [AlgorithmSpec(name="spectral"), AlgorithmSpec(name="cycle")])
def test_trial_config_accepts_difference_written_as_affine(algorithm):
    cfg = trial_config(algorithm=algorithm, op="affine:1:2", p=1.0)

    successes, outcomes = run_trials(cfg, 3, threads=1)

    assert not outcomes.errors
    assert successes == 3

    with pytest.raises(ValidationError):
        cfg.with_p(-0.5)


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_trial_seeds():
    master = rand_int()

    seeds = [trial_seed(master, t) for t in range(100)]

    assert seeds == [trial_seed(master, t) for t in range(100)]
    assert len(set(seeds)) == 100
    assert all(0 <= seed < 2**64 for seed in seeds)
    assert len(set(stream_seeds(seeds[0]))) == 4


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_plant_assignment():
    group = GroupSpec(modulus=5)

    truth = plant_assignment(50, group, seed=3)

    assert truth == plant_assignment(50, group, seed=3)
    assert len(truth) == 50
    assert set(truth.values) <= set(range(5))


@pytest.mark.timeout(DEFAULT_TIMEOUT)
@pytest.mark.parametrize(
    "algorithm, n, modulus",
    [
        (AlgorithmSpec(name="exhaustive"), 8, 3),
        (AlgorithmSpec(name="cycle", k=3), 12, 2**61 - 1),
        (AlgorithmSpec(name="spectral"), 12, 4),
        (AlgorithmSpec(name="local", restarts=1), 8, 5),
    ],
)
def test_run_trials_noiseless(algorithm, n, modulus):
    cfg = trial_config(n=n, group=GroupSpec(modulus=modulus), algorithm=algorithm, master_seed=rand_int())

    successes, outcomes = run_trials(cfg, 20, threads=1)

    assert successes == 20
    assert len(outcomes) == 20
    assert [outcome.trial for outcome in outcomes] == list(range(20))
    assert all(outcome.status == RecoveryStatus.RECOVERED for outcome in outcomes)
    assert all(outcome.score == n * (n - 1) // 2 for outcome in outcomes)
    assert not outcomes.errors


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_run_trials_pure_noise():
    cfg = trial_config(n=8, group=GroupSpec(modulus=4), p=0.0, master_seed=rand_int())

    successes, _ = run_trials(cfg, 50, threads=1)

    # a spurious exact recovery needs all 28 observations to favour the truth
    assert successes <= 2


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_run_trials_does_not_depend_on_threads():
    cfg = trial_config(
        model=GraphModel.erdos_renyi(0.5),
        n=10,
        group=GroupSpec(modulus=5),
        p=0.6,
        algorithm=AlgorithmSpec(name="local", restarts=2),
        master_seed=rand_int(),
    )

    _, sequential = run_trials(cfg, 12, threads=1)
    _, parallel = run_trials(cfg, 12, threads=3)

    def strip(outcomes):
        return [outcome.copy(update={"runtime": 0.0}) for outcome in outcomes]

    assert strip(sequential) == strip(parallel)


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_run_trials_uses_settings_threads(monkeypatch):
    monkeypatch.setenv("PAIRLAB_THREADS", "2")
    cfg = trial_config(master_seed=rand_int())

    successes, _ = run_trials(cfg, 4)

    assert successes == 4


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_run_trials_records_errors():
    cfg = trial_config(n=16, group=GroupSpec(modulus=101), algorithm=AlgorithmSpec(name="cycle", k=4, budget=1))

    successes, outcomes = run_trials(cfg, 3, threads=1)

    assert successes == 0
    assert len(outcomes.errors) == 3
    assert outcomes.errors[0].startswith("BudgetExceeded")
    assert outcomes[0].status is None


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_run_trials_fixed_graph():
    cfg = trial_config(model=GraphModel.erdos_renyi(0.5), fixed_graph=True)

    _, outcomes = run_trials(cfg, 10, threads=1)

    # noiseless scores equal the edge count of the shared graph
    assert len({outcome.score for outcome in outcomes}) == 1


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_run_trial_is_reproducible():
    cfg = trial_config(p=0.5, master_seed=rand_int())

    first = run_trial(cfg, 7)
    second = run_trial(cfg, 7)

    assert first.copy(update={"runtime": 0.0}) == second.copy(update={"runtime": 0.0})
    assert first.trial_seed == trial_seed(cfg.master_seed, 7)


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_spectral_algorithm_uses_decoder_seed():
    group = GroupSpec(modulus=3)
    op = RelationOp.difference()
    graph = gen_graph(GraphModel.complete(), 20, seed=rand_int())
    truth = plant_assignment(graph.n, group, seed=rand_int())
    obs = corrupt(truth, op, graph, group, p=0.5, seed=rand_int())
    seed = rand_int(1, 10**6)

    result = AlgorithmSpec(name="spectral").run(graph, obs, op, group, seed)

    assert result == recover_spectral(graph, obs, group, seed=seed)


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_run_trials_invalid():
    with pytest.raises(InvalidParameter):
        run_trials(trial_config(), 0)


@pytest.mark.timeout(DEFAULT_TIMEOUT)
@pytest.mark.parametrize(
    "successes, trials, expected",
    [
        (10, 20, (0.2993, 0.7007)),
        (0, 10, (0.0, 0.2775)),
        (10, 10, (0.7225, 1.0)),
    ],
)
def test_wilson_interval(successes, trials, expected):
    low, high = wilson_interval(successes, trials)

    assert low == pytest.approx(expected[0], abs=1e-3)
    assert high == pytest.approx(expected[1], abs=1e-3)


@pytest.mark.timeout(DEFAULT_TIMEOUT)
@pytest.mark.parametrize("successes, trials, confidence", [(3, 0, 0.95), (5, 4, 0.95), (-1, 4, 0.95), (2, 4, 1.0)])
def test_wilson_interval_invalid(successes, trials, confidence):
    with pytest.raises(InvalidParameter):
        wilson_interval(successes, trials, confidence)


@pytest.mark.timeout(DEFAULT_TIMEOUT)
@pytest.mark.parametrize(
    "curve, expected",
    [
        ([0.0, 0.4, 0.8], 0.225),
        ([0.6, 0.9, 1.0], 0.1),
        ([0.0, 0.5, 1.0], 0.2),
        ([0.0, 0.1, 0.2], None),
    ],
)
def test_crossing(curve, expected):
    result = _crossing([0.1, 0.2, 0.3], curve)

    if expected is None:
        assert result is None
    else:
        assert result == pytest.approx(expected)


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_estimate_threshold_always_successful():
    cfg = trial_config(n=3, group=GroupSpec(modulus=2))

    estimate = estimate_threshold(cfg, [0.99, 1.0], 20, threads=1)

    assert estimate.crossed
    assert estimate.p_hat == 0.99
    assert estimate.ci_low == estimate.ci_high == 0.99
    assert estimate.grid == (0.99, 1.0)
    assert estimate.rates[-1] == 1.0
    estimate.raise_for_crossing()


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_estimate_threshold_without_crossing():
    cfg = trial_config(n=8, group=GroupSpec(modulus=4))

    estimate = estimate_threshold(cfg, [0.0, 0.05], 20, threads=1)

    assert not estimate.crossed
    assert estimate.p_hat == 0.05
    assert estimate.ci_high == 1.0
    assert estimate.ci_low <= estimate.p_hat

    with pytest.raises(NoCrossing):
        estimate.raise_for_crossing()


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_estimate_threshold_interval_brackets_estimate():
    cfg = trial_config(n=8, group=GroupSpec(modulus=2), master_seed=rand_int())

    estimate = estimate_threshold(cfg, [i / 10 for i in range(11)], 30, threads=1)

    assert estimate.crossed
    assert estimate.ci_low <= estimate.p_hat <= estimate.ci_high
    assert estimate.trials_per_point == 30
    assert estimate.rates[-1] == 1.0


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_estimate_threshold_refined_grid_stays_in_bracket():
    cfg = trial_config(n=8, group=GroupSpec(modulus=2), master_seed=rand_int())
    coarse_grid = [i / 5 for i in range(6)]
    fine_grid = [i / 10 for i in range(11)]

    coarse = estimate_threshold(cfg, coarse_grid, 40, threads=1)
    fine = estimate_threshold(cfg, fine_grid, 40, threads=1)

    # trial seeds do not depend on p, so shared grid points see the same instances
    assert fine.rates[::2] == coarse.rates
    upper = next(idx for idx, rate in enumerate(coarse.rates) if rate >= 0.5)
    lower = coarse_grid[max(upper - 1, 0)]
    assert lower <= fine.p_hat <= coarse_grid[upper]


@pytest.mark.timeout(DEFAULT_TIMEOUT)
@pytest.mark.parametrize("grid", [[], [0.5, 0.5], [0.6, 0.4], [0.5, 1.5]])
def test_estimate_threshold_invalid_grid(grid):
    with pytest.raises(InvalidParameter):
        estimate_threshold(trial_config(), grid, 10)


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_predicted_rate():
    from_model = predicted_rate(1000, 2, model=GraphModel.erdos_renyi(1.0))
    from_degree = predicted_rate(1000, 10**6, d_max=999)

    assert from_model.regime == Regime.INFORMATION
    assert from_model.value == pytest.approx(0.0588, abs=1e-4)
    assert from_degree.regime == Regime.CONNECTIVITY
    assert from_degree.value == pytest.approx(0.0069, abs=1e-4)

    with pytest.raises(InvalidParameter):
        predicted_rate(1000, 2)

    with pytest.raises(InvalidParameter):
        predicted_rate(1000, 2, d_max=10, model=GraphModel.ring())


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_sweep_grid_cells():
    grid = sweep_grid(ops=["diff", "sum"], algorithms=[{"name": "exhaustive"}, {"name": "cycle"}])

    cells = list(grid.cells())

    assert len(cells) == 2 * 1 * 2 * 2 * 2 * 2
    assert [key["p"] for key, _, _ in cells[:2]] == [0.5, 1.0]
    assert grid.moduli == [2, 3]
    assert grid.ops == [RelationOp.difference(), RelationOp.sum()]

    invalid = [(key, error) for key, cfg, error in cells if cfg is None]
    assert invalid
    assert all(key["algorithm"].name == AlgorithmName.CYCLE and key["op"] == RelationOp.sum() for key, _ in invalid)
    assert all("difference relation" in error for _, error in invalid)


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_sweep_grid_invalid():
    with pytest.raises(ValidationError):
        sweep_grid(trials=0)

    with pytest.raises(ValidationError):
        sweep_grid(ops=["mul"])


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_sweep_single_cell():
    grid = sweep_grid(models=[{"kind": "complete"}], M=[3], p=[1.0], algorithms=[{"name": "exhaustive"}])

    rows = sweep(grid, threads=1)

    assert len(rows) == 1
    row = rows[0]
    assert (row.model, row.n, row.M, row.op, row.p, row.algorithm) == ("complete", 6, 3, "diff", 1.0, "exhaustive")
    assert row.successes == row.trials == 4
    assert row.mean_runtime_ms is None
    assert row.to_csv() == ["complete", "6", "", "3", "diff", "1.0", "exhaustive", "4", "4", "", "11", ""]


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_sweep_records_invalid_cells():
    grid = sweep_grid(models=[{"kind": "complete"}], M=[3], p=[1.0], ops=["sum"], algorithms=[{"name": "spectral"}])

    rows = sweep(grid, threads=1)

    assert rows[0].trials == 0
    assert rows[0].successes == 0
    assert "difference relation" in rows[0].error


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_sweep_writes_reproducible_csv(tmp_path):
    grid = sweep_grid()
    first, second = tmp_path / "first.csv", tmp_path / "second.csv"

    rows = sweep(grid, first, threads=1)
    sweep(grid, second, threads=1)

    assert first.read_bytes() == second.read_bytes()
    assert first.read_text() == format_rows(rows)
    assert first.read_text().splitlines()[0] == ",".join(CSV_COLUMNS)
    assert len(rows) == 16


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_sweep_resumes(tmp_path):
    grid = sweep_grid()
    full, partial = tmp_path / "full.csv", tmp_path / "partial.csv"
    sweep(grid, full, threads=1)
    lines = full.read_text().splitlines(keepends=True)
    partial.write_text("".join(lines[:6]))

    rows = sweep(grid, partial, threads=1)

    assert len(rows) == 11
    assert partial.read_bytes() == full.read_bytes()


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_sweep_resumes_after_header_only(tmp_path):
    grid = sweep_grid(models=[{"kind": "complete"}], M=[3], p=[1.0], algorithms=[{"name": "exhaustive"}])
    path = tmp_path / "results.csv"
    path.write_text(",".join(CSV_COLUMNS) + "\n")

    sweep(grid, path, threads=1)

    assert len(path.read_text().splitlines()) == 2


@pytest.mark.timeout(DEFAULT_TIMEOUT)
def test_sweep_timing_column():
    grid = sweep_grid(models=[{"kind": "complete"}], M=[3], p=[1.0], algorithms=[{"name": "exhaustive"}])

    rows = sweep(grid, threads=1, timing=True)

    assert rows[0].mean_runtime_ms is not None
    assert rows[0].mean_runtime_ms >= 0
