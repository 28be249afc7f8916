# SPDX-FileCopyrightText: 2024 pairlab developers
# SPDX-License-Identifier: Apache-2.0
"""Command line interface.

Exit codes: 0 on success, 1 on usage errors, 2 on invalid input or exceeded guards.
Decoder failures are results and exit with 0.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Callable, List, Optional

from pydantic import ValidationError  # pylint: disable=no-name-in-module

from .channel import (
    corrupt,
    format_observations,
    read_assignment,
    read_observations,
    write_assignment,
)
from .cutmetrics import NK_MAX_N, cut_metrics_report
from .exceptions import FormatError, InvalidParameter, PairlabError
from .graphs import (
    GraphKind,
    GraphModel,
    components,
    degree_stats,
    edge_expansion,
    format_graph,
    gen_graph,
    min_cut,
    neighborhood_overlap,
    read_graph,
    triangle_count,
)
from .group import GroupSpec, RelationOp
from .harness import (
    AlgorithmName,
    AlgorithmSpec,
    SweepGrid,
    TrialConfig,
    estimate_threshold,
    format_rows,
    plant_assignment,
    predicted_rate,
    stream_seeds,
    sweep,
)
from .log import get_logger
from .rates import converse_rate
from .recover import DEFAULT_REFINE_ROUNDS, success
from .version import get_version

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ERROR = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w") as f:
        f.write(text)


def _dump(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _graph_model(args: argparse.Namespace) -> GraphModel:
    params = {"q": args.q, "r": args.r, "k": args.k_lattice}
    return GraphModel(kind=args.model, **{name: value for name, value in params.items() if value is not None})


def _algorithm(args: argparse.Namespace) -> AlgorithmSpec:
    return AlgorithmSpec(
        name=args.alg,
        k=args.k,
        restarts=args.restarts,
        refine_rounds=args.refine_rounds,
        budget=args.budget,
    )


def _probability_grid(text: str) -> List[float]:
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"grid must look like start:stop:step, got {text!r}") from e
    if step <= 0 or not 0 <= start <= stop <= 1:
        raise argparse.ArgumentTypeError(f"grid needs 0 <= start <= stop <= 1 and step > 0, got {text!r}")
    count = int(round((stop - start) / step)) + 1
    return [p for p in (round(start + i * step, 10) for i in range(count)) if p <= 1]


def cmd_gen(args: argparse.Namespace) -> int:
    graph = gen_graph(_graph_model(args), args.n, args.seed)
    _emit(format_graph(graph), args.out)
    return EXIT_OK


def cmd_corrupt(args: argparse.Namespace) -> int:
    graph = read_graph(args.graph)
    group = GroupSpec(modulus=args.M)
    op = RelationOp.parse_tag(args.op)
    _, truth_seed, channel_seed, _ = stream_seeds(args.seed)

    if args.truth is not None:
        truth, truth_group = read_assignment(args.truth)
        if truth_group != group:
            raise InvalidParameter(f"ground truth is over {truth_group}, not {group}")
        truth.check(group, graph.n)
    else:
        truth = plant_assignment(graph.n, group, truth_seed)

    obs = corrupt(truth, op, graph, group, args.p, channel_seed)
    if args.truth_out is not None:
        write_assignment(truth, group, args.truth_out)
    _emit(format_observations(obs), args.out)
    return EXIT_OK


def cmd_recover(args: argparse.Namespace) -> int:
    graph = read_graph(args.graph)
    obs = read_observations(args.obs, graph)
    if args.alg == AlgorithmName.LOCAL.value and args.seed is None:
        raise InvalidParameter("local search is randomized and needs --seed")

    result = _algorithm(args).run(graph, obs, obs.op, obs.group, args.seed or 0)
    payload = json.loads(result.json())
    if args.truth is not None:
        truth, _ = read_assignment(args.truth)
        payload["success"] = result.recovered and success(result.assignment, truth, obs.op, obs.group)
    _emit(_dump(payload), args.out)
    return EXIT_OK


def cmd_metrics(args: argparse.Namespace) -> int:
    graph = read_graph(args.graph)
    stats = degree_stats(graph)
    cut = min_cut(graph)
    expansion = edge_expansion(graph) if graph.n >= 2 else None

    report = None
    if graph.n <= NK_MAX_N and cut.connected and stats.d_min >= 1:
        report = json.loads(cut_metrics_report(graph, args.K).json())

    payload = {
        "n": graph.n,
        "m": graph.m,
        "degree": json.loads(stats.json()),
        "components": components(graph),
        "min_cut": cut.value,
        "connected": cut.connected,
        "edge_expansion": json.loads(expansion.json()) if expansion is not None else None,
        "neighborhood_overlap": neighborhood_overlap(graph),
        "triangles": triangle_count(graph),
        "cut_metrics": report,
    }
    _emit(_dump(payload), args.out)
    return EXIT_OK


def cmd_predict(args: argparse.Namespace) -> int:
    if args.model is not None:
        prediction = predicted_rate(args.n, args.M, model=_graph_model(args))
    else:
        prediction = predicted_rate(args.n, args.M, d_max=args.d_max)

    payload = {
        "predicted": json.loads(prediction.json()),
        "converse": json.loads(converse_rate(args.n, args.M, prediction.degree).json()),
    }
    _emit(_dump(payload), args.out)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    with open(args.config) as f:
        try:
            raw = json.load(f)
        except ValueError as e:
            raise FormatError(f"sweep config is not valid JSON: {e}") from e
    raw["master_seed"] = args.seed
    if args.trials is not None:
        raw["trials"] = args.trials
    grid = SweepGrid.parse_obj(raw)

    rows = sweep(grid, args.out, timing=args.timing)
    if args.out is None:
        sys.stdout.write(format_rows(rows))
    return EXIT_OK


def cmd_threshold(args: argparse.Namespace) -> int:
    cfg = TrialConfig(
        model=_graph_model(args),
        n=args.n,
        group=GroupSpec(modulus=args.M),
        op=args.op,
        p=args.grid[0],
        algorithm=_algorithm(args),
        master_seed=args.seed,
        fixed_graph=args.fixed_graph,
    )
    estimate = estimate_threshold(cfg, args.grid, args.trials)
    _emit(_dump(json.loads(estimate.json())), args.out)
    return EXIT_OK


def _add_model_flags(parser: argparse.ArgumentParser, required: bool = True) -> None:
    parser.add_argument("--model", choices=[kind.value for kind in GraphKind], required=required)
    parser.add_argument("--q", type=float, help="edge probability (er) or rewiring probability (sw)")
    parser.add_argument("--r", type=float, help="chord distance threshold (geo)")
    parser.add_argument("--k-lattice", type=int, help="even lattice degree (sw)")


def _add_algorithm_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alg", choices=[name.value for name in AlgorithmName], required=True)
    parser.add_argument("--k", type=int, default=3, help="cycle length of the cycle decoder")
    parser.add_argument("--restarts", type=int, default=0, help="extra random starts of the local search")
    parser.add_argument("--refine-rounds", type=int, default=DEFAULT_REFINE_ROUNDS)
    parser.add_argument("--budget", type=int, help="search or walk budget")


def _add_out(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("-o", "--out", help="output file, stdout by default")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pairlab", description="Exact recovery of pairwise relations on graphs")
    parser.add_argument("--version", action="version", version=get_version())
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging, repeatable")
    subparsers = parser.add_subparsers(dest="command", required=True)

    def command(name: str, handler: Callable[[argparse.Namespace], int], help_text: str) -> argparse.ArgumentParser:
        sub = subparsers.add_parser(name, help=help_text, description=help_text)
        sub.set_defaults(handler=handler)
        return sub

    gen = command("gen", cmd_gen, "sample a measurement graph")
    _add_model_flags(gen)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--seed", type=int, required=True)
    _add_out(gen)

    corrupt_cmd = command("corrupt", cmd_corrupt, "sample observations of a planted assignment")
    corrupt_cmd.add_argument("--graph", required=True)
    corrupt_cmd.add_argument("--M", type=int, required=True)
    corrupt_cmd.add_argument("--op", default="diff", help="diff, sum or affine:a:b")
    corrupt_cmd.add_argument("--p", type=float, required=True)
    corrupt_cmd.add_argument("--seed", type=int, required=True)
    corrupt_cmd.add_argument("--truth", help="ground truth file, planted from the seed by default")
    corrupt_cmd.add_argument("--truth-out", help="write the ground truth to this file")
    _add_out(corrupt_cmd)

    recover = command("recover", cmd_recover, "decode observations")
    recover.add_argument("--graph", required=True)
    recover.add_argument("--obs", required=True)
    _add_algorithm_flags(recover)
    recover.add_argument("--seed", type=int, help="seed of the local search")
    recover.add_argument("--truth", help="ground truth file; adds success to the output")
    _add_out(recover)

    metrics = command("metrics", cmd_metrics, "graph cut statistics")
    metrics.add_argument("--graph", required=True)
    metrics.add_argument("--K", type=float, default=10.0, help="constant of the cross-cut statistic")
    _add_out(metrics)

    predict = command("predict", cmd_predict, "rate formulas with unit constants")
    predict.add_argument("--n", type=int, required=True)
    predict.add_argument("--M", type=int, required=True)
    predict.add_argument("--d-max", type=float)
    _add_model_flags(predict, required=False)
    _add_out(predict)

    sweep_cmd = command("sweep", cmd_sweep, "run a grid of experiments into a CSV file")
    sweep_cmd.add_argument("--config", required=True, help="JSON sweep grid")
    sweep_cmd.add_argument("--seed", type=int, required=True)
    sweep_cmd.add_argument("--trials", type=int)
    sweep_cmd.add_argument("--timing", action="store_true", help="fill the runtime column")
    _add_out(sweep_cmd)

    threshold = command("threshold", cmd_threshold, "locate the one-half success crossing")
    _add_model_flags(threshold)
    threshold.add_argument("--n", type=int, required=True)
    threshold.add_argument("--M", type=int, required=True)
    threshold.add_argument("--op", default="diff")
    _add_algorithm_flags(threshold)
    threshold.add_argument("--trials", type=int, required=True)
    threshold.add_argument("--seed", type=int, required=True)
    threshold.add_argument("--grid", type=_probability_grid, default=_probability_grid("0:1:0.02"))
    threshold.add_argument("--fixed-graph", action="store_true")
    _add_out(threshold)

    return parser


def main(argv: List[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    if args.command == "predict" and (args.model is None) == (args.d_max is None):
        parser.print_usage(sys.stderr)
        sys.stderr.write("pairlab: error: predict needs exactly one of --d-max and --model\n")
        return EXIT_USAGE

    level = max(logging.DEBUG, logging.WARNING - 10 * args.verbose) if args.verbose else None
    try:
        get_logger(level=level)
        log.debug(f"main: {args.command} {argv if argv is not None else sys.argv[1:]}")
        return args.handler(args)
    except ValidationError as e:
        sys.stderr.write(f"pairlab: error: {' '.join(str(e).split())}\n")
    except (PairlabError, OSError) as e:
        sys.stderr.write(f"pairlab: error: {e}\n")
    return EXIT_ERROR
