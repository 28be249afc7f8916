import sys

from pairlab import (
    AlgorithmSpec,
    GraphModel,
    GroupSpec,
    RelationOp,
    TrialConfig,
    corrupt,
    cut_metrics_report,
    degree_stats,
    edge_expansion,
    effective_accuracy,
    estimate_threshold,
    gen_graph,
    min_cut,
    predicted_rate,
    recover_cycle,
    recover_exhaustive,
    recover_local_search,
    recover_spectral,
    success,
)
from pairlab.harness import plant_assignment
from pairlab.log import get_logger

logger = get_logger(level="INFO")


def process(n: int, modulus: int, p: float):
    logger.info("====== gen_graph")
    graph = gen_graph(GraphModel.erdos_renyi(0.6), n, seed=1)
    logger.info(f"  {graph}, degrees {degree_stats(graph)}")

    logger.info("====== cut metrics")
    cut = min_cut(graph)
    logger.info(f"  min cut: {cut}")
    logger.info(f"  edge expansion: {edge_expansion(graph)}")
    if cut.connected:
        report = cut_metrics_report(graph, K=10)
        logger.info(f"  alpha in [{report.alpha_lb:.3f}, {report.alpha_ub:.3f}], beta={report.beta}")

    logger.info("====== corrupt")
    group = GroupSpec(modulus=modulus)
    op = RelationOp.difference()
    truth = plant_assignment(graph.n, group, seed=2)
    obs = corrupt(truth, op, graph, group, p, seed=3)
    logger.info(f"  {obs}, expected matching fraction {effective_accuracy(p, modulus):.3f}")

    logger.info("====== recover")
    results = [
        recover_exhaustive(graph, obs, op, group),
        recover_spectral(graph, obs, group),
        recover_local_search(graph, obs, op, group, restarts=3, seed=4),
    ]
    for result in results:
        recovered = result.recovered and success(result.assignment, truth, op, group)
        logger.info(f"  {result.diagnostics.algorithm}: {result}, success={recovered}")

    logger.info("====== recover_cycle")
    large = GroupSpec(modulus=2**61 - 1)
    large_truth = plant_assignment(graph.n, large, seed=2)
    large_obs = corrupt(large_truth, op, graph, large, p, seed=3)
    result = recover_cycle(graph, large_obs, large, k=3)
    logger.info(f"  {result}, pruned {result.diagnostics.pruned_edges} edges")

    logger.info("====== predicted_rate")
    logger.info(f"  {predicted_rate(graph.n, modulus, model=GraphModel.erdos_renyi(0.6))}")

    logger.info("====== estimate_threshold")
    cfg = TrialConfig(
        model=GraphModel.complete(),
        n=n,
        group=group,
        p=0.0,
        algorithm=AlgorithmSpec(name="exhaustive"),
        master_seed=5,
    )
    estimate = estimate_threshold(cfg, [i / 10 for i in range(11)], trials=20)
    logger.info(f"  {estimate}")


if __name__ == "__main__":
    if len(sys.argv) > 4:
        sys.stderr.write("ERROR: Expecting at most N, M and P")
        sys.exit(1)
    args = sys.argv[1:] + ["8", "3", "0.6"][len(sys.argv) - 1 :]
    process(int(args[0]), int(args[1]), float(args[2]))
