from __future__ import annotations

import itertools
import logging
import random
from typing import List, Tuple

import numpy as np

from pairlab.channel import ObservationSet, corrupt
from pairlab.graphs import Graph, GraphModel, gen_graph
from pairlab.group import Assignment, GroupSpec, RelationOp

log = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 60
MONTE_CARLO_TIMEOUT = 600


def rand_int(a: int = 0, b: int = 100) -> int:
    return random.randint(a, b)


def rand_assignment(n: int, group: GroupSpec, seed: int) -> Assignment:
    rng = np.random.default_rng(seed)
    return Assignment.from_array(rng.integers(0, group.modulus, size=n))


def ring(n: int) -> Graph:
    return Graph(n=n, edges=[(i, (i + 1) % n) for i in range(n)])


def complete(n: int) -> Graph:
    return Graph(n=n, edges=list(itertools.combinations(range(n), 2)))


def instance(
    graph: Graph,
    modulus: int,
    p: float,
    seed: int,
    op: RelationOp | None = None,
) -> Tuple[Assignment, ObservationSet, RelationOp, GroupSpec]:
    group = GroupSpec(modulus=modulus)
    op = op or RelationOp.difference()
    truth = rand_assignment(graph.n, group, seed)
    obs = corrupt(truth, op, graph, group, p, seed)
    return truth, obs, op, group


def connected_er(n: int, q: float, seed: int) -> Graph:
    """First connected Erdos-Renyi sample at or after ``seed``."""
    for attempt in itertools.count(seed):
        graph = gen_graph(GraphModel.erdos_renyi(q), n, attempt)
        if brute_force_components(graph) == 1:
            return graph
    raise AssertionError("unreachable")


def brute_force_boundary(graph: Graph, subset: set) -> int:
    return sum((i in subset) != (j in subset) for i, j in graph.edges)


def brute_force_nk(graph: Graph, k: int) -> int:
    count = 0
    for size in range(graph.n + 1):
        for subset in itertools.combinations(range(graph.n), size):
            if brute_force_boundary(graph, set(subset)) <= k:
                count += 1
    return count


def brute_force_components(graph: Graph) -> int:
    parent = list(range(graph.n))

    def find(v: int) -> int:
        while parent[v] != v:
            v = parent[v]
        return v

    for i, j in graph.edges:
        parent[find(i)] = find(j)
    return len({find(v) for v in range(graph.n)})


def brute_force_score(obs: ObservationSet, x) -> int:
    alpha, beta = obs.op.coefficients(obs.group)
    m = obs.group.modulus
    return sum((alpha * x[i] + beta * x[j]) % m == y for (i, j), y in zip(obs.graph.edges, obs.values))


def brute_force_maximizers(obs: ObservationSet) -> Tuple[int, List[Tuple[int, ...]]]:
    """Best score over all ``M**n`` assignments and every assignment attaining it."""
    best, winners = -1, []
    for x in itertools.product(range(obs.group.modulus), repeat=obs.graph.n):
        score = brute_force_score(obs, x)
        if score > best:
            best, winners = score, [x]
        elif score == best:
            winners.append(x)
    return best, winners


def brute_force_relation_matrix(x, op: RelationOp, group: GroupSpec) -> List[List[int]]:
    alpha, beta = op.coefficients(group)
    return [[(alpha * a + beta * b) % group.modulus for b in x] for a in x]
