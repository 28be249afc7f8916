# SPDX-FileCopyrightText: 2024 pairlab developers
# SPDX-License-Identifier: Apache-2.0
"""Recovery algorithms and the exact recovery criterion.

All decoders take the measurement graph and its observations and return a
:obj:`RecoveryResult`. Algorithmic failures are reported in the result;
exceptions are reserved for invalid input and exceeded guards.
"""
from __future__ import annotations

import logging
from enum import Enum
from typing import List, Optional, Tuple

import networkx as nx
import numpy as np
from pydantic import root_validator  # pylint: disable=no-name-in-module
from scipy import sparse

from .channel import ObservationSet
from .exceptions import (
    BudgetExceeded,
    InvalidParameter,
    SearchSpaceTooLarge,
    UnsupportedOp,
)
from .graphs import Graph, components
from .group import (
    Assignment,
    AssignmentLike,
    GroupSpec,
    RelationOp,
    as_values,
    combine,
    mulmod,
    solve_left,
    solve_right,
)
from .internal import FrozenModel
from .settings import get_settings

__all__ = [
    "Assignment",
    "Diagnostics",
    "FailureReason",
    "RecoveryResult",
    "RecoveryStatus",
    "compatibility_score",
    "recover_cycle",
    "recover_exhaustive",
    "recover_local_search",
    "recover_spectral",
    "success",
]

log = logging.getLogger(__name__)

SPECTRAL_MAX_MODULUS = 2**20
POWER_TOLERANCE = 1e-9
POWER_MAX_ITERATIONS = 1000
DEFAULT_REFINE_ROUNDS = 10
INCUMBENT_RESTARTS = 4
SEARCH_CHUNK = 2**15


# pylint: disable=invalid-name
class RecoveryStatus(Enum):
    """Outcome of a decoder"""

    RECOVERED = "recovered"
    """ Decoder produced an assignment """

    FAILED = "failed"
    """ Decoder gave up, see :obj:`FailureReason` """


class FailureReason(Enum):
    """Why the cycle method gave up"""

    DISCONNECTED = "disconnected"
    """ Surviving edges do not span all vertices """

    INCONSISTENT = "inconsistent"
    """ Surviving edges contradict the spanning tree assignment """


class Diagnostics(FrozenModel):
    """Decoder bookkeeping

    Attributes
    ----------
    algorithm : str
        Decoder name

    pruned_edges : int
        Edges dropped before assembling the assignment, cycle method only

    components : int
        Connected components of the graph the assignment is assembled on

    tie : bool
        Maximizers of the compatibility score induce distinct relation matrices

    budget : int, optional
        Search or walk budget in force

    work : int
        Search nodes, walk steps or power iterations spent

    cycles_checked : int, optional
        Cycles whose observation sum was tested

    converged : bool, optional
        Power iteration reached its tolerance

    sweeps : int, optional
        Coordinate ascent sweeps performed

    restarts : int, optional
        Random restarts performed
    """

    algorithm: str
    pruned_edges: int = 0
    components: int = 1
    tie: bool = False
    budget: Optional[int] = None
    work: int = 0
    cycles_checked: Optional[int] = None
    converged: Optional[bool] = None
    sweeps: Optional[int] = None
    restarts: Optional[int] = None


class RecoveryResult(FrozenModel):
    """Decoder output

    Attributes
    ----------
    status : :obj:`RecoveryStatus`
        Whether an assignment was produced

    reason : :obj:`FailureReason`, optional
        Failure cause, only for failed results

    assignment : :obj:`Assignment`, optional
        Estimate, only for recovered results. For the difference relation it is
        shifted so that ``x_0 = 0``

    score : int
        Compatibility score of ``assignment``, 0 for failed results

    diagnostics : :obj:`Diagnostics`
        Decoder bookkeeping

    Examples
    --------
    .. code:: python

        result = recover_exhaustive(graph, obs, RelationOp.difference(), group)
        if result.recovered:
            print(result.assignment)
    """

    status: RecoveryStatus
    reason: Optional[FailureReason] = None
    assignment: Optional[Assignment] = None
    score: int = 0
    diagnostics: Diagnostics

    @root_validator(skip_on_failure=True)
    def assignment_iff_recovered(cls, values):  # pylint: disable=no-self-argument
        recovered = values["status"] == RecoveryStatus.RECOVERED
        if recovered != (values.get("assignment") is not None):
            raise ValueError("assignment is present exactly for recovered results")
        if recovered == (values.get("reason") is not None):
            raise ValueError("failure reason is present exactly for failed results")
        return values

    @property
    def recovered(self) -> bool:
        return self.status == RecoveryStatus.RECOVERED

    @classmethod
    def failed(cls, reason: FailureReason, diagnostics: Diagnostics) -> RecoveryResult:
        return cls(status=RecoveryStatus.FAILED, reason=reason, diagnostics=diagnostics)

    def __str__(self):
        if self.recovered:
            return f"recovered score={self.score}"
        return f"failed ({self.reason.value})"  # type: ignore[union-attr]


def _check_inputs(graph: Graph, obs: ObservationSet, op: RelationOp, group: GroupSpec) -> RelationOp:
    if graph.n != obs.graph.n or graph.edges != obs.graph.edges:
        raise InvalidParameter("observations do not belong to the graph")
    if group != obs.group:
        raise InvalidParameter(f"observations live in {obs.group}, not {group}")
    op = op.reduced(group)
    if op.coefficients(group) != obs.op.reduced(group).coefficients(group):
        raise InvalidParameter(f"observations are of relation {obs.op}, not {op}")
    if op.acts_as_difference(group):
        return RelationOp.difference()
    return op


def _require_difference(graph: Graph, obs: ObservationSet, group: GroupSpec) -> RelationOp:
    if not obs.op.acts_as_difference(obs.group):
        raise UnsupportedOp(f"algorithm needs the difference relation, got {obs.op}")
    return _check_inputs(graph, obs, RelationOp.difference(), group)


def compatibility_score(
    graph: Graph,
    obs: ObservationSet,
    x: AssignmentLike,
    op: RelationOp,
    group: GroupSpec,
) -> int:
    """
    Number of edges whose observation equals the relation of ``x``

    Examples
    --------
    .. code:: python

        compatibility_score(graph, obs, truth, RelationOp.difference(), group)
    """

    op = _check_inputs(graph, obs, op, group)
    values = group.check_array(as_values(x))
    if values.size != graph.n:
        raise InvalidParameter(f"assignment has {values.size} entries, graph has {graph.n} vertices")
    if not graph.edges:
        return 0
    arr = graph.edge_array()
    return int(np.count_nonzero(combine(op, group, values[arr[:, 0]], values[arr[:, 1]]) == obs.value_array()))


def success(xhat: AssignmentLike, xtrue: AssignmentLike, op: RelationOp, group: GroupSpec) -> bool:
    """
    Exact recovery criterion: ``xhat`` and ``xtrue`` have equal relation matrices

    For an admissible relation ``alpha*x + beta*y`` the two matrices agree
    entrywise exactly when ``d = xhat - xtrue`` is a constant ``delta`` with
    ``(alpha + beta) * delta = 0 mod M``, which is checked in linear time.

    Examples
    --------
    .. code:: python

        success([1, 2, 0], [0, 1, 2], RelationOp.difference(), GroupSpec(modulus=3))  # True
    """

    op = op.reduced(group)
    estimate = group.check_array(as_values(xhat))
    truth = group.check_array(as_values(xtrue))
    if estimate.size != truth.size:
        raise InvalidParameter(f"assignments differ in length: {estimate.size} != {truth.size}")
    if not truth.size:
        return True

    m = group.modulus
    shift = (estimate - truth) % m
    if np.any(shift != shift[0]):
        return False
    alpha, beta = op.coefficients(group)
    return (alpha + beta) * int(shift[0]) % m == 0


def _result(
    x: np.ndarray,
    graph: Graph,
    obs: ObservationSet,
    op: RelationOp,
    group: GroupSpec,
    diagnostics: Diagnostics,
) -> RecoveryResult:
    assignment = Assignment.from_array(x).canonical(op, group)
    return RecoveryResult(
        status=RecoveryStatus.RECOVERED,
        assignment=assignment,
        score=compatibility_score(graph, obs, assignment, op, group),
        diagnostics=diagnostics,
    )


class _Incidence:
    """Observations seen from each vertex: neighbor, observed value and orientation."""

    def __init__(self, obs: ObservationSet, op: RelationOp, group: GroupSpec):
        self.op = op
        self.group = group
        self.n = obs.graph.n

        arr = obs.graph.edge_array()
        y = obs.value_array()
        src = np.concatenate([arr[:, 0], arr[:, 1]])
        dst = np.concatenate([arr[:, 1], arr[:, 0]])
        first = np.concatenate([np.ones(len(arr), dtype=bool), np.zeros(len(arr), dtype=bool)])
        order = np.lexsort((dst, src))
        bounds = np.searchsorted(src[order], np.arange(self.n + 1))
        dst, observed, first = dst[order], np.concatenate([y, y])[order], first[order]

        self.neighbors = [dst[bounds[v] : bounds[v + 1]] for v in range(self.n)]
        self.observed = [observed[bounds[v] : bounds[v + 1]] for v in range(self.n)]
        self.first = [first[bounds[v] : bounds[v + 1]] for v in range(self.n)]

    def candidates(self, v: int, x: np.ndarray) -> np.ndarray:
        """Value of ``x_v`` satisfying each incident edge given the neighbors."""
        nbr, y, first = self.neighbors[v], self.observed[v], self.first[v]
        out = np.empty(len(nbr), dtype=np.int64)
        if first.any():
            out[first] = solve_left(self.op, self.group, x[nbr[first]], y[first])
        if not first.all():
            out[~first] = solve_right(self.op, self.group, x[nbr[~first]], y[~first])
        return out

    def best_value(self, v: int, x: np.ndarray) -> int:
        votes = self.candidates(v, x)
        if not votes.size:
            return int(x[v])
        values, counts = np.unique(votes, return_counts=True)
        top = counts.max()
        current = counts[values == x[v]]
        if current.size and current[0] == top:
            return int(x[v])
        return int(values[counts == top][0])

    def ascend(self, x: np.ndarray, max_sweeps: int | None = None) -> Tuple[np.ndarray, int, bool]:
        """Coordinate ascent in vertex order until a fixpoint or ``max_sweeps`` sweeps."""
        x = x.copy()
        sweeps = 0
        while max_sweeps is None or sweeps < max_sweeps:
            sweeps += 1
            changed = False
            for v in range(self.n):
                value = self.best_value(v, x)
                if value != x[v]:
                    x[v] = value
                    changed = True
            if not changed:
                return x, sweeps, True
        return x, sweeps, False


def _score(obs: ObservationSet, op: RelationOp, group: GroupSpec, x: np.ndarray) -> int:
    if not obs.m:
        return 0
    arr = obs.graph.edge_array()
    return int(np.count_nonzero(combine(op, group, x[arr[:, 0]], x[arr[:, 1]]) == obs.value_array()))


def _local_search(
    obs: ObservationSet,
    op: RelationOp,
    group: GroupSpec,
    restarts: int,
    seed: int,
) -> Tuple[np.ndarray, int, int]:
    incidence = _Incidence(obs, op, group)
    best: Tuple[int, Tuple[int, ...]] | None = None
    best_x = np.zeros(obs.graph.n, dtype=np.int64)
    sweeps = 0

    for child in np.random.SeedSequence(seed).spawn(restarts + 1):
        rng = np.random.default_rng(child)
        start = rng.integers(group.modulus, size=obs.graph.n, dtype=np.int64)
        x, used, _ = incidence.ascend(start)
        sweeps += used

        canonical = tuple(Assignment.from_array(x).canonical(op, group).values)
        key = (-_score(obs, op, group, x), canonical)
        if best is None or key < best:
            best = key
            best_x = np.asarray(canonical, dtype=np.int64)

    return best_x, -best[0], sweeps  # type: ignore[index]


def recover_local_search(
    graph: Graph,
    obs: ObservationSet,
    op: RelationOp,
    group: GroupSpec,
    restarts: int = 0,
    seed: int = 0,
) -> RecoveryResult:
    """
    Best of ``restarts + 1`` coordinate ascent runs from uniform random starts

    Each run sweeps the vertices in order, moving each to the value most of its
    incident observations agree with, until nothing changes. Ties between runs
    go to the lexicographically smallest canonical assignment.

    Parameters
    ----------
    graph : :obj:`Graph`
        Measurement graph

    obs : :obj:`ObservationSet`
        Observations

    op : :obj:`RelationOp`
        Relation

    group : :obj:`GroupSpec`
        Group

    restarts : int, optional
        Extra random starts, 0 runs a single ascent

    seed : int, optional
        Seed of the random starts

    Examples
    --------
    .. code:: python

        result = recover_local_search(graph, obs, RelationOp.sum(), group, restarts=5, seed=1)
    """

    op = _check_inputs(graph, obs, op, group)
    if restarts < 0:
        raise InvalidParameter(f"restarts must be non-negative, got {restarts}")
    if seed < 0:
        raise InvalidParameter(f"seed must be non-negative, got {seed}")

    x, score, sweeps = _local_search(obs, op, group, restarts, seed)
    log.debug(f"recover_local_search: {obs} restarts={restarts} -> score={score}")
    diagnostics = Diagnostics(
        algorithm="local",
        components=components(graph),
        work=sweeps,
        sweeps=sweeps,
        restarts=restarts,
    )
    return _result(x, graph, obs, op, group, diagnostics)


def _max_multiplicity(votes: np.ndarray) -> np.ndarray:
    """Largest number of equal entries in each row."""
    ordered = np.sort(votes, axis=1)
    run = np.ones(len(ordered), dtype=np.int64)
    best = run.copy()
    for col in range(1, ordered.shape[1]):
        run = np.where(ordered[:, col] == ordered[:, col - 1], run + 1, 1)
        best = np.maximum(best, run)
    return best


class _BranchAndBound:
    """
    Depth-first search over assignments in vertex order

    A partial assignment of vertices ``0..L-1`` is bounded by its satisfied
    edges, plus for every later vertex the largest number of assigned neighbors
    that agree on one value for it, plus the edges among later vertices. Nodes
    whose bound is below the best known score are cut, so every maximizer survives.
    """

    def __init__(self, obs: ObservationSet, op: RelationOp, group: GroupSpec):
        self.op = op
        self.group = group
        self.n = obs.graph.n
        self.explored = 0

        incidence = _Incidence(obs, op, group)
        # neighbors w < u, whose edge (w, u) is stored in this orientation
        self.prior = []
        for u in range(self.n):
            earlier = ~incidence.first[u]
            self.prior.append((incidence.neighbors[u][earlier], incidence.observed[u][earlier]))

        arr = obs.graph.edge_array()
        self.later_edges = np.array([np.count_nonzero(arr[:, 0] >= level) for level in range(self.n + 1)])

        self.best = -1
        self.reference: np.ndarray | None = None
        self.smallest: Tuple[int, ...] | None = None
        self.tie = False

    def _votes(self, states: np.ndarray, u: int, level: int) -> np.ndarray | None:
        ws, ys = self.prior[u]
        k = int(np.searchsorted(ws, level))
        if not k:
            return None
        return solve_right(self.op, self.group, states[:, ws[:k]], ys[:k])

    def _bound(self, states: np.ndarray, scores: np.ndarray, level: int) -> np.ndarray:
        bound = scores + self.later_edges[level]
        for u in range(level, self.n):
            votes = self._votes(states, u, level)
            if votes is not None:
                bound = bound + _max_multiplicity(votes)
        return bound

    def _children(
        self, states: np.ndarray, scores: np.ndarray, level: int
    ) -> List[Tuple[np.ndarray, np.ndarray, np.ndarray]]:
        m = self.group.modulus
        votes = self._votes(states, level, level)
        block = min(m, SEARCH_CHUNK)
        out = []
        for low in range(0, m, block):
            values = np.arange(low, min(low + block, m), dtype=np.int64)
            if votes is None:
                gain = np.zeros((len(states), len(values)), dtype=np.int64)
            else:
                gain = (votes[:, :, None] == values[None, None, :]).sum(axis=1)

            children = np.column_stack([np.repeat(states, len(values), axis=0), np.tile(values, len(states))])
            child_scores = np.repeat(scores, len(values)) + gain.ravel()
            self.explored += len(children)

            bound = self._bound(children, child_scores, level + 1)
            keep = bound >= self.best
            if np.any(keep):
                out.append((children[keep], child_scores[keep], bound[keep]))
        return out

    def _complete(self, states: np.ndarray, scores: np.ndarray) -> None:
        top = int(scores.max())
        if top < self.best:
            return
        if top > self.best:
            self.best = top
            self.reference = None
            self.smallest = None
            self.tie = False

        rows = states[scores == top]
        if self.reference is None:
            self.reference = rows[0].copy()

        m = self.group.modulus
        alpha, beta = self.op.coefficients(self.group)
        shift = (rows - self.reference) % m
        same = np.all(shift == shift[:, :1], axis=1) & (mulmod((alpha + beta) % m, shift[:, 0], m) == 0)
        self.tie = self.tie or not bool(np.all(same))

        first = rows[np.lexsort(rows.T[::-1])[0]]
        candidate = tuple(int(v) for v in first)
        if self.smallest is None or candidate < self.smallest:
            self.smallest = candidate

    def run(self, incumbent: int) -> Tuple[np.ndarray, int, bool]:
        self.best = incumbent
        if self.op.is_difference:
            root = np.zeros((1, 1), dtype=np.int64)
        else:
            root = np.zeros((1, 0), dtype=np.int64)
        scores = np.zeros(1, dtype=np.int64)
        stack = [(root, scores, self._bound(root, scores, root.shape[1]))]

        while stack:
            states, scores, bound = stack.pop()
            keep = bound >= self.best
            states, scores = states[keep], scores[keep]
            if not len(states):
                continue

            level = states.shape[1]
            if level == self.n:
                self._complete(states, scores)
                continue

            rows = max(1, SEARCH_CHUNK // self.group.modulus)
            pending = []
            for start in range(0, len(states), rows):
                pending.extend(self._children(states[start : start + rows], scores[start : start + rows], level))
            stack.extend(reversed(pending))

        return np.asarray(self.smallest, dtype=np.int64), self.best, self.tie


def recover_exhaustive(
    graph: Graph,
    obs: ObservationSet,
    op: RelationOp,
    group: GroupSpec,
    budget: int | None = None,
) -> RecoveryResult:
    """
    Maximum compatibility decoder

    Finds an assignment maximizing :obj:`compatibility_score` over the whole
    search space by branch and bound. Among maximizers the lexicographically
    smallest one is returned; ``diagnostics.tie`` is set when maximizers have
    distinct relation matrices. For the difference relation ``x_0`` is pinned to 0.

    Parameters
    ----------
    graph : :obj:`Graph`
        Measurement graph

    obs : :obj:`ObservationSet`
        Observations

    op : :obj:`RelationOp`
        Relation

    group : :obj:`GroupSpec`
        Group

    budget : int, optional
        Largest accepted search space, ``M**(n-1)`` for the difference relation
        and ``M**n`` otherwise. Default is taken from settings

    Raises
    ------
    :obj:`pairlab.exceptions.SearchSpaceTooLarge`
        If the search space exceeds ``budget``

    Examples
    --------
    .. code:: python

        result = recover_exhaustive(graph, obs, RelationOp.difference(), GroupSpec(modulus=3))
    """

    op = _check_inputs(graph, obs, op, group)
    if budget is None:
        budget = get_settings().search_budget

    free = graph.n - 1 if op.is_difference else graph.n
    space = group.modulus**free
    if space > budget:
        raise SearchSpaceTooLarge(f"search space {group.modulus}**{free} exceeds the budget {budget}")

    _, incumbent, _ = _local_search(obs, op, group, INCUMBENT_RESTARTS, seed=0)
    search = _BranchAndBound(obs, op, group)
    x, score, tie = search.run(incumbent)

    log.debug(f"recover_exhaustive: {obs} space={space} explored={search.explored} -> score={score} tie={tie}")
    diagnostics = Diagnostics(
        algorithm="exhaustive",
        components=components(graph),
        tie=tie,
        budget=budget,
        work=search.explored,
    )
    return _result(x, graph, obs, op, group, diagnostics)


class _Oriented:
    """Sorted neighbors of every vertex with the observation oriented away from it."""

    def __init__(self, obs: ObservationSet):
        m = obs.group.modulus
        arr = obs.graph.edge_array()
        y = obs.value_array()
        src = np.concatenate([arr[:, 0], arr[:, 1]])
        dst = np.concatenate([arr[:, 1], arr[:, 0]])
        value = np.concatenate([y, (m - y) % m])
        order = np.lexsort((dst, src))
        bounds = np.searchsorted(src[order], np.arange(obs.graph.n + 1))
        dst, value = dst[order], value[order]

        self.neighbors = [dst[bounds[v] : bounds[v + 1]] for v in range(obs.graph.n)]
        self.values = [value[bounds[v] : bounds[v + 1]] for v in range(obs.graph.n)]
        self.edge_index = {edge: e for e, edge in enumerate(obs.graph.edges)}

    def value(self, a: int, b: int) -> int:
        """Observation of ``x_a - x_b``."""
        idx = int(np.searchsorted(self.neighbors[a], b))
        return int(self.values[a][idx])


def _zero_sum_triangles(obs: ObservationSet, oriented: _Oriented) -> Tuple[np.ndarray, int]:
    m = obs.group.modulus
    survives = np.zeros(obs.m, dtype=bool)
    checked = 0

    for e, (i, j) in enumerate(obs.graph.edges):
        common, at_i, at_j = np.intersect1d(
            oriented.neighbors[i],
            oriented.neighbors[j],
            assume_unique=True,
            return_indices=True,
        )
        later = common > j
        if not np.any(later):
            continue
        ws = common[later]
        checked += len(ws)

        # triangle i -> j -> w -> i, edges stored as (i, j), (j, w), (i, w)
        y_ij = obs.values[e]
        y_jw = oriented.values[j][at_j[later]]
        y_iw = oriented.values[i][at_i[later]]
        zero = (y_ij + y_jw) % m == y_iw
        if not np.any(zero):
            continue

        survives[e] = True
        for w in ws[zero].tolist():
            survives[oriented.edge_index[(j, w)]] = True
            survives[oriented.edge_index[(i, w)]] = True

    return survives, checked


def _zero_sum_cycles(obs: ObservationSet, oriented: _Oriented, k: int, budget: int) -> Tuple[np.ndarray, int, int]:
    m = obs.group.modulus
    survives = np.zeros(obs.m, dtype=bool)
    steps = 0
    checked = 0

    def mark(path: List[int]) -> None:
        for a, b in zip(path, path[1:] + path[:1]):
            survives[oriented.edge_index[(min(a, b), max(a, b))]] = True

    for e, (i, j) in enumerate(obs.graph.edges):
        if survives[e]:
            continue

        # simple walks i -> j -> ... of k - 1 edges closing back at i
        stack = [(j, [i, j], obs.values[e])]
        while stack and not survives[e]:
            v, path, total = stack.pop()
            steps += 1
            if steps > budget:
                raise BudgetExceeded(f"cycle walk enumeration exceeded the budget {budget}")

            if len(path) == k:
                if i in oriented.neighbors[v]:
                    checked += 1
                    if (total + oriented.value(v, i)) % m == 0:
                        mark(path)
                continue

            visited = set(path)
            for w in oriented.neighbors[v].tolist():
                if w not in visited:
                    stack.append((w, path + [w], (total + oriented.value(v, w)) % m))

    return survives, steps, checked


def recover_cycle(
    graph: Graph,
    obs: ObservationSet,
    group: GroupSpec,
    k: int = 3,
    budget: int | None = None,
) -> RecoveryResult:
    """
    Zero-sum cycle decoder for the difference relation

    Keeps the edges lying on at least one ``k``-cycle whose oriented observation
    sum is zero, traversing edge ``(i, j)`` backwards contributing ``-y_ij``.
    If the kept edges span all vertices, values are propagated from ``x_0 = 0``
    along a BFS tree and every kept edge is verified.

    Parameters
    ----------
    graph : :obj:`Graph`
        Measurement graph

    obs : :obj:`ObservationSet`
        Difference observations

    group : :obj:`GroupSpec`
        Group

    k : int, optional
        Cycle length, ``3 <= k <= max(3, log2(n))``

    budget : int, optional
        Walk steps allowed for ``k > 3``. Default is taken from settings

    Returns
    -------
    result : :obj:`RecoveryResult`
        Recovered, or failed as disconnected or inconsistent

    Raises
    ------
    :obj:`pairlab.exceptions.UnsupportedOp`
        If the observations are not differences

    :obj:`pairlab.exceptions.BudgetExceeded`
        If the walk enumeration for ``k > 3`` exceeds ``budget``

    Examples
    --------
    .. code:: python

        result = recover_cycle(graph, obs, GroupSpec(modulus=2**61 - 1), k=3)
    """

    op = _require_difference(graph, obs, group)
    k_max = max(3, int(np.floor(np.log2(max(graph.n, 1)))))
    if not 3 <= k <= k_max:
        raise InvalidParameter(f"cycle length must lie in [3, {k_max}] for n={graph.n}, got {k}")
    if budget is None:
        budget = get_settings().walk_budget

    oriented = _Oriented(obs)
    if k == 3:
        survives, checked = _zero_sum_triangles(obs, oriented)
        work = checked
    else:
        survives, work, checked = _zero_sum_cycles(obs, oriented, k, budget)

    kept = [edge for edge, keep in zip(graph.edges, survives.tolist()) if keep]
    subgraph = nx.Graph()
    subgraph.add_nodes_from(range(graph.n))
    subgraph.add_edges_from(kept)
    parts = nx.number_connected_components(subgraph)
    log.debug(f"recover_cycle: {obs} k={k} checked={checked} kept={len(kept)} components={parts}")

    diagnostics = Diagnostics(
        algorithm="cycle",
        pruned_edges=graph.m - len(kept),
        components=parts,
        budget=budget if k > 3 else None,
        work=work,
        cycles_checked=checked,
    )
    if parts != 1:
        return RecoveryResult.failed(FailureReason.DISCONNECTED, diagnostics)

    m = group.modulus
    x = np.zeros(graph.n, dtype=np.int64)
    for parent, child in nx.bfs_edges(subgraph, 0):
        x[child] = (x[parent] - oriented.value(parent, child)) % m

    arr = np.asarray(kept, dtype=np.int64).reshape(-1, 2)
    observed = np.asarray([oriented.value(i, j) for i, j in kept], dtype=np.int64)
    if np.any(combine(op, group, x[arr[:, 0]], x[arr[:, 1]]) != observed):
        return RecoveryResult.failed(FailureReason.INCONSISTENT, diagnostics)

    return _result(x, graph, obs, op, group, diagnostics)


def _power_iteration(matrix: sparse.spmatrix, start: np.ndarray) -> Tuple[np.ndarray, int, bool]:
    v = start / np.linalg.norm(start)
    for iteration in range(1, POWER_MAX_ITERATIONS + 1):
        w = matrix @ v
        norm = np.linalg.norm(w)
        if norm == 0:
            return v, iteration, True
        w /= norm
        if np.linalg.norm(w - v) < POWER_TOLERANCE:
            return w, iteration, True
        v = w
    return v, POWER_MAX_ITERATIONS, False


def recover_spectral(
    graph: Graph,
    obs: ObservationSet,
    group: GroupSpec,
    refine_rounds: int = DEFAULT_REFINE_ROUNDS,
    seed: int = 0,
) -> RecoveryResult:
    """
    Spectral rounding followed by coordinate ascent, difference relation only

    Observations are embedded as roots of unity in a Hermitian matrix whose top
    eigenvector is found by power iteration. Phases relative to vertex 0 are
    rounded to the nearest root of unity, then ``refine_rounds`` ascent sweeps
    are applied. Non-convergence is reported in the diagnostics and the rounded
    estimate is still returned.

    Parameters
    ----------
    graph : :obj:`Graph`
        Measurement graph

    obs : :obj:`ObservationSet`
        Difference observations

    group : :obj:`GroupSpec`
        Group with ``M <= 2**20``

    refine_rounds : int, optional
        Largest number of ascent sweeps, stopping early at a fixpoint

    seed : int, optional
        Seed of the power iteration start vector

    Examples
    --------
    .. code:: python

        result = recover_spectral(graph, obs, GroupSpec(modulus=2), refine_rounds=10)
    """

    op = _require_difference(graph, obs, group)
    m = group.modulus
    if m > SPECTRAL_MAX_MODULUS:
        raise InvalidParameter(f"spectral embedding needs M <= 2**20, got {m}")
    if refine_rounds < 0:
        raise InvalidParameter(f"refine_rounds must be non-negative, got {refine_rounds}")

    n = graph.n
    arr = graph.edge_array()
    phases = np.exp(2j * np.pi * obs.value_array() / m)
    hermitian = sparse.coo_matrix(
        (
            np.concatenate([phases, phases.conj()]),
            (np.concatenate([arr[:, 0], arr[:, 1]]), np.concatenate([arr[:, 1], arr[:, 0]])),
        ),
        shape=(n, n),
    ).tocsr()
    shift = float(graph.degrees().max()) if graph.edges else 0.0
    shifted = hermitian + shift * sparse.identity(n, format="csr")

    rng = np.random.default_rng(seed)
    start = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    vector, iterations, converged = _power_iteration(shifted, start)
    if not converged:
        log.warning(f"recover_spectral: power iteration did not converge in {iterations} iterations")

    angles = np.angle(vector * np.conj(vector[0]))
    x = np.rint(angles * m / (2 * np.pi)).astype(np.int64) % m

    x, sweeps, _ = _Incidence(obs, op, group).ascend(x, refine_rounds) if refine_rounds else (x, 0, True)
    log.debug(f"recover_spectral: {obs} iterations={iterations} sweeps={sweeps}")

    diagnostics = Diagnostics(
        algorithm="spectral",
        components=components(graph),
        work=iterations,
        converged=converged,
        sweeps=sweeps,
    )
    return _result(x, graph, obs, op, group, diagnostics)
