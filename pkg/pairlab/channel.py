# SPDX-FileCopyrightText: 2024 pairlab developers
# SPDX-License-Identifier: Apache-2.0
from __future__ import annotations

import logging
import os
from typing import List, Optional, Tuple

import numpy as np
from pydantic import root_validator, validator  # pylint: disable=no-name-in-module

from .exceptions import FormatError, InvalidParameter, UnsupportedOp
from .graphs import Edge, Graph
from .group import Assignment, AssignmentLike, GroupSpec, RelationOp, as_values, combine
from .internal import FrozenModel

log = logging.getLogger(__name__)

_MASK64 = 2**64 - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


class ObservationSet(FrozenModel):
    """One noisy relation per edge of a graph

    Values are oriented low id to high id: ``values[e]`` observes
    ``x_i ⊖ x_j`` for ``graph.edges[e] == (i, j)``, ``i < j``.

    Parameters
    ----------
    graph : :obj:`Graph`
        Measurement graph

    group : :obj:`GroupSpec`
        Group the observations live in

    op : :obj:`RelationOp`
        Observed relation

    values : :obj:`list` of int
        Observation of every edge, aligned with ``graph.edges``

    p_used : float, optional
        Non-corruption rate of the simulation, ``None`` for ingested data

    Examples
    --------
    .. code:: python

        obs = corrupt(x, RelationOp.difference(), graph, GroupSpec(modulus=5), p=0.8, seed=1)
        obs.value(0, 1)
    """

    graph: Graph
    group: GroupSpec
    op: RelationOp
    values: Tuple[int, ...]
    p_used: Optional[float] = None

    @validator("p_used")
    def probability(cls, val):  # pylint: disable=no-self-argument
        if val is not None and not 0 <= val <= 1:
            raise ValueError(f"p must lie in [0, 1], got {val}")
        return val

    @root_validator(skip_on_failure=True)
    def one_value_per_edge(cls, values):  # pylint: disable=no-self-argument
        graph, group, observed = values["graph"], values["group"], values["values"]
        if len(observed) != graph.m:
            raise ValueError(f"{len(observed)} observations for {graph.m} edges")
        if observed and not all(group.contains(y) for y in observed):
            raise ValueError(f"observations must lie in [0, {group.modulus})")
        return values

    @property
    def m(self) -> int:
        return len(self.values)

    def __str__(self):
        return f"ObservationSet(n={self.graph.n}, m={self.m}, M={self.group.modulus}, op={self.op})"

    def value_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.int64)

    def value(self, i: int, j: int) -> int:
        """
        Observation of the ordered pair ``(i, j)``

        The reverse orientation is only derived for the difference relation,
        where ``y_ji = -y_ij``.

        Raises
        ------
        :obj:`pairlab.exceptions.InvalidParameter`
            If ``(i, j)`` is not an edge

        :obj:`pairlab.exceptions.UnsupportedOp`
            If ``i > j`` and the relation is not the difference
        """

        low, high = min(i, j), max(i, j)
        try:
            y = self.values[self.graph.edges.index((low, high))]
        except ValueError as e:
            raise InvalidParameter(f"({i}, {j}) is not an edge") from e

        if i < j:
            return y
        if not self.op.acts_as_difference(self.group):
            raise UnsupportedOp(f"relation {self.op} has no reverse orientation")
        return (self.group.modulus - y) % self.group.modulus


def effective_accuracy(p: float, M: int) -> float:  # pylint: disable=invalid-name
    """
    Probability that an observation equals the true relation, ``p + (1 - p) / M``

    Examples
    --------
    .. code:: python

        effective_accuracy(0.3, 4)  # 0.475
    """

    if not 0 <= p <= 1:
        raise InvalidParameter(f"p must lie in [0, 1], got {p}")
    if M < 2:
        raise InvalidParameter(f"M must be at least 2, got {M}")
    return p + (1 - p) / M


def _mix(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * _MIX1
    z = z ^ (z >> np.uint64(27))
    z = z * _MIX2
    return z ^ (z >> np.uint64(31))


def edge_words(seed: int, edges: np.ndarray, counter: int) -> np.ndarray:
    """
    Counter-based random words, one per edge

    Word ``counter`` of edge ``(i, j)`` depends on ``seed``, ``i``, ``j`` and
    ``counter`` only, never on the other edges or the order of evaluation.
    """

    arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2).astype(np.uint64)
    with np.errstate(over="ignore"):
        key = (arr[:, 0] << np.uint64(32)) | arr[:, 1]
        stream = _mix(key + _GOLDEN) ^ np.uint64(seed & _MASK64)
        return _mix(_mix(stream) + np.uint64(counter + 1) * _GOLDEN)


def _uniform_elements(seed: int, edges: np.ndarray, modulus: int) -> np.ndarray:
    # rejection keeps every residue equally likely
    limit = (2**64 // modulus) * modulus
    out = np.zeros(len(edges), dtype=np.int64)
    pending = np.arange(len(edges))
    counter = 1
    while pending.size:
        words = edge_words(seed, edges[pending], counter)
        accepted = np.ones(len(pending), dtype=bool) if limit > _MASK64 else words < np.uint64(limit)
        out[pending[accepted]] = (words[accepted] % np.uint64(modulus)).astype(np.int64)
        pending = pending[~accepted]
        counter += 1
    return out


def corrupt(
    x: AssignmentLike,
    op: RelationOp,
    graph: Graph,
    group: GroupSpec,
    p: float,
    seed: int,
) -> ObservationSet:
    """
    Sample one observation per edge from the random-outlier channel

    With probability ``p`` the edge carries ``x_i ⊖ x_j``, otherwise a uniform
    element of the group, which may coincide with the true relation.

    Parameters
    ----------
    x : :obj:`Assignment` or sequence of int
        Ground truth

    op : :obj:`RelationOp`
        Relation

    graph : :obj:`Graph`
        Measurement graph

    group : :obj:`GroupSpec`
        Group

    p : float
        Non-corruption rate

    seed : int
        64-bit seed; the corruption mask and the outlier of each edge depend
        only on the seed and the edge

    Returns
    -------
    observations : :obj:`ObservationSet`
        Observations aligned with ``graph.edges``

    Examples
    --------
    .. code:: python

        obs = corrupt([0, 1, 2], RelationOp.difference(), triangle, GroupSpec(modulus=3), p=1, seed=0)
    """

    if not 0 <= p <= 1:
        raise InvalidParameter(f"p must lie in [0, 1], got {p}")
    if seed < 0:
        raise InvalidParameter(f"seed must be non-negative, got {seed}")

    op = op.reduced(group)
    values = group.check_array(as_values(x))
    if values.size != graph.n:
        raise InvalidParameter(f"assignment has {values.size} entries, graph has {graph.n} vertices")

    arr = graph.edge_array()
    if not len(arr):
        return ObservationSet(graph=graph, group=group, op=op, values=(), p_used=p)

    truth = combine(op, group, values[arr[:, 0]], values[arr[:, 1]])
    uniform = (edge_words(seed, arr, 0) >> np.uint64(11)).astype(np.float64) * 2.0**-53
    keep = uniform < p
    observed = np.where(keep, truth, _uniform_elements(seed, arr, group.modulus))

    log.debug(f"corrupt: {graph} {group} p={p} seed={seed} -> {int((~keep).sum())} outliers")
    return ObservationSet.construct(
        graph=graph,
        group=group,
        op=op,
        values=tuple(int(y) for y in observed),
        p_used=p,
    )


def wrong_edges(obs: ObservationSet, x: AssignmentLike) -> List[Edge]:
    """Edges whose observation differs from the relation of ``x``."""
    values = obs.group.check_array(as_values(x))
    arr = obs.graph.edge_array()
    if not len(arr):
        return []
    truth = combine(obs.op, obs.group, values[arr[:, 0]], values[arr[:, 1]])
    return [obs.graph.edges[e] for e in np.flatnonzero(truth != obs.value_array())]


def format_observations(obs: ObservationSet) -> str:
    lines = [f"{obs.graph.n} {obs.m} {obs.group.modulus} {obs.op.tag(obs.group)}"]
    lines.extend(f"{i} {j} {y}" for (i, j), y in zip(obs.graph.edges, obs.values))
    return "\n".join(lines) + "\n"


def parse_observations(text: str, graph: Graph | None = None) -> ObservationSet:
    """
    Parse the observation format: ``n m M op_tag`` header then ``m`` lines ``i j y``

    Parameters
    ----------
    text : str
        File content

    graph : :obj:`Graph`, optional
        If given, the observed edges must be exactly its edges

    Raises
    ------
    :obj:`pairlab.exceptions.FormatError`
        If the file is malformed or does not match ``graph``
    """

    rows = [line.split() for line in text.splitlines() if line.strip()]
    if not rows or len(rows[0]) != 4:
        raise FormatError("observation header must be 'n m M op_tag'")

    try:
        n, m, modulus = (int(v) for v in rows[0][:3])
        op = RelationOp.parse_tag(rows[0][3])
        triples = [(int(i), int(j), int(y)) for i, j, y in rows[1:]]
    except ValueError as e:
        raise FormatError(f"malformed observation file: {e}") from e

    if len(triples) != m:
        raise FormatError(f"observation header announces {m} edges, found {len(triples)}")
    edges = [(i, j) for i, j, _ in triples]
    if any(i >= j for i, j in edges) or edges != sorted(edges):
        raise FormatError("observed edges must be written as 'i j y' with i < j in sorted order")

    try:
        parsed = Graph(n=n, edges=edges)
        group = GroupSpec(modulus=modulus)
        obs = ObservationSet(graph=parsed, group=group, op=op, values=[y for _, _, y in triples])
    except ValueError as e:
        raise FormatError(str(e)) from e

    if graph is not None and (graph.n != parsed.n or graph.edges != parsed.edges):
        raise FormatError("observed edges do not match the graph")
    return obs


def write_observations(obs: ObservationSet, path: str | os.PathLike) -> None:
    with open(path, "w") as f:
        f.write(format_observations(obs))


def read_observations(path: str | os.PathLike, graph: Graph | None = None) -> ObservationSet:
    with open(path) as f:
        return parse_observations(f.read(), graph)


def format_assignment(x: Assignment, group: GroupSpec) -> str:
    return f"{len(x)} {group.modulus}\n{x}\n"


def parse_assignment(text: str) -> Tuple[Assignment, GroupSpec]:
    """
    Parse the assignment format: ``n M`` header then one line of ``n`` values

    Raises
    ------
    :obj:`pairlab.exceptions.FormatError`
        If the file is malformed or a value is outside ``[0, M)``
    """

    lines = [line.split() for line in text.splitlines() if line.strip()]
    if not lines or len(lines[0]) != 2 or len(lines) > 2:
        raise FormatError("assignment file must hold an 'n M' header and one line of values")

    try:
        n, modulus = (int(v) for v in lines[0])
        values = [int(v) for v in lines[1]] if len(lines) == 2 else []
        group = GroupSpec(modulus=modulus)
        x = Assignment(values=values).check(group, n)
    except ValueError as e:
        raise FormatError(f"malformed assignment file: {e}") from e
    return x, group


def write_assignment(x: Assignment, group: GroupSpec, path: str | os.PathLike) -> None:
    with open(path, "w") as f:
        f.write(format_assignment(x, group))


def read_assignment(path: str | os.PathLike) -> Tuple[Assignment, GroupSpec]:
    with open(path) as f:
        return parse_assignment(f.read())
