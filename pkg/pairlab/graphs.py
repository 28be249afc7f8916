# SPDX-FileCopyrightText: 2024 pairlab developers
# SPDX-License-Identifier: Apache-2.0
from __future__ import annotations

import logging
import os
from enum import Enum
from fractions import Fraction
from typing import Iterator, Optional, Tuple

import networkx as nx
import numpy as np
from pydantic import root_validator  # pylint: disable=no-name-in-module
from scipy import linalg
from scipy.spatial.distance import pdist

from .exceptions import FormatError, InvalidParameter, SizeGuardExceeded
from .internal import FrozenModel

log = logging.getLogger(__name__)

REWIRE_RETRIES = 100
EXPANSION_EXACT_MAX_N = 24
SUBSET_CHUNK = 2**16

Edge = Tuple[int, int]


class Graph(FrozenModel):
    """Undirected simple measurement graph

    Edges are stored as ``(i, j)`` with ``i < j`` and sorted. The adjacency index
    is derived from the edge list; if given explicitly it must agree with it.

    Parameters
    ----------
    n : int
        Number of vertices

    edges : :obj:`list` of :obj:`tuple`, optional
        Vertex pairs, in any orientation and order

    adjacency : :obj:`list` of :obj:`tuple`, optional
        Sorted neighbor ids of every vertex

    Attributes
    ----------
    n : int
        Number of vertices

    edges : :obj:`tuple` of :obj:`tuple`
        Sorted edges with ``i < j``

    adjacency : :obj:`tuple` of :obj:`tuple`
        Sorted neighbor ids of every vertex

    Examples
    --------
    .. code:: python

        triangle = Graph(n=3, edges=[(0, 1), (1, 2), (2, 0)])
    """

    n: int
    edges: Tuple[Tuple[int, int], ...] = ()
    adjacency: Tuple[Tuple[int, ...], ...] = ()

    @root_validator(skip_on_failure=True)
    def normalize(cls, values):  # pylint: disable=no-self-argument
        n = values["n"]
        if n < 1:
            raise ValueError(f"graph needs at least one vertex, got n={n}")

        normalized = sorted((min(i, j), max(i, j)) for i, j in values["edges"])
        for (i, j), nxt in zip(normalized, normalized[1:] + [None]):  # type: ignore[operator]
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            if i < 0 or j >= n:
                raise ValueError(f"edge ({i}, {j}) is out of range for n={n}")
            if nxt == (i, j):
                raise ValueError(f"duplicate edge ({i}, {j})")

        adjacency = _adjacency(n, normalized)
        if values["adjacency"] and tuple(tuple(a) for a in values["adjacency"]) != adjacency:
            raise ValueError("adjacency index does not match the edge list")

        values["edges"] = tuple(normalized)
        values["adjacency"] = adjacency
        return values

    @classmethod
    def from_edge_array(cls, n: int, edges: np.ndarray) -> Graph:
        """Build from an ``m x 2`` array already known to be simple; skips per-item validation."""
        arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        arr = np.sort(arr, axis=1)
        arr = arr[np.lexsort((arr[:, 1], arr[:, 0]))]
        if arr.size and (arr[:, 0].min() < 0 or arr[:, 1].max() >= n or np.any(arr[:, 0] == arr[:, 1])):
            raise InvalidParameter("edge array has self-loops or out of range vertices")
        if len(arr) > 1 and np.any(np.all(arr[1:] == arr[:-1], axis=1)):
            raise InvalidParameter("edge array has duplicate edges")
        normalized = [(int(i), int(j)) for i, j in arr]
        return cls.construct(n=n, edges=tuple(normalized), adjacency=_adjacency(n, normalized))

    @property
    def m(self) -> int:
        return len(self.edges)

    def __str__(self):
        return f"Graph(n={self.n}, m={self.m})"

    def degrees(self) -> np.ndarray:
        return np.fromiter((len(a) for a in self.adjacency), dtype=np.int64, count=self.n)

    def edge_array(self) -> np.ndarray:
        return np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)

    def adjacency_matrix(self) -> np.ndarray:
        matrix = np.zeros((self.n, self.n), dtype=np.int64)
        if self.edges:
            arr = self.edge_array()
            matrix[arr[:, 0], arr[:, 1]] = 1
            matrix[arr[:, 1], arr[:, 0]] = 1
        return matrix

    def has_edge(self, i: int, j: int) -> bool:
        return max(i, j) in self.adjacency[min(i, j)]

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(self.edges)
        return graph


def _adjacency(n: int, edges) -> Tuple[Tuple[int, ...], ...]:
    neighbors: list[list[int]] = [[] for _ in range(n)]
    for i, j in edges:
        neighbors[i].append(j)
        neighbors[j].append(i)
    return tuple(tuple(sorted(a)) for a in neighbors)


# pylint: disable=invalid-name
class GraphKind(Enum):
    """Measurement graph ensemble"""

    ERDOS_RENYI = "er"
    """ Every pair is an edge independently with probability ``q`` """

    GEOMETRIC = "geo"
    """ Points on the unit sphere, edge iff chord distance is at most ``r`` """

    SMALL_WORLD = "sw"
    """ Ring lattice of degree ``k`` with rewiring probability ``q`` """

    RING = "ring"
    """ Cycle on all vertices """

    COMPLETE = "complete"
    """ All pairs """


class GraphModel(FrozenModel):
    """Random graph model with its parameters

    Parameters
    ----------
    kind : :obj:`str` or :obj:`GraphKind`
        Ensemble

    q : float, optional
        Edge probability (``er``) or rewiring probability (``sw``)

    r : float, optional
        Distance threshold (``geo``)

    k : int, optional
        Even lattice degree (``sw``)

    Examples
    --------
    .. code:: python

        model = GraphModel.erdos_renyi(0.1)
        model = GraphModel(kind="sw", k=4, q=0.2)
    """

    kind: GraphKind
    q: Optional[float] = None
    r: Optional[float] = None
    k: Optional[int] = None

    @root_validator(skip_on_failure=True)
    def valid_parameters(cls, values):  # pylint: disable=no-self-argument
        kind, q, r, k = values["kind"], values.get("q"), values.get("r"), values.get("k")
        required = {
            GraphKind.ERDOS_RENYI: {"q"},
            GraphKind.GEOMETRIC: {"r"},
            GraphKind.SMALL_WORLD: {"q", "k"},
            GraphKind.RING: set(),
            GraphKind.COMPLETE: set(),
        }[kind]

        for name in ("q", "r", "k"):
            given = values.get(name) is not None
            if given != (name in required):
                verb = "requires" if name in required else "takes no"
                raise ValueError(f"{kind.value} model {verb} parameter {name!r}")

        if q is not None and not 0 <= q <= 1:
            raise ValueError(f"q must lie in [0, 1], got {q}")
        if r is not None and r <= 0:
            raise ValueError(f"r must be positive, got {r}")
        if k is not None and (k < 2 or k % 2):
            raise ValueError(f"k must be even and at least 2, got {k}")
        return values

    @classmethod
    def erdos_renyi(cls, q: float) -> GraphModel:
        return cls(kind=GraphKind.ERDOS_RENYI, q=q)

    @classmethod
    def geometric(cls, r: float) -> GraphModel:
        return cls(kind=GraphKind.GEOMETRIC, r=r)

    @classmethod
    def small_world(cls, k: int, q: float) -> GraphModel:
        return cls(kind=GraphKind.SMALL_WORLD, k=k, q=q)

    @classmethod
    def ring(cls) -> GraphModel:
        return cls(kind=GraphKind.RING)

    @classmethod
    def complete(cls) -> GraphModel:
        return cls(kind=GraphKind.COMPLETE)

    @property
    def param_label(self) -> str:
        """Model parameters as ``name=value`` pairs joined by ``;``"""
        return ";".join(f"{name}={getattr(self, name)}" for name in ("k", "q", "r") if getattr(self, name) is not None)

    def __str__(self):
        label = self.param_label
        return f"{self.kind.value}({label})" if label else self.kind.value


def gen_graph(model: GraphModel, n: int, seed: int) -> Graph:
    """
    Sample a measurement graph

    Parameters
    ----------
    model : :obj:`GraphModel`
        Ensemble and parameters

    n : int
        Number of vertices, at least 3

    seed : int
        Seed of the generator; equal inputs give equal edge lists

    Returns
    -------
    graph : :obj:`Graph`
        Sampled graph

    Examples
    --------
    .. code:: python

        graph = gen_graph(GraphModel.erdos_renyi(0.1), 100, seed=1)
        graph = gen_graph(GraphModel.small_world(4, 0.2), 50, seed=7)
    """

    if n < 3:
        raise InvalidParameter(f"graphs are generated with n >= 3, got {n}")
    if seed < 0:
        raise InvalidParameter(f"seed must be non-negative, got {seed}")

    rng = np.random.default_rng(seed)
    kind = model.kind

    if kind == GraphKind.COMPLETE:
        edges = np.column_stack(np.triu_indices(n, 1))
    elif kind == GraphKind.RING:
        edges = _ring_lattice(n, 2)
    elif kind == GraphKind.ERDOS_RENYI:
        upper = np.column_stack(np.triu_indices(n, 1))
        edges = upper[rng.random(len(upper)) < model.q]
    elif kind == GraphKind.GEOMETRIC:
        points = rng.standard_normal((n, 3))
        points /= np.linalg.norm(points, axis=1, keepdims=True)
        upper = np.column_stack(np.triu_indices(n, 1))
        # condensed distances follow the same (i < j) row-major order as triu_indices
        edges = upper[pdist(points) <= model.r]
    else:
        if model.k >= n:  # type: ignore[operator]
            raise InvalidParameter(f"lattice degree k={model.k} must be below n={n}")
        edges = _rewire(_ring_lattice(n, model.k), n, model.q, rng)  # type: ignore[arg-type]

    graph = Graph.from_edge_array(n, edges)
    log.debug(f"gen_graph: {model} n={n} seed={seed} -> m={graph.m}")
    return graph


def _ring_lattice(n: int, k: int) -> np.ndarray:
    base = np.arange(n)
    return np.concatenate([np.column_stack((base, (base + s) % n)) for s in range(1, k // 2 + 1)])


def _rewire(lattice: np.ndarray, n: int, q: float, rng: np.random.Generator) -> np.ndarray:
    present = {(min(u, v), max(u, v)) for u, v in lattice.tolist()}
    kept = 0

    for u, v in lattice.tolist():
        if rng.random() >= q:
            continue

        for _ in range(REWIRE_RETRIES):
            w = int(rng.integers(n))
            candidate = (min(u, w), max(u, w))
            if w != u and candidate not in present:
                present.discard((min(u, v), max(u, v)))
                present.add(candidate)
                break
        else:
            kept += 1

    if kept:
        log.warning(f"gen_graph: {kept} edges kept in place after {REWIRE_RETRIES} rewiring attempts")

    return np.asarray(sorted(present), dtype=np.int64).reshape(-1, 2)


class DegreeStats(FrozenModel):
    """Degree extremes and mean

    Attributes
    ----------
    d_min : int
        Minimum vertex degree

    d_max : int
        Maximum vertex degree

    mean : float
        Mean vertex degree
    """

    d_min: int
    d_max: int
    mean: float


def degree_stats(graph: Graph) -> DegreeStats:
    """
    Minimum, maximum and mean vertex degree

    Examples
    --------
    .. code:: python

        stats = degree_stats(gen_graph(GraphModel.ring(), 5, seed=0))  # (2, 2, 2.0)
    """

    degrees = graph.degrees()
    return DegreeStats(d_min=int(degrees.min()), d_max=int(degrees.max()), mean=float(degrees.mean()))


class MinCut(FrozenModel):
    """Global minimum edge cut

    Attributes
    ----------
    value : int
        Number of cut edges, 0 for a disconnected graph

    connected : bool
        Whether the graph is connected

    partition : :obj:`tuple` of :obj:`tuple`
        The two vertex sides of a minimum cut
    """

    value: int
    connected: bool
    partition: Tuple[Tuple[int, ...], Tuple[int, ...]]

    def __int__(self):
        return self.value


def min_cut(graph: Graph) -> MinCut:
    """
    Global minimum edge cut by Stoer-Wagner contraction

    Parameters
    ----------
    graph : :obj:`Graph`
        Graph

    Returns
    -------
    cut : :obj:`MinCut`
        Cut value, connectivity flag and a minimizing partition

    Examples
    --------
    .. code:: python

        min_cut(gen_graph(GraphModel.ring(), 5, seed=0)).value  # 2
    """

    nx_graph = graph.to_networkx()
    if graph.n == 1:
        return MinCut(value=0, connected=True, partition=((0,), ()))

    if not nx.is_connected(nx_graph):
        side = tuple(sorted(nx.node_connected_component(nx_graph, 0)))
        members = set(side)
        rest = tuple(v for v in range(graph.n) if v not in members)
        log.debug(f"min_cut: {graph} is disconnected")
        return MinCut(value=0, connected=False, partition=(side, rest))

    value, (left, right) = nx.stoer_wagner(nx_graph)
    return MinCut(value=int(value), connected=True, partition=(tuple(sorted(left)), tuple(sorted(right))))


def is_connected(graph: Graph) -> bool:
    return nx.is_connected(graph.to_networkx())


def components(graph: Graph) -> int:
    return nx.number_connected_components(graph.to_networkx())


def iter_subset_masks(n: int, chunk: int = SUBSET_CHUNK) -> Iterator[np.ndarray]:
    """Yield all ``2**n`` vertex subsets as int64 bit masks, in increasing order and in chunks."""
    total = 1 << n
    for start in range(0, total, chunk):
        yield np.arange(start, min(start + chunk, total), dtype=np.int64)


def subset_bits(masks: np.ndarray, n: int) -> np.ndarray:
    """Membership matrix ``bits[s, v]`` of vertex ``v`` in subset ``s``."""
    return ((masks[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(np.uint8)


def boundary_sizes(graph: Graph, masks: np.ndarray) -> np.ndarray:
    """Edge boundary size ``|∂S|`` of every subset in ``masks``."""
    if not graph.edges:
        return np.zeros(len(masks), dtype=np.int64)
    bits = subset_bits(masks, graph.n)
    arr = graph.edge_array()
    return (bits[:, arr[:, 0]] != bits[:, arr[:, 1]]).sum(axis=1)


class EdgeExpansion(FrozenModel):
    """Edge expansion value

    Attributes
    ----------
    value : float
        Expansion, or its spectral lower bound when ``exact`` is ``False``

    exact : bool
        Whether ``value`` is the exact minimum ratio

    numerator, denominator : int, optional
        Exact ratio ``|∂S| / |S|`` of a minimizing set, exact mode only
    """

    value: float
    exact: bool
    numerator: Optional[int] = None
    denominator: Optional[int] = None

    @property
    def fraction(self) -> Fraction | None:
        if not self.exact:
            return None
        return Fraction(self.numerator, self.denominator)  # type: ignore[arg-type]


def edge_expansion(graph: Graph, exact: bool | None = None) -> EdgeExpansion:
    """
    Edge expansion ``min |∂S| / |S|`` over nonempty ``S`` with ``|S| <= n/2``

    Parameters
    ----------
    graph : :obj:`Graph`
        Graph with at least two vertices

    exact : bool, optional
        ``True`` forces subset enumeration (``n <= 24``), ``False`` forces the
        spectral bound. By default enumeration is used whenever it is allowed.

    Returns
    -------
    expansion : :obj:`EdgeExpansion`
        Exact ratio, or the Cheeger lower bound ``lambda_2 / 2`` flagged as a bound

    Examples
    --------
    .. code:: python

        edge_expansion(gen_graph(GraphModel.ring(), 6, seed=0)).fraction  # Fraction(2, 3)
    """

    if graph.n < 2:
        raise InvalidParameter("edge expansion needs at least two vertices")

    if exact is None:
        exact = graph.n <= EXPANSION_EXACT_MAX_N
    if exact and graph.n > EXPANSION_EXACT_MAX_N:
        raise SizeGuardExceeded(f"exact edge expansion is limited to n <= {EXPANSION_EXACT_MAX_N}, got n={graph.n}")

    if not exact:
        laplacian = np.diag(graph.degrees()).astype(float) - graph.adjacency_matrix()
        fiedler = linalg.eigvalsh(laplacian, subset_by_index=[1, 1])[0]
        return EdgeExpansion(value=max(float(fiedler), 0.0) / 2, exact=False)

    half = graph.n // 2
    best = np.full(half + 1, np.iinfo(np.int64).max, dtype=np.int64)
    for masks in iter_subset_masks(graph.n):
        sizes = subset_bits(masks, graph.n).sum(axis=1, dtype=np.int64)
        keep = (sizes >= 1) & (sizes <= half)
        if np.any(keep):
            np.minimum.at(best, sizes[keep], boundary_sizes(graph, masks[keep]))

    ratio = min(Fraction(int(best[s]), s) for s in range(1, half + 1))
    return EdgeExpansion(
        value=float(ratio),
        exact=True,
        numerator=ratio.numerator,
        denominator=ratio.denominator,
    )


def triangle_count(graph: Graph) -> int:
    """Number of triangles, ``trace(A^3) / 6``."""
    a = graph.adjacency_matrix()
    return int(np.trace(a @ a @ a)) // 6


def neighborhood_overlap(graph: Graph) -> float:
    """
    Minimum over edges of the shared neighbor count, relative to ``d_min``

    Checks on an instance the overlap hypothesis made for geometric graphs.
    Returns 0 for edgeless graphs and graphs with an isolated vertex.
    """

    stats = degree_stats(graph)
    if not graph.edges or stats.d_min == 0:
        return 0.0
    a = graph.adjacency_matrix()
    shared = a @ a
    arr = graph.edge_array()
    return float(shared[arr[:, 0], arr[:, 1]].min()) / stats.d_min


def format_graph(graph: Graph) -> str:
    lines = [f"{graph.n} {graph.m}"]
    lines.extend(f"{i} {j}" for i, j in graph.edges)
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> Graph:
    """
    Parse the text graph format: ``n m`` header then ``m`` lines ``i j``

    Raises
    ------
    :obj:`pairlab.exceptions.FormatError`
        If the header, edge count or an edge line is malformed
    """

    rows = [line.split() for line in text.splitlines() if line.strip()]
    if not rows or len(rows[0]) != 2:
        raise FormatError("graph header must be 'n m'")
    try:
        n, m = (int(v) for v in rows[0])
        edges = [(int(i), int(j)) for i, j in rows[1:]]
    except ValueError as e:
        raise FormatError(f"malformed graph file: {e}") from e

    if len(edges) != m:
        raise FormatError(f"graph header announces {m} edges, found {len(edges)}")
    if any(i >= j for i, j in edges) or edges != sorted(edges):
        raise FormatError("graph edges must be written as 'i j' with i < j in sorted order")

    try:
        return Graph(n=n, edges=edges)
    except ValueError as e:
        raise FormatError(str(e)) from e


def write_graph(graph: Graph, path: str | os.PathLike) -> None:
    with open(path, "w") as f:
        f.write(format_graph(graph))


def read_graph(path: str | os.PathLike) -> Graph:
    with open(path) as f:
        return parse_graph(f.read())
