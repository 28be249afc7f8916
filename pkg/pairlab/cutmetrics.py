# SPDX-FileCopyrightText: 2024 pairlab developers
# SPDX-License-Identifier: Apache-2.0
"""Exact cut-set statistics on small graphs.

Everything here enumerates vertex subsets and is meant for checking
cut-balance hypotheses on toy instances, never for experiment-scale graphs.
"""
from __future__ import annotations

import logging
import math
from functools import lru_cache
from typing import Dict, Optional, Tuple

import numpy as np

from .exceptions import InvalidParameter, SizeGuardExceeded
from .graphs import (
    Graph,
    boundary_sizes,
    degree_stats,
    is_connected,
    iter_subset_masks,
    subset_bits,
)
from .internal import FrozenModel

log = logging.getLogger(__name__)

NK_MAX_N = 22
BETA_MAX_N = 16
LOG_BASE = "e"


class CutMetricsReport(FrozenModel):
    """Cut-set statistics of a graph

    Attributes
    ----------
    Nk_table : :obj:`dict` of int to int
        ``N_k`` for every ``k`` in ``[0, |E|]``

    alpha_lb, alpha_ub : float
        Maxima over ``k`` of ``log(N_{k*d_min}) / k`` and ``log(N_{k*d_max}) / k``

    beta : int, optional
        Cross-cut statistic at ``K_used``, ``None`` above the enumeration guard

    K_used : float
        Constant ``K`` of the cross-cut statistic

    k_range_used : :obj:`tuple` of int
        Inclusive range of ``k`` the exponent maxima run over

    log_base : str
        Logarithm base of the exponents

    Examples
    --------
    .. code:: python

        report = cut_metrics_report(graph, K=10)
        print(report.json())
    """

    Nk_table: Dict[int, int]
    alpha_lb: float
    alpha_ub: float
    beta: Optional[int] = None
    K_used: float
    k_range_used: Tuple[int, int]
    log_base: str = LOG_BASE


@lru_cache(maxsize=16)
def _histogram(graph: Graph) -> np.ndarray:
    counts = np.zeros(graph.m + 1, dtype=np.int64)
    for masks in iter_subset_masks(graph.n):
        counts += np.bincount(boundary_sizes(graph, masks), minlength=graph.m + 1)
    return counts


def boundary_histogram(graph: Graph) -> np.ndarray:
    """
    Number of vertex subsets with each boundary size

    Returns
    -------
    histogram : :obj:`numpy.ndarray`
        Entry ``b`` is the number of ``S`` with ``|∂S| = b``, for ``b`` in ``[0, |E|]``
    """

    if graph.n > NK_MAX_N:
        raise SizeGuardExceeded(f"subset enumeration is limited to n <= {NK_MAX_N}, got n={graph.n}")
    return _histogram(graph).copy()


def count_Nk(graph: Graph, k: int) -> int:  # pylint: disable=invalid-name
    """
    Number of vertex subsets whose edge boundary has at most ``k`` edges

    The empty set and ``V`` are counted.

    Examples
    --------
    .. code:: python

        count_Nk(Graph(n=3, edges=[(0, 1), (0, 2), (1, 2)]), 1)  # 2
    """

    histogram = boundary_histogram(graph)
    if k < 0:
        return 0
    return int(histogram[: k + 1].sum())


def _connected_degrees(graph: Graph) -> Tuple[int, int]:
    if graph.n > NK_MAX_N:
        raise SizeGuardExceeded(f"subset enumeration is limited to n <= {NK_MAX_N}, got n={graph.n}")
    if graph.n < 2 or not is_connected(graph):
        raise InvalidParameter("cut exponents are defined for connected graphs with at least two vertices")
    stats = degree_stats(graph)
    return stats.d_min, stats.d_max


def _exponent(cumulative: np.ndarray, degree: int, k_max: int) -> float:
    m = len(cumulative) - 1
    return max(math.log(cumulative[min(k * degree, m)]) / k for k in range(1, k_max + 1))


def alpha_exponents(graph: Graph) -> Tuple[float, float]:
    """
    Exponents ``(alpha_lb, alpha_ub)`` of the cut-set counts, natural logarithm

    ``k`` runs over ``[1, ceil(|E| / d)]``; past that ``N`` is saturated at ``2**n``
    and the ratio only decreases.

    Examples
    --------
    .. code:: python

        alpha_lb, alpha_ub = alpha_exponents(gen_graph(GraphModel.ring(), 5, seed=0))
    """

    d_min, d_max = _connected_degrees(graph)
    cumulative = np.cumsum(boundary_histogram(graph))
    alpha_lb = _exponent(cumulative, d_min, math.ceil(graph.m / d_min))
    alpha_ub = _exponent(cumulative, d_max, math.ceil(graph.m / d_max))
    return alpha_lb, alpha_ub


def beta_metric(graph: Graph, K: float) -> int:  # pylint: disable=invalid-name
    """
    Cross-cut statistic ``beta_m^K``, literal reading

    Over proper nonempty ``S`` with ``|∂S| / (|S| d_min) <= K``, the largest number of
    ``S1 ⊆ S`` with ``|E(S1, S \\ S1)| / (|S| d_min) >= (K - 3) / K``.

    Parameters
    ----------
    graph : :obj:`Graph`
        Graph with ``n <= 16`` and no isolated vertex

    K : float
        Positive constant

    Returns
    -------
    beta : int
        0 when no ``S`` qualifies or no ``S1`` reaches the threshold
    """

    if K <= 0:
        raise InvalidParameter(f"K must be positive, got {K}")
    if graph.n > BETA_MAX_N:
        raise SizeGuardExceeded(f"cross-cut enumeration is limited to n <= {BETA_MAX_N}, got n={graph.n}")

    d_min = degree_stats(graph).d_min
    if d_min == 0:
        raise InvalidParameter("cross-cut statistic needs a graph without isolated vertices")

    masks = np.arange(1, (1 << graph.n) - 1, dtype=np.int64)
    sizes = subset_bits(masks, graph.n).sum(axis=1, dtype=np.int64)
    qualifying = masks[boundary_sizes(graph, masks) <= K * sizes * d_min]

    arr = graph.edge_array()
    best = 0
    for mask in qualifying.tolist():
        members = [v for v in range(graph.n) if mask >> v & 1]
        size = len(members)
        if K <= 3:
            best = max(best, 1 << size)
            continue

        position = {v: idx for idx, v in enumerate(members)}
        inside = [(position[i], position[j]) for i, j in arr.tolist() if i in position and j in position]
        if not inside:
            continue

        pu, pv = np.asarray(inside, dtype=np.int64).T
        bits = subset_bits(np.arange(1 << size, dtype=np.int64), size)
        cross = (bits[:, pu] != bits[:, pv]).sum(axis=1)
        best = max(best, int(np.count_nonzero(cross * K >= (K - 3) * size * d_min)))

    log.debug(f"beta_metric: {graph} K={K} -> {best}")
    return best


def cut_metrics_report(graph: Graph, K: float) -> CutMetricsReport:
    """
    All cut-set statistics of a small graph

    ``beta`` is left empty when ``n`` exceeds its tighter enumeration guard.
    """

    d_min, _ = _connected_degrees(graph)
    histogram = boundary_histogram(graph)
    cumulative = np.cumsum(histogram)
    alpha_lb, alpha_ub = alpha_exponents(graph)
    beta = beta_metric(graph, K) if graph.n <= BETA_MAX_N else None

    return CutMetricsReport(
        Nk_table={k: int(cumulative[k]) for k in range(graph.m + 1)},
        alpha_lb=alpha_lb,
        alpha_ub=alpha_ub,
        beta=beta,
        K_used=K,
        k_range_used=(1, math.ceil(graph.m / d_min)),
    )
