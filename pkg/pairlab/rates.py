# SPDX-FileCopyrightText: 2024 pairlab developers
# SPDX-License-Identifier: Apache-2.0
"""Order-of-magnitude recovery rates with every unspecified constant set to 1.

Poly-logarithmic factors are instantiated as ``log n`` (natural logarithm).
The values are meant for scaling comparisons, never as absolute thresholds.
"""
from __future__ import annotations

import logging
import math
from enum import Enum
from typing import Optional

from .exceptions import InvalidParameter
from .graphs import GraphKind, GraphModel
from .internal import FrozenModel

log = logging.getLogger(__name__)


# pylint: disable=invalid-name
class Regime(Enum):
    """Branch of a rate formula"""

    INFORMATION = "information"
    """ Rate shrinks like ``1 / sqrt(M)`` """

    TRANSITION = "transition"
    """ Between the two limits, ``1 / log M`` behaviour """

    CONNECTIVITY = "connectivity"
    """ Rate independent of ``M``, set by the graph cuts """


class RatePrediction(FrozenModel):
    """Evaluated rate formula

    Attributes
    ----------
    regime : :obj:`Regime`
        Selected branch

    value : float
        Non-corruption rate with unit constants

    degree : float
        Degree the formula was evaluated at

    converse : float, optional
        Lower-bound expression ``sqrt(log((M-1)n) / ((d+1)(M-1)))`` reported alongside

    Examples
    --------
    .. code:: python

        rate = predict(1000, 2, 1000.0)
        print(rate.regime, rate.value)
    """

    regime: Regime
    value: float
    degree: float
    converse: Optional[float] = None

    def __str__(self):
        return f"{self.regime.value}: {self.value:.6g}"


def _check(n: int, M: int, degree: float) -> None:  # pylint: disable=invalid-name
    if n < 2:
        raise InvalidParameter(f"n must be at least 2, got {n}")
    if M < 2:
        raise InvalidParameter(f"M must be at least 2, got {M}")
    if degree < 1:
        raise InvalidParameter(f"degree must be at least 1, got {degree}")


def degree_scale(model: GraphModel, n: int) -> float:
    """
    Typical degree of a graph model

    ``n*q`` for Erdos-Renyi, ``n*r**2`` for geometric, ``k`` for small-world,
    2 for the ring and ``n - 1`` for the complete graph.
    """

    if model.kind == GraphKind.ERDOS_RENYI:
        return n * model.q  # type: ignore[operator]
    if model.kind == GraphKind.GEOMETRIC:
        return n * model.r**2  # type: ignore[operator]
    if model.kind == GraphKind.SMALL_WORLD:
        return float(model.k)  # type: ignore[arg-type]
    if model.kind == GraphKind.RING:
        return 2.0
    return float(n - 1)


def converse_bound(n: int, M: int, d_max: float) -> float:  # pylint: disable=invalid-name
    """``sqrt(log((M-1)n) / ((d_max+1)(M-1)))``"""
    _check(n, M, d_max)
    return math.sqrt(math.log((M - 1) * n) / ((d_max + 1) * (M - 1)))


def predict(n: int, M: int, d_max: float) -> RatePrediction:  # pylint: disable=invalid-name
    """
    Minimax rate of a graph with maximum degree ``d_max``

    Information limited ``sqrt(log n / (d M))`` when ``M <= d / log n``,
    connectivity limited ``log n / d`` when ``M > d`` and
    ``log n / (d log(2 M log n / d))`` in between.

    Examples
    --------
    .. code:: python

        predict(1000, 2, 1000.0).value  # 0.0588
    """

    _check(n, M, d_max)
    log_n = math.log(n)

    if M <= d_max / log_n:
        regime, value = Regime.INFORMATION, math.sqrt(log_n / (d_max * M))
    elif M > d_max:
        regime, value = Regime.CONNECTIVITY, log_n / d_max
    else:
        regime, value = Regime.TRANSITION, log_n / (d_max * math.log(2 * M * log_n / d_max))

    log.debug(f"predict: n={n} M={M} d={d_max} -> {regime.value} {value:.6g}")
    return RatePrediction(regime=regime, value=value, degree=d_max, converse=converse_bound(n, M, d_max))


def converse_rate(n: int, M: int, d_max: float) -> RatePrediction:  # pylint: disable=invalid-name
    """
    Rate below which no decoder recovers, all three branches

    Examples
    --------
    .. code:: python

        converse_rate(1000, 10**6, 100.0).value  # 0.01
    """

    _check(n, M, d_max)
    log_mn = math.log(M * n)

    if M < d_max / log_mn:
        regime, value = Regime.INFORMATION, converse_bound(n, M, d_max)
    elif M > d_max:
        regime, value = Regime.CONNECTIVITY, 1 / d_max
    else:
        regime = Regime.TRANSITION
        value = math.log((M - 1) * n) / (d_max * math.log(2 * M * log_mn / d_max))

    return RatePrediction(regime=regime, value=value, degree=d_max)


def achievability_rate(
    n: int,
    M: int,  # pylint: disable=invalid-name
    d_min: float,
    alpha_lb: float,
    beta: int,
) -> RatePrediction:
    """
    Rate at which the maximum compatibility decoder provably succeeds

    With ``L = log n + alpha_lb + log(max(beta, 1))``: ``sqrt(L / (M d_min))``
    when ``M < d_min / (log n + alpha_lb)``, ``L / d_min`` when ``M > d_min``,
    otherwise ``max(log n, sqrt(alpha_lb log n)) / (d_min sqrt(log(M L / d_min)))``.
    """

    _check(n, M, d_min)
    if alpha_lb < 0:
        raise InvalidParameter(f"alpha_lb must be non-negative, got {alpha_lb}")

    log_n = math.log(n)
    spread = log_n + alpha_lb + math.log(max(beta, 1))

    if M < d_min / (log_n + alpha_lb):
        return RatePrediction(regime=Regime.INFORMATION, value=math.sqrt(spread / (M * d_min)), degree=d_min)

    inner = math.log(M * spread / d_min)
    if M > d_min or inner <= 0:
        return RatePrediction(regime=Regime.CONNECTIVITY, value=spread / d_min, degree=d_min)

    value = max(log_n, math.sqrt(alpha_lb * log_n)) / (d_min * math.sqrt(inner))
    return RatePrediction(regime=Regime.TRANSITION, value=value, degree=d_min)


def cycle_rate(n: int, p_obs: float, k: int) -> float:
    """Non-corruption rate sufficient for the ``k``-cycle decoder, ``log(n)**2 / (p_obs n**((k-2)/(k-1)))``."""
    if n < 2 or not 0 < p_obs <= 1 or k < 3:
        raise InvalidParameter(f"need n >= 2, 0 < p_obs <= 1 and k >= 3, got n={n} p_obs={p_obs} k={k}")
    return math.log(n) ** 2 / (p_obs * n ** ((k - 2) / (k - 1)))


def cycle_modulus(n: int, k: int, eps: float = 0.0) -> float:
    """Group size the ``k``-cycle decoder needs, ``n**(k + eps)``."""
    if n < 2 or k < 3 or eps < 0:
        raise InvalidParameter(f"need n >= 2, k >= 3 and eps >= 0, got n={n} k={k} eps={eps}")
    return float(n) ** (k + eps)
