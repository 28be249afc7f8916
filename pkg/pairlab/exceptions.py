# SPDX-FileCopyrightText: 2024 pairlab developers
# SPDX-License-Identifier: Apache-2.0
from __future__ import annotations


class PairlabError(Exception):
    """Base class for all errors raised by pairlab"""


class InvalidParameter(PairlabError, ValueError):
    """Parameter is outside of its valid range"""


class FormatError(PairlabError, ValueError):
    """Graph, observation or assignment file is malformed"""


class UnsupportedOp(PairlabError, ValueError):
    """Algorithm is only defined for the pairwise difference relation"""


class GuardError(PairlabError, ValueError):
    """Instance is too large for an exact or enumerative computation"""


class SizeGuardExceeded(GuardError):
    """Vertex count exceeds the subset enumeration guard"""


class SearchSpaceTooLarge(GuardError):
    """Exhaustive search space exceeds the configured budget"""


class BudgetExceeded(GuardError):
    """Cycle walk enumeration exceeded the configured budget"""


class NoCrossing(PairlabError):
    """Empirical success rate never reached one half on the probability grid"""
