# SPDX-FileCopyrightText: 2024 pairlab developers
# SPDX-License-Identifier: Apache-2.0
from __future__ import annotations

import logging
from enum import Enum
from math import gcd
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import root_validator, validator  # pylint: disable=no-name-in-module

from .exceptions import InvalidParameter
from .internal import FrozenModel

log = logging.getLogger(__name__)

MAX_MODULUS = 2**62

# products of two reduced elements fit into int64 below this modulus
INT64_SAFE_MODULUS = 2**31


class GroupSpec(FrozenModel):
    """Cyclic group Z_M

    Parameters
    ----------
    modulus : int
        Group size ``M``, ``2 <= M <= 2**62``

    Attributes
    ----------
    modulus : int
        Group size

    Examples
    --------
    .. code:: python

        group = GroupSpec(modulus=5)
    """

    modulus: int

    @validator("modulus")
    def valid_modulus(cls, val):  # pylint: disable=no-self-argument
        if not 2 <= val <= MAX_MODULUS:
            raise ValueError(f"modulus must lie in [2, 2**62], got {val}")
        return val

    def __str__(self):
        return f"Z_{self.modulus}"

    def contains(self, value: int) -> bool:
        return 0 <= value < self.modulus

    def check(self, value: int) -> int:
        """Return ``value`` as int or raise if it is not an element of the group."""
        value = int(value)
        if not self.contains(value):
            raise InvalidParameter(f"element {value} is not in [0, {self.modulus})")
        return value

    def check_array(self, values) -> np.ndarray:
        """Return ``values`` as an int64 array or raise if any entry is out of range."""
        arr = np.asarray(values, dtype=np.int64)
        if arr.size and (arr.min() < 0 or arr.max() >= self.modulus):
            raise InvalidParameter(f"elements must lie in [0, {self.modulus})")
        return arr


# pylint: disable=invalid-name
class OpKind(Enum):
    """Pairwise relation variant"""

    DIFFERENCE = "diff"
    """ ``x - y`` """

    SUM = "sum"
    """ ``x + y`` """

    AFFINE = "affine"
    """ ``a*x + b*y`` """


class RelationOp(FrozenModel):
    """Pairwise relation ``x_i ⊖ x_j`` over a cyclic group

    Every relation is affine, ``x ⊖ y = alpha*x + beta*y mod M``. The variant tag
    is kept for reporting even though difference and sum are affine as well.

    Parameters
    ----------
    kind : :obj:`str` or :obj:`OpKind`, optional
        Relation variant

    a : int, optional
        First coefficient, affine relations only

    b : int, optional
        Second coefficient, affine relations only

    Examples
    --------
    .. code:: python

        op = RelationOp.difference()
        op = RelationOp.parse_tag("affine:2:3")
        op = RelationOp(kind="affine", a=2, b=3)
    """

    kind: OpKind = OpKind.DIFFERENCE
    a: Optional[int] = None
    b: Optional[int] = None

    @root_validator
    def coefficients_match_kind(cls, values):  # pylint: disable=no-self-argument
        kind = values.get("kind")
        if kind == OpKind.AFFINE:
            if values.get("a") is None or values.get("b") is None:
                raise ValueError("affine relation requires both coefficients")
        elif values.get("a") is not None or values.get("b") is not None:
            raise ValueError(f"{kind} relation takes no coefficients")
        return values

    @classmethod
    def difference(cls) -> RelationOp:
        return cls(kind=OpKind.DIFFERENCE)

    @classmethod
    def sum(cls) -> RelationOp:
        return cls(kind=OpKind.SUM)

    @classmethod
    def affine(cls, a: int, b: int) -> RelationOp:
        return cls(kind=OpKind.AFFINE, a=a, b=b)

    @classmethod
    def parse_tag(cls, tag: str) -> RelationOp:
        """
        Parse serialization tag

        Parameters
        ----------
        tag : str
            One of ``diff``, ``sum`` or ``affine:a:b``

        Returns
        -------
        op : :obj:`RelationOp`
            Parsed relation

        Examples
        --------
        .. code:: python

            op = RelationOp.parse_tag("affine:2:3")
        """

        parts = tag.strip().split(":")
        if parts[0] == OpKind.AFFINE.value:
            if len(parts) != 3:
                raise InvalidParameter(f"affine tag must look like 'affine:a:b', got {tag!r}")
            try:
                return cls.affine(int(parts[1]), int(parts[2]))
            except ValueError as e:
                raise InvalidParameter(f"bad affine coefficients in {tag!r}") from e

        if len(parts) == 1 and parts[0] in (OpKind.DIFFERENCE.value, OpKind.SUM.value):
            return cls(kind=OpKind(parts[0]))

        raise InvalidParameter(f"unknown relation tag {tag!r}")

    @property
    def is_difference(self) -> bool:
        return self.kind == OpKind.DIFFERENCE

    def acts_as_difference(self, group: GroupSpec) -> bool:
        """Whether the relation equals ``x - y`` over ``group``, whatever its tag."""
        return self.coefficients(group) == (1, group.modulus - 1)

    def coefficients(self, group: GroupSpec) -> Tuple[int, int]:
        """Coefficients ``(alpha, beta)`` of ``x ⊖ y = alpha*x + beta*y mod M``, reduced mod M."""
        m = group.modulus
        if self.kind == OpKind.DIFFERENCE:
            return 1, m - 1
        if self.kind == OpKind.SUM:
            return 1, 1
        return self.a % m, self.b % m  # type: ignore[operator]

    def reduced(self, group: GroupSpec) -> RelationOp:
        """Same relation with affine coefficients reduced mod M; raise if it is not admissible."""
        if not validate_op(self, group):
            raise InvalidParameter(f"relation {self.tag()} violates the cancellation axioms over {group}")
        if self.kind != OpKind.AFFINE:
            return self
        alpha, beta = self.coefficients(group)
        return self.affine(alpha, beta)

    def tag(self, group: GroupSpec | None = None) -> str:
        """Serialization tag, with affine coefficients reduced when ``group`` is given."""
        if self.kind != OpKind.AFFINE:
            return self.kind.value
        a, b = self.coefficients(group) if group is not None else (self.a, self.b)
        return f"affine:{a}:{b}"

    def __str__(self):
        return self.tag()


def validate_op(op: RelationOp, group: GroupSpec) -> bool:
    """
    Check both cancellation axioms of a relation over ``group``

    For ``alpha*x + beta*y mod M`` the maps ``y -> x ⊖ y`` and ``x -> x ⊖ y``
    are bijections exactly when ``alpha`` and ``beta`` are coprime to ``M``.

    Parameters
    ----------
    op : :obj:`RelationOp`
        Relation

    group : :obj:`GroupSpec`
        Group

    Returns
    -------
    valid : bool
        ``True`` if the relation is admissible

    Examples
    --------
    .. code:: python

        validate_op(RelationOp.affine(2, 3), GroupSpec(modulus=5))  # True
        validate_op(RelationOp.affine(2, 1), GroupSpec(modulus=4))  # False
    """

    alpha, beta = op.coefficients(group)
    return gcd(alpha, group.modulus) == 1 and gcd(beta, group.modulus) == 1


def op_apply(op: RelationOp, group: GroupSpec, a: int, b: int) -> int:
    """
    Evaluate ``a ⊖ b``

    Parameters
    ----------
    op : :obj:`RelationOp`
        Relation

    group : :obj:`GroupSpec`
        Group

    a, b : int
        Group elements

    Returns
    -------
    value : int
        ``alpha*a + beta*b mod M``, computed with exact integers

    Examples
    --------
    .. code:: python

        op_apply(RelationOp.difference(), GroupSpec(modulus=5), 2, 4)  # 3
    """

    a = group.check(a)
    b = group.check(b)
    alpha, beta = op.coefficients(group)
    return (alpha * a + beta * b) % group.modulus


def mulmod(coefficient: int, values: np.ndarray, modulus: int) -> np.ndarray:
    """Exact ``coefficient * values mod modulus`` for reduced int64 values."""
    values = np.asarray(values, dtype=np.int64)
    if modulus <= INT64_SAFE_MODULUS:
        return (np.int64(coefficient) * values) % modulus
    wide = (values.astype(object) * coefficient) % modulus
    return wide.astype(np.int64)


def addmod(u: np.ndarray, v: np.ndarray, modulus: int) -> np.ndarray:
    """Exact ``u + v mod modulus`` for reduced int64 values, the sum stays below 2**63."""
    return (u + v) % modulus


def combine(op: RelationOp, group: GroupSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Vectorized ``a ⊖ b`` over arrays of reduced elements."""
    alpha, beta = op.coefficients(group)
    m = group.modulus
    return addmod(mulmod(alpha, a, m), mulmod(beta, b, m), m)


def solve_right(op: RelationOp, group: GroupSpec, a: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Vectorized unique ``b`` with ``a ⊖ b = y``."""
    alpha, beta = op.coefficients(group)
    m = group.modulus
    rest = (np.asarray(y, dtype=np.int64) - mulmod(alpha, a, m)) % m
    return mulmod(pow(beta, -1, m), rest, m)


def solve_left(op: RelationOp, group: GroupSpec, b: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Vectorized unique ``a`` with ``a ⊖ b = y``."""
    alpha, beta = op.coefficients(group)
    m = group.modulus
    rest = (np.asarray(y, dtype=np.int64) - mulmod(beta, b, m)) % m
    return mulmod(pow(alpha, -1, m), rest, m)


class Assignment(FrozenModel):
    """Vector of group elements, one per vertex

    Parameters
    ----------
    values : :obj:`list` of int
        Element of each vertex

    Examples
    --------
    .. code:: python

        x = Assignment(values=[0, 2, 1])
        x = Assignment.from_array(np.zeros(5, dtype=np.int64))
    """

    values: Tuple[int, ...]

    @validator("values", each_item=True)
    def non_negative(cls, val):  # pylint: disable=no-self-argument
        if val < 0:
            raise ValueError(f"elements are non-negative, got {val}")
        return val

    @classmethod
    def from_array(cls, values) -> Assignment:
        return cls(values=tuple(int(v) for v in np.asarray(values).ravel()))

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __str__(self):
        return " ".join(str(v) for v in self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.int64)

    def check(self, group: GroupSpec, n: int | None = None) -> Assignment:
        """Raise if an entry is outside ``group`` or the length differs from ``n``."""
        if n is not None and len(self.values) != n:
            raise InvalidParameter(f"assignment has {len(self.values)} entries, expected {n}")
        group.check_array(self.values)
        return self

    def shifted(self, shift: int, group: GroupSpec) -> Assignment:
        """Add ``shift`` to every entry."""
        m = group.modulus
        return self.from_array(addmod(self.as_array() % m, np.int64(shift % m), m))

    def canonical(self, op: RelationOp, group: GroupSpec) -> Assignment:
        """For the difference relation, the global shift with ``x_0 = 0``; otherwise unchanged."""
        if not op.is_difference or not self.values or self.values[0] == 0:
            return self
        return self.shifted(group.modulus - self.values[0], group)


AssignmentLike = Union[Assignment, Sequence[int], np.ndarray]


def as_values(x: AssignmentLike) -> np.ndarray:
    if isinstance(x, Assignment):
        return x.as_array()
    return np.asarray(x, dtype=np.int64)


def relation_matrix(x: AssignmentLike, op: RelationOp, group: GroupSpec) -> np.ndarray:
    """
    Matrix of all pairwise relations

    Parameters
    ----------
    x : :obj:`Assignment` or sequence of int
        Assignment

    op : :obj:`RelationOp`
        Relation

    group : :obj:`GroupSpec`
        Group

    Returns
    -------
    matrix : :obj:`numpy.ndarray`
        ``n x n`` int64 matrix with entry ``(i, j)`` equal to ``x_i ⊖ x_j``

    Examples
    --------
    .. code:: python

        relation_matrix([1, 2, 4], RelationOp.sum(), GroupSpec(modulus=5))
    """

    values = group.check_array(as_values(x))
    n = values.size
    left = np.repeat(values, n)
    right = np.tile(values, n)
    return combine(op, group, left, right).reshape(n, n)
