"""Exact rational, real-quadratic and integer-lattice arithmetic."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from math import gcd, isqrt, lcm, sqrt
from typing import Sequence, Union

from sympy import Rational, factorint
from sympy.solvers.simplex import InfeasibleLPError, linprog

from .errors import CertificateError, FieldContextError, InputError

logger = logging.getLogger(__name__)

Rat = Fraction
IntVector = tuple[int, ...]
Scalar = Union[int, Fraction, "QuadNum"]


def squarefree_core(n: int) -> tuple[int, int]:
    """
    Split a positive integer as ``n = root**2 * core`` with ``core`` squarefree.

    Args:
        n: Positive integer

    Returns:
        Tuple (core, root)

    Raises:
        InputError: If n is not positive
    """
    if n <= 0:
        raise InputError(f"squarefree core needs a positive integer, got {n}")
    core, root = 1, 1
    for prime, exponent in factorint(n).items():
        if exponent % 2:
            core *= prime
        root *= prime ** (exponent // 2)
    return core, root


@total_ordering
@dataclass(frozen=True, eq=False)
class QuadNum:
    """Exact element ``p + q*sqrt(d)`` of the real quadratic field Q(sqrt(d))."""

    p: Fraction
    q: Fraction
    d: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", Fraction(self.p))
        object.__setattr__(self, "q", Fraction(self.q))
        if self.d < 2 or isqrt(self.d) ** 2 == self.d:
            raise InputError(f"field parameter must be a positive nonsquare, got {self.d}")

    @classmethod
    def sqrt(cls, d: int) -> QuadNum:
        """Return sqrt(d) as a field element."""
        return cls(Fraction(0), Fraction(1), d)

    @property
    def is_rational(self) -> bool:
        return self.q == 0

    # Binary operands: another QuadNum of the same field, or a rational.
    # A rational QuadNum embeds into any field.
    def _operands(self, other: object) -> tuple[Fraction, Fraction, int] | None:
        if isinstance(other, QuadNum):
            if other.d == self.d or other.q == 0:
                return other.p, other.q, self.d
            if self.q == 0:
                return other.p, other.q, other.d
            raise FieldContextError(f"cannot combine Q(sqrt({self.d})) with Q(sqrt({other.d}))")
        if isinstance(other, (int, Fraction)):
            return Fraction(other), Fraction(0), self.d
        return None

    def __add__(self, other: object) -> QuadNum:
        ops = self._operands(other)
        if ops is None:
            return NotImplemented
        p, q, d = ops
        return QuadNum(self.p + p, self.q + q, d)

    __radd__ = __add__

    def __neg__(self) -> QuadNum:
        return QuadNum(-self.p, -self.q, self.d)

    def __sub__(self, other: object) -> QuadNum:
        ops = self._operands(other)
        if ops is None:
            return NotImplemented
        p, q, d = ops
        return QuadNum(self.p - p, self.q - q, d)

    def __rsub__(self, other: object) -> QuadNum:
        return (-self) + other

    def __mul__(self, other: object) -> QuadNum:
        ops = self._operands(other)
        if ops is None:
            return NotImplemented
        p, q, d = ops
        return QuadNum(self.p * p + self.q * q * d, self.p * q + self.q * p, d)

    __rmul__ = __mul__

    def __truediv__(self, other: object) -> QuadNum:
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero in quadratic field")
            return QuadNum(self.p / other, self.q / other, self.d)
        if isinstance(other, QuadNum):
            return self * other.inverse()
        return NotImplemented

    def __rtruediv__(self, other: object) -> QuadNum:
        if isinstance(other, (int, Fraction)):
            return self.inverse() * other
        return NotImplemented

    def __pow__(self, exponent: int) -> QuadNum:
        base = self if exponent >= 0 else self.inverse()
        exponent = abs(exponent)
        result = QuadNum(Fraction(1), Fraction(0), self.d)
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def conjugate(self) -> QuadNum:
        return QuadNum(self.p, -self.q, self.d)

    def norm(self) -> Fraction:
        """Field norm p**2 - q**2 * d."""
        return self.p * self.p - self.q * self.q * self.d

    def inverse(self) -> QuadNum:
        """
        Multiplicative inverse via conjugate over norm.

        Raises:
            ZeroDivisionError: If the element is zero
        """
        if self.p == 0 and self.q == 0:
            raise ZeroDivisionError("zero has no inverse in a quadratic field")
        n = self.norm()
        return QuadNum(self.p / n, -self.q / n, self.d)

    def sign(self) -> int:
        """Exact sign of p + q*sqrt(d), without floating point."""
        sp = (self.p > 0) - (self.p < 0)
        sq = (self.q > 0) - (self.q < 0)
        if sq == 0:
            return sp
        if sp == 0 or sp == sq:
            return sq
        # opposite signs: the larger of p**2 and q**2 * d wins
        return sp if self.p * self.p > self.q * self.q * self.d else sq

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            return self.q == 0 and self.p == other
        if isinstance(other, QuadNum):
            if self.d == other.d:
                return self.p == other.p and self.q == other.q
            return self.q == 0 and other.q == 0 and self.p == other.p
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.p) if self.q == 0 else hash((self.p, self.q, self.d))

    def __lt__(self, other: object) -> bool:
        if not isinstance(other, (int, Fraction, QuadNum)):
            return NotImplemented
        return (self - other).sign() < 0

    def __bool__(self) -> bool:
        return self.p != 0 or self.q != 0

    def __float__(self) -> float:
        return float(self.p) + float(self.q) * sqrt(self.d)

    def __repr__(self) -> str:
        return f"QuadNum({self.p} + {self.q}*sqrt({self.d}))"


def qnum_mul(x: QuadNum, y: QuadNum) -> QuadNum:
    """
    Multiply two elements of the same quadratic field.

    Raises:
        FieldContextError: If the fields differ
    """
    if x.d != y.d:
        raise FieldContextError(f"cannot multiply Q(sqrt({x.d})) by Q(sqrt({y.d}))")
    return x * y


def qnum_inv(x: QuadNum) -> QuadNum:
    """Inverse of a nonzero field element."""
    return x.inverse()


def qnum_sign(x: QuadNum) -> int:
    """Exact sign of a field element."""
    return x.sign()


def exact_sign(value: Scalar) -> int:
    """Exact sign of an int, Fraction or QuadNum."""
    if isinstance(value, QuadNum):
        return value.sign()
    return (value > 0) - (value < 0)


@dataclass(frozen=True)
class Lattice:
    """Integer lattice in Z^dim, stored as a basis in row-style Hermite normal form."""

    basis: tuple[IntVector, ...]
    dim: int

    @property
    def rank(self) -> int:
        return len(self.basis)

    def coordinates(self, vector: Sequence[int]) -> tuple[int, ...] | None:
        """
        Integer coordinates of a vector in the basis.

        Args:
            vector: Integer vector of length dim

        Returns:
            Coefficients, or None if the vector is not in the lattice
        """
        if len(vector) != self.dim:
            raise InputError(f"vector of length {len(vector)} in a lattice of dimension {self.dim}")
        rest = [int(x) for x in vector]
        coords: list[int] = []
        for row in self.basis:
            pivot = next(c for c, x in enumerate(row) if x)
            if any(rest[c] for c in range(pivot)):
                return None
            coefficient, remainder = divmod(rest[pivot], row[pivot])
            if remainder:
                return None
            coords.append(coefficient)
            rest = [r - coefficient * x for r, x in zip(rest, row)]
        if any(rest):
            return None
        return tuple(coords)

    def __contains__(self, vector: Sequence[int]) -> bool:
        return self.coordinates(vector) is not None

    @classmethod
    def full(cls, dim: int) -> Lattice:
        """Z^dim itself."""
        return cls(tuple(tuple(int(i == j) for j in range(dim)) for i in range(dim)), dim)


def _subtract_row(rows: list[list[int]], transform: list[list[int]], target: int, source: int, factor: int) -> None:
    rows[target] = [x - factor * y for x, y in zip(rows[target], rows[source])]
    transform[target] = [x - factor * y for x, y in zip(transform[target], transform[source])]


def hnf(vectors: Sequence[Sequence[int]], dim: int | None = None) -> tuple[Lattice, tuple[IntVector, ...]]:
    """
    Row-style Hermite normal form of the lattice spanned by integer vectors.

    Args:
        vectors: Integer vectors of a common length
        dim: Ambient dimension (required to type an empty input)

    Returns:
        Tuple (lattice, transform) where transform is unimodular and
        transform @ vectors equals the HNF rows followed by zero rows.

    Raises:
        InputError: If vector lengths differ
    """
    rows = [[int(x) for x in v] for v in vectors]
    if dim is None:
        dim = len(rows[0]) if rows else 0
    if any(len(r) != dim for r in rows):
        raise InputError("hnf input vectors must share one dimension")

    count = len(rows)
    transform = [[int(i == j) for j in range(count)] for i in range(count)]
    rank = 0
    for col in range(dim):
        if rank == count:
            break
        # Euclid on the column below the current rank
        while True:
            nonzero = [i for i in range(rank, count) if rows[i][col]]
            if not nonzero:
                break
            pivot = min(nonzero, key=lambda i: abs(rows[i][col]))
            rows[rank], rows[pivot] = rows[pivot], rows[rank]
            transform[rank], transform[pivot] = transform[pivot], transform[rank]
            finished = True
            for i in range(rank + 1, count):
                if rows[i][col]:
                    _subtract_row(rows, transform, i, rank, rows[i][col] // rows[rank][col])
                    finished = finished and rows[i][col] == 0
            if finished:
                break
        if rows[rank][col] == 0:
            continue
        if rows[rank][col] < 0:
            rows[rank] = [-x for x in rows[rank]]
            transform[rank] = [-x for x in transform[rank]]
        for i in range(rank):
            factor = rows[i][col] // rows[rank][col]
            if factor:
                _subtract_row(rows, transform, i, rank, factor)
        rank += 1

    lattice = Lattice(tuple(tuple(r) for r in rows[:rank]), dim)
    return lattice, tuple(tuple(t) for t in transform)


def integer_kernel(vectors: Sequence[Sequence[int]], dim: int | None = None) -> tuple[IntVector, ...]:
    """
    Z-basis (canonical HNF) of the integer relations n with sum(n_i * v_i) = 0.

    The relations are the transform rows that map onto zero HNF rows.
    """
    lattice, transform = hnf(vectors, dim)
    relations = transform[lattice.rank:]
    return hnf(relations, dim=len(vectors))[0].basis


def lattice_saturation(lattice: Lattice) -> Lattice:
    """
    Integer points of the rational span of a lattice.

    Computed as the integer kernel of the integer kernel: first the integer
    vectors orthogonal to the basis, then everything orthogonal to those.
    """
    if lattice.rank == 0:
        return lattice
    columns = [tuple(row[j] for row in lattice.basis) for j in range(lattice.dim)]
    orthogonal = integer_kernel(columns, dim=lattice.rank)
    dual_columns = [tuple(y[j] for y in orthogonal) for j in range(lattice.dim)]
    return Lattice(integer_kernel(dual_columns, dim=len(orthogonal)), lattice.dim)


def _rational(value: int | Fraction) -> Rational:
    value = Fraction(value)
    return Rational(value.numerator, value.denominator)


def _feasible_point(rows: list[list[Rational]], bounds: list[Rational], n: int) -> list[Fraction] | None:
    """A point x >= 0 with rows @ x <= bounds from sympy's exact simplex, or None."""
    try:
        _, point = linprog([0] * n, A=rows, b=bounds)
    except InfeasibleLPError:
        return None
    values = [Rational(v) for v in point[:n]]
    return [Fraction(int(v.p), int(v.q)) for v in values]


def strictly_positive_zero_combo(vectors: Sequence[Sequence[int | Fraction]]) -> tuple[int, ...] | None:
    """
    Find positive integers n with sum(n_i * v_i) = 0.

    Rational feasibility with n_i >= 1 is decided by sympy's exact simplex
    and the rational point is scaled to integers; the system is homogeneous
    so a rational solution exists iff an integer one does. Both outcomes are
    checked exactly: a combination must sum to zero, and a negative answer
    needs a functional y with y.v_i >= 0 for every i and sum_i y.v_i > 0.

    Args:
        vectors: Nonempty list of integer (or rational) vectors of equal length

    Returns:
        Tuple of positive integers, or None if no solution exists

    Raises:
        InputError: On empty input or mixed dimensions
        CertificateError: If the solver yields neither a valid combination
            nor a valid separating functional
    """
    if not vectors:
        raise InputError("strictly positive combination needs at least one vector")
    dim = len(vectors[0])
    if any(len(v) != dim for v in vectors):
        raise InputError("vectors must share one dimension")

    k = len(vectors)
    if dim == 0:
        return (1,) * k

    exact = [tuple(Fraction(x) for x in v) for v in vectors]

    # n_i = 1 + s_i with s_i >= 0; each equality row as a pair of inequalities
    matrix = [[_rational(v[r]) for v in exact] for r in range(dim)]
    rhs = [-sum(row, Rational(0)) for row in matrix]
    slack = _feasible_point(matrix + [[-x for x in row] for row in matrix], rhs + [-x for x in rhs], k)
    if slack is not None:
        values = [1 + s for s in slack]
        if min(values) >= 1 and all(sum(n * v[r] for n, v in zip(values, exact)) == 0 for r in range(dim)):
            scale = lcm(*(v.denominator for v in values))
            integers = [int(v * scale) for v in values]
            common = gcd(*integers)
            return tuple(n // common for n in integers)
        logger.warning("simplex point %s is not a zero combination; trying the separating side", slack)

    # y = y_plus - y_minus with -y.v_i <= 0 for every i and -sum_i y.v_i <= -1
    dual_rows = []
    for v in exact:
        row = [_rational(x) for x in v]
        dual_rows.append([-x for x in row] + row)
    total = [sum(row, Rational(0)) for row in matrix]
    dual_rows.append([-x for x in total] + total)
    split = _feasible_point(dual_rows, [Rational(0)] * k + [Rational(-1)], 2 * dim)
    if split is not None:
        y = [split[j] - split[dim + j] for j in range(dim)]
        pairings = [sum(y[r] * v[r] for r in range(dim)) for v in exact]
        if min(pairings) >= 0 and sum(pairings) > 0:
            logger.debug("no strictly positive combination among %d vectors; separated by %s", k, y)
            return None
    raise CertificateError(f"linear programming gave no checkable answer for {k} vectors")
