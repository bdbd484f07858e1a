"""SL(2,Z) and SA(2,Z) elements, classification, invariant lines and closed-form powers."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import gcd, isqrt
from typing import Sequence

from .errors import DegenerateInputError, InputError
from .exactmath import QuadNum, Scalar, squarefree_core

logger = logging.getLogger(__name__)

Vector2 = tuple[int, int]

# smallest eigenvalue of a hyperbolic SL(2,Z) element (trace 3)
_MIN_SCALE_LOG = math.log((3 + math.sqrt(5)) / 2)


def dot(u: Sequence[Scalar], v: Sequence[Scalar]) -> Scalar:
    return u[0] * v[0] + u[1] * v[1]


def cross(u: Sequence[Scalar], v: Sequence[Scalar]) -> Scalar:
    """Determinant of the 2x2 matrix with columns u, v."""
    return u[0] * v[1] - u[1] * v[0]


@dataclass(frozen=True)
class Mat2:
    """2x2 matrix over int, Fraction or QuadNum, used for changes of basis."""

    a: Scalar
    b: Scalar
    c: Scalar
    d: Scalar

    @classmethod
    def identity(cls) -> Mat2:
        return cls(1, 0, 0, 1)

    @property
    def rows(self) -> tuple[tuple[Scalar, Scalar], tuple[Scalar, Scalar]]:
        return (self.a, self.b), (self.c, self.d)

    def det(self) -> Scalar:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: Mat2 | SL2) -> Mat2:
        return Mat2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def apply(self, vector: Sequence[Scalar]) -> tuple[Scalar, Scalar]:
        x, y = vector
        return self.a * x + self.b * y, self.c * x + self.d * y

    def inverse(self) -> Mat2:
        det = self.det()
        if det == 0:
            raise InputError("singular matrix has no inverse")
        if isinstance(det, int):
            det = Fraction(det)
        return Mat2(self.d / det, -self.b / det, -self.c / det, self.a / det)

    def column(self, index: int) -> tuple[Scalar, Scalar]:
        return (self.a, self.c) if index == 0 else (self.b, self.d)


@dataclass(frozen=True)
class SL2:
    """Integer 2x2 matrix [[a, b], [c, d]] with determinant exactly 1."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self) -> None:
        for name in ("a", "b", "c", "d"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise InputError(f"SL2 entry {name} must be an integer, got {value!r}")
        if self.a * self.d - self.b * self.c != 1:
            raise InputError(f"determinant of {self.rows} is {self.a * self.d - self.b * self.c}, expected 1")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> SL2:
        """
        Build a matrix from [[a, b], [c, d]].

        Raises:
            InputError: If the shape is wrong or the determinant is not 1
        """
        if len(rows) != 2 or any(len(r) != 2 for r in rows):
            raise InputError(f"expected a 2x2 matrix, got {rows!r}")
        (a, b), (c, d) = rows
        return cls(a, b, c, d)

    @classmethod
    def identity(cls) -> SL2:
        return cls(1, 0, 0, 1)

    @property
    def rows(self) -> tuple[tuple[int, int], tuple[int, int]]:
        return (self.a, self.b), (self.c, self.d)

    @property
    def trace(self) -> int:
        return self.a + self.d

    @property
    def is_identity(self) -> bool:
        return self == _IDENTITY

    def __matmul__(self, other: SL2) -> SL2:
        return SL2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __neg__(self) -> SL2:
        return SL2(-self.a, -self.b, -self.c, -self.d)

    def inverse(self) -> SL2:
        return SL2(self.d, -self.b, -self.c, self.a)

    def power(self, exponent: int) -> SL2:
        """A**n for any integer n, by repeated squaring."""
        base = self if exponent >= 0 else self.inverse()
        exponent = abs(exponent)
        result = _IDENTITY
        while exponent:
            if exponent & 1:
                result = result @ base
            base = base @ base
            exponent >>= 1
        return result

    def apply(self, vector: Sequence[int]) -> Vector2:
        x, y = vector
        return self.a * x + self.b * y, self.c * x + self.d * y

    def commutes_with(self, other: SL2) -> bool:
        return self @ other == other @ self

    def max_entry(self) -> int:
        return max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))

    def to_mat2(self) -> Mat2:
        return Mat2(self.a, self.b, self.c, self.d)


_IDENTITY = SL2(1, 0, 0, 1)


class ElementKind(str, Enum):
    """Conjugacy-type classes of SL(2,Z) elements, decided by trace."""

    IDENTITY = "identity"
    MINUS_IDENTITY = "minus-identity"
    TORSION = "torsion"
    SHEAR = "shear"
    TWISTED_INVERSION = "twisted-inversion"
    POSITIVE_SCALE = "positive-scale"
    INVERTING_SCALE = "inverting-scale"


@dataclass(frozen=True)
class ElementClass:
    """Class of a matrix; ``torsion_order`` is set for Torsion(3, 4 or 6) only."""

    kind: ElementKind
    torsion_order: int | None = None

    @property
    def order(self) -> int | None:
        """Multiplicative order, or None for infinite-order classes."""
        if self.kind is ElementKind.IDENTITY:
            return 1
        if self.kind is ElementKind.MINUS_IDENTITY:
            return 2
        return self.torsion_order

    @property
    def is_finite(self) -> bool:
        return self.order is not None

    @property
    def is_scale(self) -> bool:
        return self.kind in (ElementKind.POSITIVE_SCALE, ElementKind.INVERTING_SCALE)

    def __str__(self) -> str:
        if self.kind is ElementKind.TORSION:
            return f"torsion({self.torsion_order})"
        return self.kind.value


def classify(matrix: SL2) -> ElementClass:
    """
    Classify an SL(2,Z) element by its trace.

    Args:
        matrix: Matrix with determinant 1

    Returns:
        Exactly one ElementClass
    """
    trace = matrix.trace
    if trace == 0:
        return ElementClass(ElementKind.TORSION, 4)
    if trace == 1:
        return ElementClass(ElementKind.TORSION, 6)
    if trace == -1:
        return ElementClass(ElementKind.TORSION, 3)
    if trace == 2:
        return ElementClass(ElementKind.IDENTITY if matrix.is_identity else ElementKind.SHEAR)
    if trace == -2:
        return ElementClass(ElementKind.MINUS_IDENTITY if (-matrix).is_identity else ElementKind.TWISTED_INVERSION)
    return ElementClass(ElementKind.POSITIVE_SCALE if trace >= 3 else ElementKind.INVERTING_SCALE)


class LineRole(str, Enum):
    """How a matrix acts on one of its invariant lines."""

    STRETCHING = "stretching"
    COMPRESSING = "compressing"
    FIXED = "fixed"


@dataclass(frozen=True)
class Line:
    """Real invariant line span(direction) with the eigenvalue acting on it."""

    direction: tuple[Scalar, Scalar]
    eigenvalue: Scalar
    role: LineRole

    def contains(self, vector: Sequence[Scalar]) -> bool:
        return cross(self.direction, vector) == 0


def _normalized(x: Scalar, y: Scalar) -> tuple[Scalar, Scalar]:
    if x == 0:
        return Fraction(0), Fraction(1)
    if isinstance(x, int):
        x = Fraction(x)
    return Fraction(1), y / x


def fixed_vector(matrix: SL2) -> Vector2:
    """
    Primitive integer eigenvector of a shear or twisted inversion.

    The leading nonzero coordinate is positive.

    Raises:
        InputError: If the matrix is neither a shear nor a twisted inversion
    """
    kind = classify(matrix).kind
    if kind is ElementKind.SHEAR:
        eps = 1
    elif kind is ElementKind.TWISTED_INVERSION:
        eps = -1
    else:
        raise InputError(f"{kind.value} matrix has no rational invariant line")
    a, b, c, d = matrix.a - eps, matrix.b, matrix.c, matrix.d - eps
    x, y = (b, -a) if (a or b) else (d, -c)
    g = gcd(x, y)
    x, y = x // g, y // g
    if x < 0 or (x == 0 and y < 0):
        x, y = -x, -y
    return x, y


def stretching_eigenvalue(matrix: SL2) -> QuadNum:
    """Eigenvalue of largest modulus of a scale, in Q(sqrt(core of trace**2 - 4))."""
    trace = matrix.trace
    if abs(trace) < 3:
        raise InputError(f"trace {trace} matrix is not a scale")
    core, root = squarefree_core(trace * trace - 4)
    sign = 1 if trace > 0 else -1
    return QuadNum(Fraction(trace, 2), Fraction(sign * root, 2), core)


def invariant_lines(matrix: SL2) -> tuple[Line, ...]:
    """
    Real one-dimensional invariant subspaces.

    Directions are normalized to (1, s) when the first coordinate is nonzero,
    else (0, 1). Scales list the stretching line first.

    Raises:
        DegenerateInputError: For I and -I
    """
    kind = classify(matrix).kind
    if kind in (ElementKind.IDENTITY, ElementKind.MINUS_IDENTITY):
        raise DegenerateInputError("every line is invariant under +-I")
    if kind is ElementKind.TORSION:
        return ()
    if kind in (ElementKind.SHEAR, ElementKind.TWISTED_INVERSION):
        eps = 1 if kind is ElementKind.SHEAR else -1
        return (Line(_normalized(*fixed_vector(matrix)), Fraction(eps), LineRole.FIXED),)
    lam = stretching_eigenvalue(matrix)
    lines = []
    for mu, role in ((lam, LineRole.STRETCHING), (lam.inverse(), LineRole.COMPRESSING)):
        # b != 0 for every scale, since b = 0 forces a = d = +-1
        lines.append(Line(_normalized(Fraction(1), (mu - matrix.a) / matrix.b), mu, role))
    return tuple(lines)


def eigen_basis(matrix: SL2) -> tuple[QuadNum, Mat2, Mat2]:
    """
    Diagonalize a scale over its quadratic field.

    Args:
        matrix: Positive or inverting scale

    Returns:
        Tuple (lam, P, Pinv) with Pinv @ A @ P = diag(lam, 1/lam), |lam| > 1,
        det(P) = 1 and P's columns the stretching and compressing directions

    Raises:
        InputError: If the matrix is not a scale
    """
    if not classify(matrix).is_scale:
        raise InputError(f"eigen basis needs a scale, got {classify(matrix)}")
    lam = stretching_eigenvalue(matrix)
    one = QuadNum(1, 0, lam.d)
    s = (lam - matrix.a) / matrix.b
    t = (lam.inverse() - matrix.a) / matrix.b
    det = t - s
    p = Mat2(one, one / det, s, t / det)
    pinv = Mat2(t / det, -(one / det), -s, one)
    return lam, p, pinv


def geom_sum(matrix: SL2, m: int) -> Mat2:
    """
    I + A + ... + A**(m-1) in O(log m) matrix operations.

    Uses (I - A)^-1 (I - A**m) when trace != 2, else the unipotent closed form
    m*I + m(m-1)/2 * (A - I). Entries are integers.
    """
    if m < 1:
        raise InputError(f"geometric sum needs m >= 1, got {m}")
    if matrix.trace == 2:
        k = m * (m - 1) // 2
        return Mat2(m + k * (matrix.a - 1), k * matrix.b, k * matrix.c, m + k * (matrix.d - 1))
    power = matrix.power(m)
    det = 2 - matrix.trace
    adjugate = Mat2(1 - matrix.d, matrix.b, matrix.c, 1 - matrix.a)
    rest = Mat2(1 - power.a, -power.b, -power.c, 1 - power.d)
    product = adjugate @ rest
    entries = []
    for value in (product.a, product.b, product.c, product.d):
        quotient, remainder = divmod(value, det)
        if remainder:
            raise ArithmeticError(f"non-integral geometric sum for {matrix.rows}")
        entries.append(quotient)
    return Mat2(*entries)


@dataclass(frozen=True)
class SA2Element:
    """Affine map x -> A x + a with A in SL(2,Z) and a in Z^2."""

    A: SL2
    a: Vector2

    def __post_init__(self) -> None:
        if len(self.a) != 2:
            raise InputError(f"translation must have two entries, got {self.a!r}")
        object.__setattr__(self, "a", (int(self.a[0]), int(self.a[1])))

    @classmethod
    def identity(cls) -> SA2Element:
        return cls(_IDENTITY, (0, 0))

    @classmethod
    def linear(cls, matrix: SL2) -> SA2Element:
        return cls(matrix, (0, 0))

    @property
    def is_identity(self) -> bool:
        return self.A.is_identity and self.a == (0, 0)

    def __mul__(self, other: SA2Element) -> SA2Element:
        return sa_mul(self, other)

    def inverse(self) -> SA2Element:
        inv = self.A.inverse()
        x, y = inv.apply(self.a)
        return SA2Element(inv, (-x, -y))

    def __pow__(self, exponent: int) -> SA2Element:
        if exponent == 0:
            return SA2Element.identity()
        if exponent < 0:
            return sa_pow(self.inverse(), -exponent)
        return sa_pow(self, exponent)

    def max_entry(self) -> int:
        return max(self.A.max_entry(), abs(self.a[0]), abs(self.a[1]))


def sa_mul(x: SA2Element, y: SA2Element) -> SA2Element:
    """(A, a) * (B, b) = (AB, A b + a)."""
    bx, by = x.A.apply(y.a)
    return SA2Element(x.A @ y.A, (bx + x.a[0], by + x.a[1]))


def sa_pow(x: SA2Element, m: int) -> SA2Element:
    """(A, a)**m = (A**m, geom_sum(A, m) a) for m >= 1."""
    if m < 1:
        raise InputError(f"power needs m >= 1, got {m}")
    return SA2Element(x.A.power(m), geom_sum(x.A, m).apply(x.a))


@dataclass(frozen=True)
class Instance:
    """Nonempty generating set of a sub-semigroup of SA(2,Z)."""

    generators: tuple[SA2Element, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "generators", tuple(self.generators))
        if not self.generators:
            raise InputError("an instance needs at least one generator")

    @property
    def k(self) -> int:
        return len(self.generators)

    @property
    def matrices(self) -> tuple[SL2, ...]:
        return tuple(g.A for g in self.generators)

    @property
    def translations(self) -> tuple[Vector2, ...]:
        return tuple(g.a for g in self.generators)

    def subset(self, indices: Sequence[int]) -> Instance:
        """Sub-instance on 0-based generator indices."""
        return Instance(tuple(self.generators[i] for i in indices))


def _root_candidate(matrix: SL2, root_trace: int) -> SL2 | None:
    # a root P of a scale M lies in Q[M]: P = x I + y M with
    # y = sqrt((T^2 - 4) / (t^2 - 4)) > 0 and x = (T - y t) / 2
    ratio = Fraction(root_trace * root_trace - 4, matrix.trace * matrix.trace - 4)
    num, den = isqrt(ratio.numerator), isqrt(ratio.denominator)
    if num * num != ratio.numerator or den * den != ratio.denominator:
        return None
    y = Fraction(num, den)
    x = (root_trace - y * matrix.trace) / 2
    entries = (x + y * matrix.a, y * matrix.b, y * matrix.c, x + y * matrix.d)
    if any(e.denominator != 1 for e in entries):
        return None
    a, b, c, d = (int(e) for e in entries)
    if a * d - b * c != 1:
        return None
    return SL2(a, b, c, d)


def primitive_root(matrix: SL2) -> tuple[int, SL2, int]:
    """
    Write an infinite-order matrix as eps * P**k with P primitive.

    P has trace >= 2 and is not a proper power in SL(2,Z). Shears use the
    gcd of A - I; scales try k-th roots guided by eigenvalue magnitudes and
    confirm each by exact powering.

    Returns:
        Tuple (eps, P, k) with eps in {1, -1} and k >= 1

    Raises:
        InputError: If the matrix has finite order
    """
    if classify(matrix).is_finite:
        raise InputError("finite-order matrices have no primitive root")
    eps = 1 if matrix.trace > 0 else -1
    positive = matrix if eps == 1 else -matrix
    if positive.trace == 2:
        n = (positive.a - 1, positive.b, positive.c, positive.d - 1)
        g = gcd(*n)
        return eps, SL2(1 + n[0] // g, n[1] // g, n[2] // g, 1 + n[3] // g), g

    trace = positive.trace
    if trace > 10**12:
        log_lam = math.log(trace)
    else:
        log_lam = math.log((trace + math.sqrt(trace * trace - 4)) / 2)
    for k in range(int(log_lam / _MIN_SCALE_LOG) + 1, 1, -1):
        estimate = math.exp(log_lam / k) + math.exp(-log_lam / k)
        for root_trace in sorted({round(estimate) - 1, round(estimate), round(estimate) + 1}):
            if root_trace < 3:
                continue
            candidate = _root_candidate(positive, root_trace)
            if candidate is not None and candidate.power(k) == positive:
                logger.debug("matrix %s is the %d-th power of %s", positive.rows, k, candidate.rows)
                return eps, candidate, k
    return eps, positive, 1
