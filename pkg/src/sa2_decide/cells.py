"""The positive-scale case: eigen coordinates, cells, the lineality criterion and certificates."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .algebra import SL2, ElementKind, Instance, Mat2, classify, eigen_basis
from .errors import CertificateError, InputError, ResourceError
from .exactmath import QuadNum, Scalar, exact_sign, strictly_positive_zero_combo
from .models import Caps
from .witness import PowerWord, evaluate_word, verify_identity_certificate

logger = logging.getLogger(__name__)

QuadVector = tuple[Scalar, Scalar]


@dataclass(frozen=True, order=True)
class Cell:
    """Sign pattern (sx, sy) in {-1, 0, 1}^2: an open quadrant, an open half-axis or the origin."""

    sx: int
    sy: int

    @property
    def dimension(self) -> int:
        return (self.sx != 0) + (self.sy != 0)

    def __str__(self) -> str:
        symbol = {-1: "-", 0: "0", 1: "+"}
        return f"({symbol[self.sx]},{symbol[self.sy]})"


def cell_of(vector: Sequence[Scalar]) -> Cell:
    return Cell(exact_sign(vector[0]), exact_sign(vector[1]))


@dataclass(frozen=True)
class DiagonalAffine:
    """(diag(lam**e, lam**-e), (x, y)) in eigen coordinates of a positive scale."""

    exponent: int
    x: Scalar
    y: Scalar
    lam: QuadNum

    def __mul__(self, other: DiagonalAffine) -> DiagonalAffine:
        return DiagonalAffine(
            self.exponent + other.exponent,
            self.x + self.lam**self.exponent * other.x,
            self.y + self.lam ** (-self.exponent) * other.y,
            self.lam,
        )

    def __pow__(self, n: int) -> DiagonalAffine:
        if n < 1:
            raise InputError(f"power needs n >= 1, got {n}")
        result = self
        for _ in range(n - 1):
            result = result * self
        return result

    def same_as(self, other: DiagonalAffine) -> bool:
        return self.exponent == other.exponent and self.x == other.x and self.y == other.y


@dataclass(frozen=True)
class ScaleCaseData:
    """
    Everything the positive-scale criterion needs, computed exactly in Q(sqrt(D)).

    Generator indices are 0-based here; words built from the data are 1-based.
    """

    instance: Instance
    lam: QuadNum
    basis: Mat2
    basis_inverse: Mat2
    exponents: tuple[int, ...]
    roots: tuple[int, ...]
    coords: tuple[QuadVector, ...]
    j_plus: tuple[int, ...]
    j_minus: tuple[int, ...]
    j_zero: tuple[int, ...]
    d: dict[tuple[int, int], QuadVector] = field(hash=False)
    e: dict[int, QuadVector] = field(hash=False)
    cells: frozenset[Cell]


def build_scale_case(inst: Instance, generator: SL2, z: Sequence[int]) -> ScaleCaseData:
    """
    Change to the eigenbasis of a positive scale and compute d_ij, e_k and S.

    With (a_i, b_i) = P^-1 a_i, n_i = |z_i| (1 when z_i = 0):

        d_ij = (-a_i / (1 - lam**n_i) + a_j / (1 - lam**-n_j),
                 b_i / (1 - lam**-n_i) - b_j / (1 - lam**n_j))

    for i in J+ and j in J-, and e_k = (a_k, b_k) for k in J0.

    Raises:
        InputError: If the generator is not a positive scale or A_i != G**z_i
    """
    if classify(generator).kind is not ElementKind.POSITIVE_SCALE:
        raise InputError(f"scale case needs a positive scale, got {classify(generator)}")
    if len(z) != inst.k:
        raise InputError(f"{len(z)} exponents for {inst.k} generators")
    for index, (matrix, exponent) in enumerate(zip(inst.matrices, z), start=1):
        if generator.power(exponent) != matrix:
            raise InputError(f"generator {index} is not the {exponent}-th power of {generator.rows}")

    lam, basis, basis_inverse = eigen_basis(generator)
    one = QuadNum(1, 0, lam.d)
    coords = tuple(basis_inverse.apply(a) for a in inst.translations)
    roots = tuple(abs(e) or 1 for e in z)
    j_plus = tuple(i for i, e in enumerate(z) if e > 0)
    j_minus = tuple(i for i, e in enumerate(z) if e < 0)
    j_zero = tuple(i for i, e in enumerate(z) if e == 0)

    d: dict[tuple[int, int], QuadVector] = {}
    for i in j_plus:
        for j in j_minus:
            (a_i, b_i), (a_j, b_j) = coords[i], coords[j]
            n_i, n_j = roots[i], roots[j]
            d[(i, j)] = (
                -a_i / (one - lam**n_i) + a_j / (one - lam ** (-n_j)),
                b_i / (one - lam ** (-n_i)) - b_j / (one - lam**n_j),
            )
    e = {k: coords[k] for k in j_zero}
    cells = frozenset(cell_of(v) for v in d.values()) | frozenset(cell_of(v) for v in e.values())
    logger.debug("scale case lam=%r J+=%s J-=%s J0=%s S=%s", lam, j_plus, j_minus, j_zero, sorted(cells))
    return ScaleCaseData(
        inst, lam, basis, basis_inverse, tuple(z), roots, coords, j_plus, j_minus, j_zero, d, e, cells
    )


def radical(coords: QuadVector, z: int, lam: QuadNum) -> DiagonalAffine:
    """
    n-th root of (diag(lam**z, lam**-z), (a, b)) with n = |z|, as an exact eigen-coordinate element.

    The root has diagonal part diag(lam**sign(z), lam**-sign(z)) and satisfies
    root**n == original; z = 0 returns the element unchanged.
    """
    a, b = coords
    if z == 0:
        return DiagonalAffine(0, a, b, lam)
    one = QuadNum(1, 0, lam.d)
    n = abs(z)
    inv = lam.inverse()
    if z > 0:
        return DiagonalAffine(1, a * (one - lam) / (one - lam**n), b * (one - inv) / (one - inv**n), lam)
    return DiagonalAffine(-1, a * (one - inv) / (one - inv**n), b * (one - lam) / (one - lam**n), lam)


class LinealityKind(str, Enum):
    ZERO = "zero"
    LINE = "line"
    PLANE = "plane"


@dataclass(frozen=True)
class Lineality:
    """Largest linear subspace of a planar cone; lines are always coordinate axes here."""

    kind: LinealityKind
    direction: tuple[int, int] | None = None

    def __str__(self) -> str:
        if self.kind is LinealityKind.LINE:
            return "x-axis" if self.direction == (1, 0) else "y-axis"
        return self.kind.value


def _contains_axis_direction(cells: frozenset[Cell], axis: int, sign: int) -> bool:
    """Whether the cone generated by the cells contains sign * e_axis."""
    other = 1 - axis
    for cell in cells:
        signs = (cell.sx, cell.sy)
        if signs[axis] != sign:
            continue
        if signs[other] == 0:
            return True
        # a cell off the axis needs some cell on the other side to cancel
        if any((c.sx, c.sy)[other] == -signs[other] for c in cells):
            return True
    return False


def cone_lineality(cells: Sequence[Cell] | frozenset[Cell]) -> Lineality:
    """
    Lineality space of the convex cone generated by a union of cells.

    Examples:
        {(+,0), (-,0)} gives the x-axis; {(+,+), (-,-)} gives the plane.
    """
    cells = frozenset(cells)
    x_line = _contains_axis_direction(cells, 0, 1) and _contains_axis_direction(cells, 0, -1)
    y_line = _contains_axis_direction(cells, 1, 1) and _contains_axis_direction(cells, 1, -1)
    if x_line and y_line:
        return Lineality(LinealityKind.PLANE)
    if x_line:
        return Lineality(LinealityKind.LINE, (1, 0))
    if y_line:
        return Lineality(LinealityKind.LINE, (0, 1))
    return Lineality(LinealityKind.ZERO)


def cell_in(cell: Cell, lineality: Lineality) -> bool:
    """Exact containment of a cell in a lineality space."""
    if cell.dimension == 0 or lineality.kind is LinealityKind.PLANE:
        return True
    if lineality.kind is LinealityKind.ZERO or cell.dimension == 2:
        return False
    on_x_axis = cell.sy == 0
    return on_x_axis == (lineality.direction == (1, 0))


def _admissible_pairs(data: ScaleCaseData, lineality: Lineality) -> list[tuple[int, int]]:
    return [pair for pair, vector in data.d.items() if cell_in(cell_of(vector), lineality)]


def scale_criterion(data: ScaleCaseData) -> bool:
    """
    Whether the positive-scale instance generates a group.

    Every i in J+ and every j in J- needs some d_ij whose cell lies in the
    lineality space of cone(S), and every e_k must lie in it too.
    """
    if not data.j_plus or not data.j_minus:
        return False
    lineality = cone_lineality(data.cells)
    pairs = _admissible_pairs(data, lineality)
    covered_plus = {i for i, _ in pairs}
    covered_minus = {j for _, j in pairs}
    zero_ok = all(cell_in(cell_of(data.e[k]), lineality) for k in data.j_zero)
    result = covered_plus == set(data.j_plus) and covered_minus == set(data.j_minus) and zero_ok
    logger.debug("scale criterion lineality=%s pairs=%s -> %s", lineality, pairs, result)
    return result


def _pool_words(data: ScaleCaseData, pairs: Sequence[tuple[int, int]], p: int) -> list[PowerWord]:
    k = data.instance.k
    words = []
    for i, j in pairs:
        first, second = (i + 1, p * data.roots[j]), (j + 1, p * data.roots[i])
        words.append(PowerWord((first, second), k))
        words.append(PowerWord((second, first), k))
    i, j = pairs[0]
    first, second = (i + 1, p * data.roots[j]), (j + 1, p * data.roots[i])
    for m in data.j_zero:
        letter = (m + 1, 1)
        words.append(PowerWord((letter,), k))
        words.append(PowerWord((first, letter, second), k))
        words.append(PowerWord((second, letter, first), k))
    return words


def scale_certificate(data: ScaleCaseData, caps: Caps | None = None) -> PowerWord:
    """
    Full-image identity word for a positive-scale instance meeting the criterion.

    Each admissible pair (i, j) contributes the translations of
    (i^(p n_j))(j^(p n_i)) and (j^(p n_i))(i^(p n_j)), and each k in J0
    contributes k alone and k inserted between such a pair. For p = 1, 2, 4, ...
    the accumulated integer translations are tested for a strictly positive
    zero combination.

    Raises:
        InputError: If the criterion does not hold
        ResourceError: If the doubling cap runs out first
    """
    caps = caps or Caps()
    if not scale_criterion(data):
        raise InputError("scale certificate requested for an instance that is not a group")
    gens = data.instance.generators
    pairs = _admissible_pairs(data, cone_lineality(data.cells))
    pool: dict[PowerWord, tuple[int, int]] = {}
    for s in range(caps.doublings + 1):
        for word in _pool_words(data, pairs, 2**s):
            if word not in pool:
                element = evaluate_word(word, gens)
                if not element.A.is_identity:
                    raise CertificateError(f"pool word {word} has matrix part {element.A.rows}")
                pool[word] = element.a
        words = list(pool)
        combo = strictly_positive_zero_combo([pool[w] for w in words])
        if combo is None:
            continue
        certificate = PowerWord.empty(data.instance.k)
        for n, word in zip(combo, words):
            certificate = certificate + word * n
        if not verify_identity_certificate(certificate, gens):
            raise CertificateError(f"scale certificate {certificate} does not evaluate to the identity")
        logger.info("scale certificate found at p=%d with %d pool words", 2**s, len(words))
        return certificate
    raise ResourceError(f"no scale certificate within {caps.doublings} doublings")
