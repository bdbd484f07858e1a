"""Structure of the matrix-part semigroup: finite closure, groupness, abelian exponent lattices."""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import NamedTuple, Sequence

from .algebra import SL2, ElementClass, classify, primitive_root
from .errors import CertificateError, InputError
from .exactmath import IntVector, Lattice, hnf, integer_kernel, lattice_saturation, strictly_positive_zero_combo
from .models import Caps
from .witness import PowerWord, evaluate_matrix_word

logger = logging.getLogger(__name__)

# conjugators under which a sign pattern is tested; each is its own inverse
_SIGN_CONJUGATIONS = (
    ("identity", lambda a, b, c, d: (a, b, c, d)),
    ("diag(1,-1)", lambda a, b, c, d: (a, -b, -c, d)),
    ("swap", lambda a, b, c, d: (d, c, b, a)),
)


def group_closure(matrices: Sequence[SL2], cap: int) -> frozenset[SL2] | None:
    """
    Close a set of matrices under products and inverses.

    Args:
        matrices: Nonempty list of SL(2,Z) matrices
        cap: Largest closure size treated as finite

    Returns:
        The closure, or None as soon as it exceeds cap
    """
    if not matrices:
        raise InputError("closure needs at least one matrix")
    seeds = {m for m in matrices} | {m.inverse() for m in matrices}
    elements = set(seeds)
    queue = deque(elements)
    while queue:
        current = queue.popleft()
        for seed in seeds:
            product = current @ seed
            if product not in elements:
                elements.add(product)
                if len(elements) > cap:
                    return None
                queue.append(product)
    if len(elements) > cap:
        return None
    return frozenset(elements)


@dataclass(frozen=True)
class ExponentLattice:
    """Relation lattice of the generators, its saturation and the torsion flag."""

    lattice: Lattice
    saturation: Lattice
    kernel_dim: int
    torsion: bool


class AbelianStructure(NamedTuple):
    exponent_lattice: ExponentLattice
    generator: SL2 | None
    exponents: IntVector | None
    generator_exponents: IntVector | None


class _Coordinates(NamedTuple):
    values: list[tuple[int, ...]]
    moduli: tuple[int | None, ...]
    root: SL2 | None


def _element_order(matrix: SL2) -> int:
    order = classify(matrix).order
    if order is None:
        raise InputError(f"matrix {matrix.rows} has infinite order")
    return order


def _cyclic_coordinates(matrices: Sequence[SL2]) -> _Coordinates:
    """Coordinates of commuting matrices in a cyclic model of the group they generate."""
    infinite = [m for m in matrices if not classify(m).is_finite]
    if not infinite:
        closure = group_closure(matrices, 12)
        if closure is None:
            raise InputError("finite-order commuting matrices generated an infinite group")
        base = max(closure, key=_element_order)
        order = _element_order(base)
        powers = {base.power(j): j for j in range(order)}
        values = []
        for m in matrices:
            if m not in powers:
                raise InputError(f"matrix {m.rows} is not a power of {base.rows}")
            values.append((powers[m],))
        return _Coordinates(values, (order,), base)

    _, root, _ = primitive_root(infinite[0])
    root_inverse = root.inverse()
    values = []
    for m in matrices:
        if m.is_identity:
            values.append((0, 0))
            continue
        if (-m).is_identity:
            values.append((0, 1))
            continue
        if classify(m).is_finite:
            raise InputError(f"torsion matrix {m.rows} commutes with an infinite-order matrix")
        eps, own_root, power = primitive_root(m)
        if own_root == root:
            exponent = power
        elif own_root == root_inverse:
            exponent = -power
        else:
            raise InputError(f"matrix {m.rows} is not a power of {root.rows} up to sign")
        values.append((exponent, 0 if eps == 1 else 1))
    return _Coordinates(values, (None, 2), root)


def _relation_lattice(coords: _Coordinates) -> Lattice:
    """Lattice of n with sum n_i coords_i = 0, modular coordinates reduced by their moduli."""
    k = len(coords.values)
    dim = len(coords.moduli)
    vectors = [tuple(v) for v in coords.values]
    for position, modulus in enumerate(coords.moduli):
        if modulus is not None:
            vectors.append(tuple(modulus if j == position else 0 for j in range(dim)))
    relations = integer_kernel(vectors, dim)
    projected = [row[:k] for row in relations]
    return hnf(projected, dim=k)[0]


def abelian_structure(matrices: Sequence[SL2]) -> AbelianStructure:
    """
    Relation lattice and cyclic generator of a commuting family.

    Scales and shears are written as signed powers of one primitive root, with
    -I contributing a parity coordinate; finite families use discrete
    logarithms in their cyclic closure.

    Args:
        matrices: Pairwise commuting SL(2,Z) matrices

    Returns:
        AbelianStructure with the exponent lattice and, when the generated group
        is infinite cyclic, a generator A = prod A_i**x_i together with z and x
        such that A_i = A**z_i

    Raises:
        InputError: If two matrices do not commute
    """
    for i, first in enumerate(matrices):
        for second in matrices[i + 1:]:
            if not first.commutes_with(second):
                raise InputError(f"matrices {first.rows} and {second.rows} do not commute")

    k = len(matrices)
    coords = _cyclic_coordinates(matrices)
    lattice = _relation_lattice(coords)
    saturation = lattice_saturation(lattice)
    torsion = saturation.basis != lattice.basis
    exponent_lattice = ExponentLattice(lattice, saturation, lattice.rank, torsion)

    infinite = coords.moduli[0] is None and any(v[0] for v in coords.values)
    if torsion or not infinite or saturation.rank != k - 1:
        return AbelianStructure(exponent_lattice, None, None, None)

    gcd_lattice, transform = hnf([(v[0],) for v in coords.values], dim=1)
    g = gcd_lattice.basis[0][0]
    x = transform[0]
    generator = SL2.identity()
    for matrix, power in zip(matrices, x):
        generator = generator @ matrix.power(power)
    z = tuple(v[0] // g for v in coords.values)
    for matrix, exponent in zip(matrices, z):
        if generator.power(exponent) != matrix:
            raise CertificateError(f"cyclic generator {generator.rows} does not reproduce {matrix.rows}")
    logger.debug("cyclic generator %s with exponents %s", generator.rows, z)
    return AbelianStructure(exponent_lattice, generator, z, tuple(x))


class Verdict(str, Enum):
    """Outcome of a layered groupness decision."""

    YES = "yes"
    NO = "no"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class GroupnessResult:
    """
    Groupness verdict; Yes carries inverse witnesses or an identity word, No a
    reason, Inconclusive the caps.
    """

    verdict: Verdict
    witnesses: tuple[PowerWord, ...] = ()
    identity_word: PowerWord | None = None
    reason: str | None = None
    caps: Caps | None = None


def _all_commute(matrices: Sequence[SL2]) -> bool:
    return all(first.commutes_with(second) for i, first in enumerate(matrices) for second in matrices[i + 1:])


def _relation_witnesses(k: int, n: Sequence[int]) -> tuple[PowerWord, ...]:
    """Witness for A_i^-1 in a commuting family from a positive relation n."""
    witnesses = []
    for i in range(1, k + 1):
        factors = tuple((j, n[j - 1] - (j == i)) for j in range(1, k + 1) if n[j - 1] - (j == i) > 0)
        witnesses.append(PowerWord(factors, k))
    return tuple(witnesses)


def _sign_certificate(matrices: Sequence[SL2]) -> str | None:
    """Name a conjugation making every generator +-nonnegative with one generator not +-I."""
    if all(m.is_identity or (-m).is_identity for m in matrices):
        return None
    for name, conjugate in _SIGN_CONJUGATIONS:
        if all(_single_signed(conjugate(m.a, m.b, m.c, m.d)) for m in matrices):
            return name
    return None


def _single_signed(entries: tuple[int, ...]) -> bool:
    return all(e >= 0 for e in entries) or all(e <= 0 for e in entries)


def _inverse_witness_search(matrices: Sequence[SL2], caps: Caps) -> tuple[PowerWord, ...] | None:
    """BFS over matrix products for a word representing each generator inverse."""
    k = len(matrices)
    targets = {i: m.inverse() for i, m in enumerate(matrices, start=1)}
    found: dict[int, PowerWord] = {}
    parents: dict[SL2, tuple[SL2 | None, int]] = {}
    frontier = []
    for index, matrix in enumerate(matrices, start=1):
        if matrix not in parents:
            parents[matrix] = (None, index)
            frontier.append(matrix)

    def word_of(matrix: SL2) -> PowerWord:
        letters = []
        current: SL2 | None = matrix
        while current is not None:
            parent, letter = parents[current]
            letters.append(letter)
            current = parent
        return PowerWord.from_letters(letters[::-1], k)

    def record(matrix: SL2) -> None:
        for index, target in targets.items():
            if index not in found and matrix == target:
                found[index] = word_of(matrix)

    for matrix in frontier:
        record(matrix)
    for _ in range(1, caps.depth):
        if len(found) == k:
            break
        next_frontier = []
        for matrix in frontier:
            for index, generator in enumerate(matrices, start=1):
                product = matrix @ generator
                if product in parents or product.max_entry() > caps.norm:
                    continue
                parents[product] = (matrix, index)
                if len(parents) > caps.max_states:
                    logger.info("inverse-witness search stopped at %d states", caps.max_states)
                    return None
                record(product)
                next_frontier.append(product)
        frontier = next_frontier
        if not frontier:
            break
    if len(found) < k:
        return None
    return tuple(found[i] for i in range(1, k + 1))


def semigroup_is_group(matrices: Sequence[SL2], caps: Caps | None = None) -> GroupnessResult:
    """
    Decide whether the matrices generate a group as a semigroup.

    Layers: a finite closure is always a group; a commuting family is a group
    iff some strictly positive exponent vector multiplies to I; otherwise a
    sign certificate answers No and inverse-witness BFS answers Yes.

    Args:
        matrices: Nonempty list of SL(2,Z) matrices
        caps: Search caps (defaults when omitted)

    Returns:
        GroupnessResult; Inconclusive is a regular outcome
    """
    caps = caps or Caps()
    if not matrices:
        raise InputError("groupness needs at least one matrix")
    k = len(matrices)

    closure = group_closure(matrices, caps.closure)
    if closure is not None:
        witnesses = tuple(
            PowerWord.letter(i, k, 1 if m.is_identity else _element_order(m) - 1)
            for i, m in enumerate(matrices, start=1)
        )
        logger.debug("finite closure of size %d", len(closure))
        return GroupnessResult(Verdict.YES, witnesses=witnesses)

    if _all_commute(matrices):
        coords = _cyclic_coordinates(matrices)
        combo = strictly_positive_zero_combo([(v[0],) for v in coords.values])
        if combo is None:
            return GroupnessResult(Verdict.NO, reason="commuting generators admit no positive exponent relation")
        if sum(n * v[1] for n, v in zip(combo, coords.values)) % 2:
            combo = tuple(2 * n for n in combo)
        relation = PowerWord(tuple(enumerate(combo, start=1)), k)
        if not evaluate_matrix_word(relation, matrices).is_identity:
            raise CertificateError(f"exponent relation {combo} does not multiply to I")
        return GroupnessResult(Verdict.YES, witnesses=_relation_witnesses(k, combo))

    conjugation = _sign_certificate(matrices)
    if conjugation is not None:
        reason = f"after conjugation by {conjugation} every generator is +-nonnegative and one is not +-I"
        return GroupnessResult(Verdict.NO, reason=reason)

    witnesses = _inverse_witness_search(matrices, caps)
    if witnesses is not None:
        return GroupnessResult(Verdict.YES, witnesses=witnesses)
    logger.info("groupness undecided for %d non-commuting generators", k)
    return GroupnessResult(Verdict.INCONCLUSIVE, caps=caps)


class GroupKind(str, Enum):
    """Structure cases of the matrix-part group."""

    NOT_A_GROUP = "not-a-group"
    TRIVIAL = "trivial"
    CONTAINS_TORSION = "contains-torsion"
    CYCLIC = "cyclic"
    NON_ABELIAN_INFINITE = "non-abelian-infinite"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class GroupCase:
    """Result of analyze_group; the cyclic fields are set for CYCLIC only."""

    kind: GroupKind
    groupness: GroupnessResult
    element_class: ElementClass | None = None
    generator: SL2 | None = None
    exponents: IntVector | None = None
    generator_exponents: IntVector | None = None
    lattice: ExponentLattice | None = None
    torsion_vector: IntVector | None = None

    def __str__(self) -> str:
        if self.kind is GroupKind.CYCLIC:
            return f"cyclic-by({self.element_class})"
        return self.kind.value


def _torsion_vector(lattice: ExponentLattice) -> IntVector | None:
    for vector in lattice.saturation.basis:
        if vector not in lattice.lattice:
            return vector
    return None


def analyze_group(matrices: Sequence[SL2], caps: Caps | None = None) -> GroupCase:
    """Case split of the matrix-part group; memoized on the matrices and caps."""
    return _analyze_group(tuple(matrices), caps or Caps())


@lru_cache(maxsize=1024)
def _analyze_group(matrices: tuple[SL2, ...], caps: Caps) -> GroupCase:
    groupness = semigroup_is_group(matrices, caps)
    if groupness.verdict is Verdict.NO:
        return GroupCase(GroupKind.NOT_A_GROUP, groupness)
    if groupness.verdict is Verdict.INCONCLUSIVE:
        return GroupCase(GroupKind.INCONCLUSIVE, groupness)
    if all(m.is_identity for m in matrices):
        return GroupCase(GroupKind.TRIVIAL, groupness)
    if group_closure(matrices, caps.closure) is not None:
        return GroupCase(GroupKind.CONTAINS_TORSION, groupness)
    if not _all_commute(matrices):
        return GroupCase(GroupKind.NON_ABELIAN_INFINITE, groupness)

    structure = abelian_structure(matrices)
    lattice = structure.exponent_lattice
    if lattice.torsion:
        return GroupCase(
            GroupKind.CONTAINS_TORSION, groupness, lattice=lattice, torsion_vector=_torsion_vector(lattice)
        )
    return GroupCase(
        GroupKind.CYCLIC,
        groupness,
        element_class=classify(structure.generator),
        generator=structure.generator,
        exponents=structure.exponents,
        generator_exponents=structure.generator_exponents,
        lattice=lattice,
    )
