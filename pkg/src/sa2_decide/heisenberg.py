"""The shear case: embedding into the rational Heisenberg group and its Group Problem."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from sympy.core.intfunc import igcdex

from .algebra import SL2, ElementKind, Instance, classify, fixed_vector
from .errors import CertificateError, InputError
from .exactmath import Rat, strictly_positive_zero_combo
from .models import Caps
from .sl2group import GroupnessResult, Verdict
from .witness import PowerWord

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class H3Element:
    """Upper unitriangular matrix [[1, a, b], [0, 1, c], [0, 0, 1]] over Q."""

    a: Rat
    b: Rat
    c: Rat

    def __post_init__(self) -> None:
        for name in ("a", "b", "c"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))

    @classmethod
    def identity(cls) -> H3Element:
        return cls(0, 0, 0)

    @property
    def is_identity(self) -> bool:
        return self.a == 0 and self.b == 0 and self.c == 0

    @property
    def is_central(self) -> bool:
        return self.a == 0 and self.c == 0

    def __mul__(self, other: H3Element) -> H3Element:
        return h3_mul(self, other)

    def inverse(self) -> H3Element:
        return H3Element(-self.a, self.a * self.c - self.b, -self.c)

    def __pow__(self, n: int) -> H3Element:
        if n < 0:
            return self.inverse() ** (-n)
        return H3Element(n * self.a, n * self.b + Fraction(n * (n - 1), 2) * self.a * self.c, n * self.c)


def h3_mul(x: H3Element, y: H3Element) -> H3Element:
    """(a, b, c)(a', b', c') = (a + a', b + b' + a c', c + c')."""
    return H3Element(x.a + y.a, x.b + y.b + x.a * y.c, x.c + y.c)


def h3_evaluate(word: PowerWord, elements: Sequence[H3Element]) -> H3Element:
    """Evaluate a power word over Heisenberg generators."""
    if word.is_empty:
        raise InputError("cannot evaluate the empty word")
    result = H3Element.identity()
    for index, exponent in word.factors:
        result = result * elements[index - 1] ** exponent
    return result


def _completing_column(v: tuple[int, int]) -> tuple[int, int]:
    """Integer (s, t) with v1 t - v2 s = 1, s reduced into [0, |v1|) when v1 != 0."""
    v1, v2 = v
    x, y, g = igcdex(v1, v2)
    if g != 1:
        raise InputError(f"fixed vector {v} is not primitive")
    s, t = -int(y), int(x)
    if v1:
        shift = (s % abs(v1) - s) // v1
        s, t = s + shift * v1, t + shift * v2
    return s, t


def embed_shear_case(inst: Instance, generator: SL2) -> list[H3Element]:
    """
    Map each (A_i, a_i) to H3 via the basis [v | u] with v the shear's fixed vector.

    P = [v | u] has determinant 1, so P^-1 A_i P = [[1, l_i], [0, 1]] with l_i
    an integer; the image is (l_i, first, second coordinate of P^-1 a_i).

    Raises:
        InputError: If the generator is not a shear or some A_i is not upper
            unitriangular in the shear basis
    """
    if classify(generator).kind is not ElementKind.SHEAR:
        raise InputError(f"embedding needs a shear generator, got {classify(generator)}")
    v = fixed_vector(generator)
    s, t = _completing_column(v)
    basis = SL2(v[0], s, v[1], t)
    basis_inverse = basis.inverse()
    images = []
    for element in inst.generators:
        conjugated = basis_inverse @ element.A @ basis
        if conjugated.a != 1 or conjugated.c != 0 or conjugated.d != 1:
            raise InputError(f"matrix {element.A.rows} does not fix the shear line {v}")
        b, c = basis_inverse.apply(element.a)
        images.append(H3Element(conjugated.b, b, c))
    logger.debug("shear basis %s, images %s", basis.rows, images)
    return images


def _omega(x: H3Element, y: H3Element) -> Rat:
    """Commutator form; x and y commute iff it vanishes."""
    return x.a * y.c - y.a * x.c


def _ordered_word(order: Sequence[int], n: Sequence[int], scale: int, k: int) -> PowerWord:
    return PowerWord(tuple((i + 1, scale * n[i]) for i in order), k)


def _quadratic_term(order: Sequence[int], n: Sequence[int], gens: Sequence[H3Element]) -> Rat:
    total = Fraction(0)
    for p, i in enumerate(order):
        for j in order[p + 1:]:
            total += n[i] * n[j] * _omega(gens[i], gens[j])
    return total / 2


def h3_group_problem(generators: Sequence[H3Element], caps: Caps | None = None) -> GroupnessResult:
    """
    Decide whether finitely many Heisenberg elements generate a group.

    The abelianization (a_i, c_i) must admit a strictly positive zero
    combination. A pairwise commuting family is then a group iff the
    logarithms (a_i, b_i - a_i c_i / 2, c_i) admit one too. Otherwise two
    orderings of the same positive relation give central products whose
    b-coordinates have opposite signs after scaling, and a positive
    combination of them is the identity.

    Args:
        generators: Nonempty list of H3 elements
        caps: Recorded on the result only; the procedure needs no search

    Returns:
        GroupnessResult with identity_word set on Yes
    """
    caps = caps or Caps()
    if not generators:
        raise InputError("the Heisenberg group problem needs at least one generator")
    k = len(generators)
    relation = strictly_positive_zero_combo([(g.a, g.c) for g in generators])
    if relation is None:
        return GroupnessResult(Verdict.NO, reason="abelianization admits no positive zero combination")

    commutative = all(_omega(x, y) == 0 for i, x in enumerate(generators) for y in generators[i + 1:])
    if commutative:
        logs = [(g.a, g.b - g.a * g.c / 2, g.c) for g in generators]
        combo = strictly_positive_zero_combo(logs)
        if combo is None:
            return GroupnessResult(Verdict.NO, reason="commuting logarithms admit no positive zero combination")
        word = PowerWord(tuple(enumerate(combo, start=1)), k)
    else:
        word = _commutator_certificate(generators, relation)

    if not h3_evaluate(word, generators).is_identity:
        raise CertificateError(f"Heisenberg certificate {word} does not evaluate to the identity")
    return GroupnessResult(Verdict.YES, identity_word=word)


def _commutator_certificate(generators: Sequence[H3Element], relation: Sequence[int]) -> PowerWord:
    k = len(generators)
    order = list(range(k))
    quadratic = _quadratic_term(order, relation, generators)
    if quadratic == 0:
        i, j = next((i, j) for i in range(k) for j in range(i + 1, k) if _omega(generators[i], generators[j]))
        rest = [m for m in range(k) if m not in (i, j)]
        order = [i, j, *rest]
        quadratic = _quadratic_term(order, relation, generators)
        if quadratic == 0:
            order = [j, i, *rest]
            quadratic = _quadratic_term(order, relation, generators)
    reverse = order[::-1]

    linear = h3_evaluate(_ordered_word(order, relation, 1, k), generators).b - quadratic
    # b(t) = t * linear +- t**2 * quadratic for the two orderings
    scale = int(abs(linear) / abs(quadratic)) + 1
    forward = _ordered_word(order, relation, scale, k)
    backward = _ordered_word(reverse, relation, scale, k)
    b_forward = h3_evaluate(forward, generators).b
    b_backward = h3_evaluate(backward, generators).b
    combo = strictly_positive_zero_combo([(b_forward,), (b_backward,)])
    if combo is None:
        raise CertificateError(f"central values {b_forward} and {b_backward} do not have opposite signs")
    logger.debug("Heisenberg certificate from orderings %s and %s at scale %d", order, reverse, scale)
    return forward * combo[0] + backward * combo[1]
