"""Group Problem and Identity Problem deciders for SA(2,Z) with certificate construction."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Sequence

from .algebra import SL2, ElementKind, Instance, SA2Element, Vector2, classify, eigen_basis, geom_sum
from .cells import build_scale_case, scale_certificate, scale_criterion
from .errors import CertificateError, InputError, ResourceError
from .exactmath import exact_sign, strictly_positive_zero_combo
from .heisenberg import embed_shear_case, h3_group_problem
from .models import Caps, DecisionReport
from .sl2group import GroupCase, GroupKind, Verdict, analyze_group
from .witness import (
    PowerWord,
    evaluate_word,
    free_case_certificate,
    full_image_word,
    signed_word,
    verify_identity_certificate,
    verify_identity_word,
)

logger = logging.getLogger(__name__)

_TORSION_ORDERS = (2, 3, 4, 6)


class DecisionTag(str, Enum):
    """Outcome of a decision."""

    IS_GROUP = "is-group"
    NOT_GROUP = "not-group"
    INCONCLUSIVE = "inconclusive"


class CaseLabel(str, Enum):
    """Dispatch branch that produced a decision."""

    MATRIX_NOT_A_GROUP = "matrix-part-not-a-group"
    TRIVIAL = "trivial"
    TORSION = "torsion"
    NON_ABELIAN = "non-abelian"
    TWISTED_INVERSION = "twisted-inversion"
    INVERTING_SCALE = "inverting-scale"
    SHEAR = "shear"
    POSITIVE_SCALE = "positive-scale"


@dataclass(frozen=True)
class Decision:
    """
    Result of a Group or Identity Problem decision.

    A present certificate is a word over the full alphabet that evaluates to
    (I, 0); for the Group Problem it is full-image, for the Identity Problem it
    is full-image over ``subset``.
    """

    tag: DecisionTag
    caps: Caps
    case: CaseLabel | None = None
    certificate: PowerWord | None = None
    reason: str | None = None
    stage: str | None = None
    subset: tuple[int, ...] | None = None
    stats: dict[str, int] | None = field(default=None, compare=False)

    @property
    def is_group(self) -> bool:
        return self.tag is DecisionTag.IS_GROUP

    def to_report(self) -> DecisionReport:
        return DecisionReport(
            tag=self.tag.value,
            case=self.case.value if self.case else None,
            certificate=self.certificate.to_list() if self.certificate else None,
            reason=self.reason,
            stage=self.stage,
            subset=list(self.subset) if self.subset else None,
            word_stats=self.stats,
            caps=self.caps,
        )


def _is_group(caps: Caps, case: CaseLabel, certificate: PowerWord | None, reason: str | None = None) -> Decision:
    stats = certificate.stats() if certificate is not None else None
    return Decision(DecisionTag.IS_GROUP, caps, case, certificate, reason, stats=stats)


def _not_group(caps: Caps, case: CaseLabel, reason: str) -> Decision:
    return Decision(DecisionTag.NOT_GROUP, caps, case, reason=reason)


def _inconclusive(caps: Caps, stage: str, reason: str | None = None) -> Decision:
    return Decision(DecisionTag.INCONCLUSIVE, caps, stage=stage, reason=reason)


def case_trivial(vectors: Sequence[Vector2] | Instance, caps: Caps | None = None) -> Decision:
    """
    Decide a translation-only instance: a group iff sum n_i a_i = 0 for positive n.

    Args:
        vectors: Translations, or an instance whose matrix parts are all I

    Raises:
        InputError: If an instance with a non-identity matrix part is given
    """
    caps = caps or Caps()
    if isinstance(vectors, Instance):
        if not all(m.is_identity for m in vectors.matrices):
            raise InputError("translation-only case needs every matrix part to be I")
        vectors = vectors.translations
    combo = strictly_positive_zero_combo(vectors)
    if combo is None:
        return _not_group(caps, CaseLabel.TRIVIAL, "translations admit no strictly positive zero combination")
    certificate = PowerWord(tuple(enumerate(combo, start=1)), len(vectors))
    if not verify_identity_certificate(certificate, [SA2Element(SL2.identity(), v) for v in vectors]):
        raise CertificateError(f"translation certificate {certificate} does not evaluate to the identity")
    return _is_group(caps, CaseLabel.TRIVIAL, certificate)


def case_torsion_certificate(word: PowerWord, order: int, gens: Sequence[SA2Element]) -> PowerWord:
    """
    Repeat a full-image word for (T, t) with T**order = I; the result is (I, 0).

    Raises:
        InputError: If the order is not 2, 3, 4 or 6, T**order != I or the word
            is not full-image
    """
    if order not in _TORSION_ORDERS:
        raise InputError(f"torsion order must be one of {_TORSION_ORDERS}, got {order}")
    if not word.full_image:
        raise InputError("torsion certificate needs a full-image word")
    element = evaluate_word(word, gens)
    if not element.A.power(order).is_identity:
        raise InputError(f"matrix {element.A.rows} does not have order dividing {order}")
    certificate = word * order
    if not verify_identity_certificate(certificate, gens):
        raise CertificateError(f"torsion certificate {certificate} does not evaluate to the identity")
    return certificate


def _pair_elements(
    word_a: PowerWord, word_b: PowerWord, gens: Sequence[SA2Element], kind: ElementKind
) -> tuple[SA2Element, SA2Element]:
    first, second = evaluate_word(word_a, gens), evaluate_word(word_b, gens)
    if classify(first.A).kind is not kind:
        raise InputError(f"expected a {kind.value} matrix, got {classify(first.A)}")
    if not (first.A @ second.A).is_identity:
        raise InputError("the second word must evaluate to the inverse matrix")
    if not (word_a + word_b).full_image:
        raise InputError("the two words must be jointly full-image")
    return first, second


def case_twisted_inversion_certificate(
    word_a: PowerWord, word_b: PowerWord, gens: Sequence[SA2Element]
) -> PowerWord:
    """
    Identity word (A, a)^2 (A^-1, b)^3 (A, a)^2 (A^-1, b) for a twisted inversion A.

    Relies on (A + I)^2 = 0.

    Raises:
        InputError: If A is not a twisted inversion or the words do not pair up
    """
    _pair_elements(word_a, word_b, gens, ElementKind.TWISTED_INVERSION)
    certificate = word_a * 2 + word_b * 3 + word_a * 2 + word_b
    if not verify_identity_certificate(certificate, gens):
        raise CertificateError(f"twisted-inversion certificate {certificate} does not evaluate to the identity")
    return certificate


def case_inverting_scale_certificate(
    word_a: PowerWord, word_b: PowerWord, gens: Sequence[SA2Element], caps: Caps | None = None
) -> PowerWord:
    """
    Identity word for (A, a), (A^-1, b) with A an inverting scale.

    With x = a + A b written as alpha v + beta w in the eigenbasis, x = 0 gives
    the word (A, a)(A^-1, b) directly. Otherwise v_m = (A, a)^m (A^-1, b)^m and
    w_m = (A^-1, b)^m (A, a)^m have translations sum_{i<m} A^i x and
    sum_{i<m} A^-i A^-1 x; since lam < -1 consecutive m alternate sides of
    the lines, so for large enough m the collected translations surround the
    origin (or cancel along a line when alpha or beta vanishes).

    Raises:
        InputError: If A is not an inverting scale or the words do not pair up
        ResourceError: If the doubling cap runs out first
    """
    caps = caps or Caps()
    first, second = _pair_elements(word_a, word_b, gens, ElementKind.INVERTING_SCALE)
    matrix = first.A
    x = (first * second).a
    if x == (0, 0):
        return word_a + word_b

    _, _, basis_inverse = eigen_basis(matrix)
    alpha, beta = basis_inverse.apply(x)
    logger.debug("inverting scale case alpha sign %d beta sign %d", exact_sign(alpha), exact_sign(beta))
    shifted = matrix.inverse().apply(x)
    inverse = matrix.inverse()
    pool: dict[PowerWord, Vector2] = {}
    for s in range(caps.doublings + 1):
        for m in sorted({2**s, 2**s + 1}):
            pool.setdefault(word_a * m + word_b * m, geom_sum(matrix, m).apply(x))
            pool.setdefault(word_b * m + word_a * m, geom_sum(inverse, m).apply(shifted))
        words = list(pool)
        combo = strictly_positive_zero_combo([pool[w] for w in words])
        if combo is None:
            continue
        certificate = PowerWord.empty(word_a.k)
        for n, word in zip(combo, words):
            certificate = certificate + word * n
        if not verify_identity_certificate(certificate, gens):
            raise CertificateError(f"inverting-scale certificate {certificate} does not evaluate to the identity")
        return certificate
    raise ResourceError(f"no inverting-scale certificate within {caps.doublings} doublings")


def _cyclic_pair(inst: Instance, group: GroupCase) -> tuple[PowerWord, PowerWord]:
    """Full-image words for (G, a) and (G^-1, b) with G the cyclic generator."""
    witnesses = group.groupness.witnesses
    x = group.generator_exponents
    forward = full_image_word(signed_word(x, witnesses), witnesses)
    backward = full_image_word(signed_word([-v for v in x], witnesses), witnesses)
    return forward, backward


def _torsion_decision(inst: Instance, group: GroupCase, caps: Caps) -> Decision:
    witnesses = group.groupness.witnesses
    if group.torsion_vector is None:
        index = next(i for i, m in enumerate(inst.matrices, start=1) if not m.is_identity)
        target = PowerWord.letter(index, inst.k)
    else:
        target = signed_word(group.torsion_vector, witnesses)
    word = full_image_word(target, witnesses)
    order = classify(evaluate_word(word, inst.generators).A).order
    return _is_group(caps, CaseLabel.TORSION, case_torsion_certificate(word, order, inst.generators))


def _cyclic_decision(inst: Instance, group: GroupCase, caps: Caps) -> Decision:
    kind = group.element_class.kind
    gens = inst.generators
    if kind is ElementKind.TWISTED_INVERSION:
        certificate = case_twisted_inversion_certificate(*_cyclic_pair(inst, group), gens)
        return _is_group(caps, CaseLabel.TWISTED_INVERSION, certificate)

    if kind is ElementKind.INVERTING_SCALE:
        try:
            certificate = case_inverting_scale_certificate(*_cyclic_pair(inst, group), gens, caps)
        except ResourceError as exc:
            return _inconclusive(caps, "inverting-scale certificate", str(exc))
        return _is_group(caps, CaseLabel.INVERTING_SCALE, certificate)

    if kind is ElementKind.SHEAR:
        result = h3_group_problem(embed_shear_case(inst, group.generator), caps)
        if result.verdict is Verdict.NO:
            return _not_group(caps, CaseLabel.SHEAR, result.reason)
        if result.verdict is Verdict.INCONCLUSIVE:
            return _inconclusive(caps, "heisenberg")
        if not verify_identity_certificate(result.identity_word, gens):
            raise CertificateError(f"shear certificate {result.identity_word} does not evaluate to the identity")
        return _is_group(caps, CaseLabel.SHEAR, result.identity_word)

    data = build_scale_case(inst, group.generator, group.exponents)
    if not scale_criterion(data):
        return _not_group(caps, CaseLabel.POSITIVE_SCALE, "some cell of d_ij or e_k lies outside the lineality space")
    try:
        certificate = scale_certificate(data, caps)
    except ResourceError as exc:
        return _inconclusive(caps, "positive-scale certificate", str(exc))
    return _is_group(caps, CaseLabel.POSITIVE_SCALE, certificate)


def decide_group_problem(inst: Instance, caps: Caps | None = None) -> Decision:
    """
    Decide whether the semigroup generated by the instance is a group.

    First the matrix parts must generate a group. Then translation-only,
    torsion and non-abelian groups are groups with certificates from their
    own constructions, and cyclic matrix groups dispatch on the class of
    their generator.

    Args:
        inst: Generators in SA(2,Z)
        caps: Search caps (defaults when omitted)

    Returns:
        Decision; Inconclusive carries the stage that capped out
    """
    caps = caps or Caps()
    decision = _dispatch(inst, caps)
    certificate = decision.certificate
    if certificate is not None and not verify_identity_certificate(certificate, inst.generators):
        raise CertificateError(f"{decision.case.value} certificate {certificate} does not evaluate to the identity")
    return decision


def _dispatch(inst: Instance, caps: Caps) -> Decision:
    group = analyze_group(inst.matrices, caps)
    logger.info("matrix-part group case: %s", group)

    if group.kind is GroupKind.NOT_A_GROUP:
        return _not_group(caps, CaseLabel.MATRIX_NOT_A_GROUP, group.groupness.reason)
    if group.kind is GroupKind.INCONCLUSIVE:
        return _inconclusive(caps, "matrix-groupness", "matrix-part groupness undecided within caps")
    if group.kind is GroupKind.TRIVIAL:
        return case_trivial(inst, caps)
    if group.kind is GroupKind.CONTAINS_TORSION:
        return _torsion_decision(inst, group, caps)
    if group.kind is GroupKind.NON_ABELIAN_INFINITE:
        certificate = free_case_certificate(inst, caps, group.groupness.witnesses)
        reason = None if certificate else "non-abelian matrix group; certificate search capped"
        return _is_group(caps, CaseLabel.NON_ABELIAN, certificate, reason)
    return _cyclic_decision(inst, group, caps)


def decide_identity_problem(inst: Instance, caps: Caps | None = None) -> Decision:
    """
    Decide whether the identity lies in the semigroup generated by the instance.

    The identity is reachable iff some nonempty subset generates a group.
    Subsets are tried by ascending size, then lexicographically; the first
    group wins and its certificate is renamed into the full alphabet.

    Raises:
        ResourceError: If K exceeds the subset cap
    """
    caps = caps or Caps()
    k = inst.k
    if k > caps.subset_cap:
        raise ResourceError(f"{k} generators exceed the subset cap of {caps.subset_cap}")
    undecided: list[tuple[int, ...]] = []
    for size in range(1, k + 1):
        for subset in combinations(range(k), size):
            decision = decide_group_problem(inst.subset(subset), caps)
            labels = tuple(i + 1 for i in subset)
            if decision.tag is DecisionTag.IS_GROUP:
                certificate = decision.certificate.remap(labels, k) if decision.certificate else None
                if certificate is not None and not verify_identity_word(certificate, inst.generators):
                    raise CertificateError(f"identity certificate {certificate} does not evaluate to the identity")
                logger.info("identity reached through subset %s", labels)
                return Decision(
                    DecisionTag.IS_GROUP,
                    caps,
                    decision.case,
                    certificate,
                    decision.reason,
                    subset=labels,
                    stats=certificate.stats() if certificate else None,
                )
            if decision.tag is DecisionTag.INCONCLUSIVE:
                undecided.append(labels)
    if undecided:
        return _inconclusive(caps, f"subset {undecided[0]}", f"{len(undecided)} subsets undecided")
    return Decision(DecisionTag.NOT_GROUP, caps, reason="no nonempty subset generates a group")
