"""Compressed witness words, their evaluation and verification, and constructive limit steps."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Sequence

from .algebra import (
    ElementKind,
    Instance,
    Line,
    LineRole,
    SA2Element,
    SL2,
    Vector2,
    classify,
    cross,
    dot,
    eigen_basis,
    fixed_vector,
    geom_sum,
    invariant_lines,
    sa_pow,
)
from .errors import CertificateError, InputError, ResourceError
from .exactmath import Scalar, exact_sign, strictly_positive_zero_combo

if TYPE_CHECKING:
    from .models import Caps

logger = logging.getLogger(__name__)

# search ceiling for odd exponents m = 2**j - 1 in the limit steps
_MAX_LIMIT_DOUBLINGS = 40


@dataclass(frozen=True)
class PowerWord:
    """
    Word over generators 1..k stored as (index, exponent) factors.

    Adjacent factors with the same index are merged, so the factor list is
    canonical. The empty word is allowed as a building block but cannot be
    evaluated.
    """

    factors: tuple[tuple[int, int], ...]
    k: int

    def __post_init__(self) -> None:
        if self.k < 1:
            raise InputError(f"alphabet size must be positive, got {self.k}")
        merged: list[tuple[int, int]] = []
        for index, exponent in self.factors:
            index, exponent = int(index), int(exponent)
            if not 1 <= index <= self.k:
                raise InputError(f"generator index {index} outside 1..{self.k}")
            if exponent < 1:
                raise InputError(f"exponents must be positive, got {exponent}")
            if merged and merged[-1][0] == index:
                merged[-1] = (index, merged[-1][1] + exponent)
            else:
                merged.append((index, exponent))
        object.__setattr__(self, "factors", tuple(merged))

    @classmethod
    def empty(cls, k: int) -> PowerWord:
        return cls((), k)

    @classmethod
    def letter(cls, index: int, k: int, exponent: int = 1) -> PowerWord:
        return cls(((index, exponent),), k)

    @classmethod
    def from_letters(cls, letters: Sequence[int], k: int) -> PowerWord:
        """Compress a plain sequence of 1-based letters."""
        return cls(tuple((i, 1) for i in letters), k)

    @classmethod
    def from_list(cls, data: Sequence[Sequence[int]], k: int) -> PowerWord:
        """Parse the [[index, exponent], ...] wire form."""
        try:
            return cls(tuple((int(i), int(e)) for i, e in data), k)
        except (TypeError, ValueError) as exc:
            raise InputError(f"malformed certificate: {exc}") from exc

    def to_list(self) -> list[list[int]]:
        return [[i, e] for i, e in self.factors]

    @property
    def is_empty(self) -> bool:
        return not self.factors

    @property
    def full_image(self) -> bool:
        """Every generator index 1..k occurs."""
        return {i for i, _ in self.factors} == set(range(1, self.k + 1))

    @property
    def letters(self) -> frozenset[int]:
        return frozenset(i for i, _ in self.factors)

    def __add__(self, other: PowerWord) -> PowerWord:
        if not isinstance(other, PowerWord):
            return NotImplemented
        if other.k != self.k:
            raise InputError(f"cannot concatenate words over {self.k} and {other.k} letters")
        return PowerWord(self.factors + other.factors, self.k)

    def __mul__(self, times: int) -> PowerWord:
        if times < 0:
            raise InputError("a word can only be repeated a nonnegative number of times")
        if times == 0 or self.is_empty:
            return PowerWord.empty(self.k)
        if len(self.factors) == 1:
            index, exponent = self.factors[0]
            return PowerWord(((index, exponent * times),), self.k)
        return PowerWord(self.factors * times, self.k)

    __rmul__ = __mul__

    def __len__(self) -> int:
        return len(self.factors)

    def total_exponent(self) -> int:
        return sum(e for _, e in self.factors)

    def remap(self, mapping: Sequence[int], k: int) -> PowerWord:
        """Rename letter i to mapping[i - 1] in an alphabet of size k."""
        return PowerWord(tuple((mapping[i - 1], e) for i, e in self.factors), k)

    def stats(self) -> dict[str, int]:
        """Size figures reported next to certificates."""
        return {
            "factors": len(self.factors),
            "max_exponent_bits": max((e.bit_length() for _, e in self.factors), default=0),
        }

    def __str__(self) -> str:
        return "".join(f"({i}^{e})" for i, e in self.factors) or "(empty)"


def evaluate_word(word: PowerWord, gens: Sequence[SA2Element]) -> SA2Element:
    """
    Multiply out a word left to right with closed-form powers.

    Raises:
        InputError: If the word is empty or refers to a missing generator
    """
    if word.is_empty:
        raise InputError("cannot evaluate the empty word")
    result = None
    for index, exponent in word.factors:
        if index > len(gens):
            raise InputError(f"generator index {index} outside 1..{len(gens)}")
        factor = sa_pow(gens[index - 1], exponent)
        result = factor if result is None else result * factor
    return result


def evaluate_matrix_word(word: PowerWord, matrices: Sequence[SL2]) -> SL2:
    """Matrix part of a word, skipping translation bookkeeping."""
    if word.is_empty:
        raise InputError("cannot evaluate the empty word")
    result = SL2.identity()
    for index, exponent in word.factors:
        if index > len(matrices):
            raise InputError(f"generator index {index} outside 1..{len(matrices)}")
        result = result @ matrices[index - 1].power(exponent)
    return result


def verify_identity_word(word: PowerWord, gens: Sequence[SA2Element]) -> bool:
    """True iff the nonempty word evaluates to (I, 0)."""
    try:
        return evaluate_word(word, gens).is_identity
    except InputError:
        return False


def verify_identity_certificate(word: PowerWord, gens: Sequence[SA2Element]) -> bool:
    """True iff the word is full-image over gens and evaluates to (I, 0)."""
    if word.k != len(gens) or not word.full_image:
        return False
    return verify_identity_word(word, gens)


def full_image_word(target: PowerWord, witnesses: Sequence[PowerWord]) -> PowerWord:
    """
    Append a_i w_i for every generator, where w_i represents A_i^-1.

    The result has the same matrix part as the target and is full-image.
    """
    result = target
    for index, witness in enumerate(witnesses, start=1):
        result = result + PowerWord.letter(index, target.k) + witness
    return result


def inverse_word(word: PowerWord, witnesses: Sequence[PowerWord]) -> PowerWord:
    """Word whose matrix part is the inverse of the given word's matrix part."""
    result = PowerWord.empty(word.k)
    for index, exponent in reversed(word.factors):
        result = result + witnesses[index - 1] * exponent
    return result


def signed_word(exponents: Sequence[int], witnesses: Sequence[PowerWord]) -> PowerWord:
    """Word for prod A_i**x_i with signed x, negative powers via inverse witnesses."""
    k = len(exponents)
    result = PowerWord.empty(k)
    for index, x in enumerate(exponents, start=1):
        if x > 0:
            result = result + PowerWord.letter(index, k, x)
        elif x < 0:
            result = result + witnesses[index - 1] * (-x)
    return result


def pair_translation(first: SA2Element, second: SA2Element) -> Vector2:
    """Translation x of (A, a)(B, b) = (I, x) for an inverse matrix pair."""
    product = first * second
    if not product.A.is_identity:
        raise InputError("limit steps need a pair with AB = I")
    return product.a


def _abs(value: Scalar) -> Scalar:
    return -value if exact_sign(value) < 0 else value


def _cosine_exceeds(vy: Scalar, vv: Scalar, yy: Scalar, threshold: Fraction) -> bool:
    """cos(v, y) = vy / sqrt(vv * yy) > threshold, decided without square roots."""
    if yy == 0:
        return False
    if threshold < 0:
        return exact_sign(vy) >= 0 or exact_sign(threshold * threshold * vv * yy - vy * vy) > 0
    return exact_sign(vy) > 0 and exact_sign(vy * vy - threshold * threshold * vv * yy) > 0


def _odd_exponents():
    for j in range(1, _MAX_LIMIT_DOUBLINGS + 1):
        yield 2**j - 1


def scalelim_step(
    first: SA2Element, second: SA2Element, toward: LineRole, epsilon: Fraction
) -> tuple[PowerWord, Vector2]:
    """
    Drive the translation of (A, a) w (B, b) toward an invariant line of a scale A.

    Searches odd m. For the stretching line the inner word is
    (A, a)^(m-1) (B, b)^(m-1), giving y = (I + A + ... + A^(m-1)) x; for the
    compressing line it is (B, b)^m (A, a)^m, giving y = x + (I + ... + A^-(m-1)) x.

    Args:
        first: (A, a) with A a scale
        second: (B, b) with AB = I
        toward: Stretching or compressing line of A
        epsilon: Positive rational bound on 1 - |cos(v, y)|

    Returns:
        Tuple (inner word over letters 1 = first, 2 = second, y) such that
        1 - |cos(v, y)| < epsilon and y lies in the same open cone cut by the
        two lines as x

    Raises:
        InputError: If A is not a scale, AB != I or x lies on a line of A
    """
    matrix = first.A
    if not classify(matrix).is_scale:
        raise InputError(f"scale step needs a scale, got {classify(matrix)}")
    if toward is LineRole.FIXED:
        raise InputError("a scale has no fixed line")
    if epsilon <= 0:
        raise InputError("epsilon must be positive")
    x = pair_translation(first, second)
    _, p, pinv = eigen_basis(matrix)
    x_coords = pinv.apply(x)
    if x_coords[0] == 0 or x_coords[1] == 0:
        raise InputError(f"x = {x} lies on an invariant line of the scale")

    target = 0 if toward is LineRole.STRETCHING else 1
    v = p.column(target)
    threshold = 1 - Fraction(epsilon)
    for m in _odd_exponents():
        if toward is LineRole.STRETCHING:
            factors = ((1, m - 1), (2, m - 1)) if m > 1 else ()
            gx, gy = geom_sum(matrix, m).apply(x)
        else:
            factors = ((2, m), (1, m))
            sx, sy = geom_sum(matrix.inverse(), m).apply(x)
            gx, gy = x[0] + sx, x[1] + sy
        y = (gx, gy)
        y_coords = pinv.apply(y)
        same_cone = all(exact_sign(yc) == exact_sign(xc) for yc, xc in zip(y_coords, x_coords))
        if same_cone and _cosine_exceeds(_abs(dot(v, y)), dot(v, v), dot(y, y), threshold):
            logger.debug("scale step toward %s line accepted m=%d", toward.value, m)
            return PowerWord(factors, 2), y
    raise ResourceError("scale limit step did not converge within the exponent ceiling")


def shearlim_step(
    first: SA2Element,
    second: SA2Element,
    epsilon: Fraction,
    direction: Vector2 | None = None,
) -> tuple[PowerWord, Vector2]:
    """
    Drive the translation of (A, a) w (B, b) toward +v for a shear A fixing v.

    With (A - I) x = kappa v, kappa > 0 uses the inner word (A, a)^(m-1) (B, b)^(m-1)
    and y = m x + m(m-1)/2 kappa v; kappa < 0 uses (B, b)^m (A, a)^m and
    y = (m+1) x - m(m-1)/2 kappa v. Both tend to +v.

    Args:
        first: (A, a) with A a shear
        second: (B, b) with AB = I
        epsilon: Positive rational bound on 1 - cos(v, y)
        direction: Oriented fixed vector v (default: primitive, positive leading entry)

    Returns:
        Tuple (inner word, y) with y in the same open halfspace cut by span(v) as x

    Raises:
        InputError: If A is not a shear, AB != I or x lies on the fixed line
    """
    matrix = first.A
    if classify(matrix).kind is not ElementKind.SHEAR:
        raise InputError(f"shear step needs a shear, got {classify(matrix)}")
    if epsilon <= 0:
        raise InputError("epsilon must be positive")
    v = direction if direction is not None else fixed_vector(matrix)
    if matrix.apply(v) != tuple(v):
        raise InputError(f"{v} is not fixed by the shear")
    x = pair_translation(first, second)
    side = exact_sign(cross(v, x))
    if side == 0:
        raise InputError(f"x = {x} lies on the fixed line of the shear")

    nx = (matrix.a - 1) * x[0] + matrix.b * x[1], matrix.c * x[0] + (matrix.d - 1) * x[1]
    kappa = Fraction(dot(nx, v), dot(v, v))
    threshold = 1 - Fraction(epsilon)
    for m in _odd_exponents():
        half = Fraction(m * (m - 1), 2)
        if kappa > 0:
            factors = ((1, m - 1), (2, m - 1)) if m > 1 else ()
            closed = (m * x[0] + half * kappa * v[0], m * x[1] + half * kappa * v[1])
        else:
            factors = ((2, m), (1, m))
            closed = ((m + 1) * x[0] - half * kappa * v[0], (m + 1) * x[1] - half * kappa * v[1])
        y = (int(closed[0]), int(closed[1]))
        if exact_sign(cross(v, y)) == side and _cosine_exceeds(dot(v, y), dot(v, v), dot(y, y), threshold):
            logger.debug("shear step accepted m=%d kappa=%s", m, kappa)
            return PowerWord(factors, 2), y
    raise ResourceError("shear limit step did not converge within the exponent ceiling")


def _expand(inner: PowerWord, parts: Sequence[PowerWord]) -> PowerWord:
    """Substitute sub-words for the letters of a word over a small alphabet."""
    result = PowerWord.empty(parts[0].k)
    for index, exponent in inner.factors:
        result = result + parts[index - 1] * exponent
    return result


def _free_candidate(matrix: SL2) -> tuple[SL2, bool] | None:
    """Positive scale or shear associated with a matrix, squaring when needed."""
    kind = classify(matrix).kind
    if kind in (ElementKind.SHEAR, ElementKind.POSITIVE_SCALE):
        return matrix, False
    if kind in (ElementKind.TWISTED_INVERSION, ElementKind.INVERTING_SCALE):
        return matrix @ matrix, True
    return None


def _lines_disjoint(first: Sequence[Line], second: Sequence[Line]) -> bool:
    return not any(l1.direction == l2.direction for l1 in first for l2 in second)


def find_free_pair(matrices: Sequence[SL2], depth: int) -> tuple[PowerWord, PowerWord] | None:
    """
    Search products by length for positive scales or shears with disjoint invariant lines.

    Returns:
        Two words (not necessarily full-image) for the pair, or None
    """
    k = len(matrices)
    seen: dict[SL2, PowerWord] = {}
    frontier: list[tuple[SL2, PowerWord]] = [(SL2.identity(), PowerWord.empty(k))]
    candidates: list[tuple[PowerWord, tuple[Line, ...]]] = []
    for _ in range(depth):
        next_frontier = []
        for matrix, word in frontier:
            for index in range(1, k + 1):
                product = matrix @ matrices[index - 1]
                if product in seen:
                    continue
                extended = word + PowerWord.letter(index, k)
                seen[product] = extended
                next_frontier.append((product, extended))
                candidate = _free_candidate(product)
                if candidate is None:
                    continue
                squared, was_squared = candidate
                cand_word = extended * 2 if was_squared else extended
                lines = invariant_lines(squared)
                for other_word, other_lines in candidates:
                    if _lines_disjoint(lines, other_lines):
                        return other_word, cand_word
                candidates.append((cand_word, lines))
        frontier = next_frontier
    return None


def _angle(line: Line) -> float:
    return math.atan2(float(line.direction[1]), float(line.direction[0])) % math.pi


def _rotate_to(order: list, pattern: str) -> list | None:
    for shift in range(len(order)):
        rotated = order[shift:] + order[:shift]
        if "".join(owner for _, owner, _ in rotated) == pattern:
            return rotated
    return None


def _target_schedule(lines_a: Sequence[Line], lines_b: Sequence[Line]) -> list[tuple[str, Line]]:
    """Sequence of (owner, line) targets following the circular order of the lines."""
    if len(lines_a) == 1 and len(lines_b) == 1:
        return [("B", lines_b[0]), ("A", lines_a[0]), ("B", lines_b[0]), ("A", lines_a[0])]
    if len(lines_a) == 1:
        base = _angle(lines_a[0])
        v_b, w_b = sorted(lines_b, key=lambda line: (_angle(line) - base) % math.pi)
        return [("B", v_b), ("A", lines_a[0]), ("B", w_b), ("A", lines_a[0])]
    order = sorted([(_angle(l), "A", l) for l in lines_a] + [(_angle(l), "B", l) for l in lines_b], key=lambda t: t[0])
    grouped = _rotate_to(order, "AABB")
    if grouped is not None:
        v_a, _, v_b, _ = (line for _, _, line in grouped)
        return [("B", v_b), ("A", v_a), ("B", v_b), ("A", v_a)]
    v_a, v_b, w_a, w_b = (line for _, _, line in _rotate_to(order, "ABAB"))
    return [("B", v_b), ("A", w_a), ("B", w_b), ("A", v_a), ("B", v_b), ("A", w_a)]


def _choose_epsilon(lines_a: Sequence[Line], lines_b: Sequence[Line]) -> Fraction:
    worst = 0.0
    for l1 in lines_a:
        for l2 in lines_b:
            u = [float(x) for x in l1.direction]
            w = [float(x) for x in l2.direction]
            worst = max(worst, abs(u[0] * w[0] + u[1] * w[1]) / math.hypot(*u) / math.hypot(*w))
    return Fraction(max((1 - worst) * 0.45, 1e-4)).limit_denominator(10**6)


def _combine(collected: Sequence[tuple[Vector2, PowerWord]]) -> PowerWord | None:
    """Positive combination of the most recent translations, shortest suffix first."""
    for start in range(len(collected) - 2, -1, -1):
        window = collected[start:]
        combo = strictly_positive_zero_combo([x for x, _ in window])
        if combo is None:
            continue
        result = PowerWord.empty(window[0][1].k)
        for n, (_, word) in zip(combo, window):
            result = result + word * n
        return result
    return None


def free_case_certificate(
    inst: Instance, caps: Caps, witnesses: Sequence[PowerWord] | None = None
) -> PowerWord | None:
    """
    Best-effort identity certificate when the matrix group contains a free pair.

    Finds A, B (positive scales or shears) with disjoint invariant lines, sets
    Y = A^-1 B^-1 so that (A, a) Y (B, b) = (I, x), then alternates limit steps
    toward the lines of B and A until the collected translations admit a
    strictly positive zero combination. Falls back to bounded BFS.

    Args:
        inst: Instance whose matrix semigroup is a non-abelian infinite group
        caps: Search caps
        witnesses: Inverse witnesses of the generators, computed if omitted

    Returns:
        Verified full-image identity word, or None
    """
    if caps.pair_depth <= 0 and caps.oracle_depth <= 0:
        return None
    gens = inst.generators
    if witnesses is None:
        from .sl2group import Verdict, semigroup_is_group

        groupness = semigroup_is_group(inst.matrices, caps)
        if groupness.verdict is not Verdict.YES:
            return None
        witnesses = groupness.witnesses

    certificate = None
    pair = find_free_pair(inst.matrices, caps.pair_depth)
    if pair is not None:
        try:
            certificate = _drive_limit_steps(inst, caps, witnesses, pair)
        except (InputError, ResourceError) as exc:
            logger.info("free-pair construction abandoned: %s", exc)
    if certificate is None and caps.oracle_depth > 0:
        from .oracle import find_identity_word

        try:
            certificate = find_identity_word(gens, caps.oracle_depth, caps.norm, caps.max_states)
        except ResourceError as exc:
            logger.info("identity search fallback exhausted: %s", exc)
    if certificate is not None and not verify_identity_certificate(certificate, gens):
        raise CertificateError(f"free-case certificate {certificate} does not evaluate to the identity")
    return certificate


def _drive_limit_steps(
    inst: Instance, caps: Caps, witnesses: Sequence[PowerWord], pair: tuple[PowerWord, PowerWord]
) -> PowerWord | None:
    gens = inst.generators
    word_a, word_b = (full_image_word(w, witnesses) for w in pair)
    elem_a, elem_b = evaluate_word(word_a, gens), evaluate_word(word_b, gens)
    lines_a, lines_b = invariant_lines(elem_a.A), invariant_lines(elem_b.A)
    if len(lines_a) == 2 and len(lines_b) == 1:
        word_a, word_b, elem_a, elem_b, lines_a, lines_b = word_b, word_a, elem_b, elem_a, lines_b, lines_a

    word_y = inverse_word(word_a, witnesses) + inverse_word(word_b, witnesses)
    elem_y = evaluate_word(word_y, gens)
    x = (elem_a * elem_y * elem_b).a
    if x == (0, 0):
        return word_a + word_y + word_b

    epsilon = _choose_epsilon(lines_a, lines_b)
    schedule = _target_schedule(lines_a, lines_b)
    orientation: dict[int, int] = {}
    collected: list[tuple[Vector2, PowerWord]] = [(x, word_a + word_y + word_b)]
    for step in range(caps.witness_steps):
        owner, line = schedule[step % len(schedule)]
        if owner == "B":
            first, second = elem_a * elem_y, elem_b
            parts = (word_a + word_y, word_b)
        else:
            first, second = elem_a, elem_y * elem_b
            parts = (word_a, word_y + word_b)
        if any(own.contains(x) for own in invariant_lines(first.A)):
            continue

        if classify(first.A).kind is ElementKind.SHEAR:
            key = step % len(schedule) % 2
            sign = orientation.get(key, -1) * -1
            orientation[key] = sign
            base = fixed_vector(first.A)
            inner, y = shearlim_step(first, second, epsilon, (sign * base[0], sign * base[1]))
        else:
            role = next(l.role for l in invariant_lines(first.A) if l.direction == line.direction)
            inner, y = scalelim_step(first, second, role, epsilon)

        expanded = _expand(inner, parts) if not inner.is_empty else PowerWord.empty(inst.k)
        inner_elem = evaluate_word(expanded, gens) if not expanded.is_empty else SA2Element.identity()
        if owner == "B":
            word_y, elem_y = word_y + expanded, elem_y * inner_elem
        else:
            word_y, elem_y = expanded + word_y, inner_elem * elem_y
        if len(word_y) > caps.max_word_factors:
            raise ResourceError(f"witness word exceeded {caps.max_word_factors} factors")

        current = word_a + word_y + word_b
        evaluated = evaluate_word(current, gens)
        if not evaluated.A.is_identity or evaluated.a != y:
            raise CertificateError(f"limit step word {current} does not evaluate to (I, {y})")
        x = y
        if x == (0, 0):
            return current
        collected.append((x, current))
        combined = _combine(collected)
        if combined is not None:
            logger.info("free-case certificate after %d limit steps", step + 1)
            return combined
    return None
