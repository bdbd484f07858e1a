"""Brute-force semigroup enumeration, random instances and cross-validation of decisions."""
from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from typing import Sequence

from pydantic import BaseModel, ConfigDict, Field

from .algebra import SL2, Instance, SA2Element
from .errors import InputError, ResourceError
from .models import Caps
from .pipeline import Decision, DecisionTag, decide_group_problem
from .witness import PowerWord, verify_identity_certificate

logger = logging.getLogger(__name__)

U = SL2(1, 1, 0, 1)
L = SL2(1, 0, 1, 1)
S = SL2(0, -1, 1, 0)
H = SL2(2, 1, 1, 1)
_LETTERS = (U, U.inverse(), L, L.inverse(), S)

CLASS_MIXES = (
    "any",
    "trivial",
    "torsion",
    "twisted-inversion",
    "shear",
    "inverting-scale",
    "positive-scale",
    "non-abelian",
)


class OracleReport(BaseModel):
    """What bounded enumeration found; absence means "not found within caps"."""

    model_config = ConfigDict(frozen=True)

    identity_found: bool = Field(..., description="Some nonempty product equals (I, 0)")
    full_image_identity_found: bool = Field(..., description="Some full-image product equals (I, 0)")
    elements_visited: int = Field(..., description="Distinct semigroup elements seen")
    depth_reached: int = Field(..., description="Longest word length expanded")
    depth_cap: int
    norm_cap: int


class _SemigroupSearch:
    """Breadth-first enumeration of (element, letter mask) states with parent pointers."""

    def __init__(self, gens: Sequence[SA2Element], norm: int, max_states: int) -> None:
        if not gens:
            raise InputError("enumeration needs at least one generator")
        self.gens = tuple(gens)
        self.full_mask = (1 << len(self.gens)) - 1
        self.norm = norm
        self.max_states = max_states
        self.parents: dict[tuple[SA2Element, int], tuple[tuple[SA2Element, int] | None, int]] = {}
        self.elements: set[SA2Element] = set()
        self.depth_reached = 0

    def _admit(self, state: tuple[SA2Element, int], parent, letter: int) -> bool:
        if state in self.parents or state[0].max_entry() > self.norm:
            return False
        if len(self.parents) >= self.max_states:
            raise ResourceError(f"enumeration exceeded {self.max_states} states")
        self.parents[state] = (parent, letter)
        self.elements.add(state[0])
        return True

    def levels(self, depth: int):
        """Yield the newly admitted states of each word length up to depth."""
        frontier = []
        for index, gen in enumerate(self.gens):
            state = (gen, 1 << index)
            if self._admit(state, None, index + 1):
                frontier.append(state)
        if depth >= 1:
            self.depth_reached = 1
            yield frontier
        for length in range(2, depth + 1):
            next_frontier = []
            for element, mask in frontier:
                for index, gen in enumerate(self.gens):
                    state = (element * gen, mask | (1 << index))
                    if self._admit(state, (element, mask), index + 1):
                        next_frontier.append(state)
            if not next_frontier:
                return
            self.depth_reached = length
            frontier = next_frontier
            yield frontier

    def word(self, state: tuple[SA2Element, int]) -> PowerWord:
        letters = []
        current = state
        while current is not None:
            parent, letter = self.parents[current]
            letters.append(letter)
            current = parent
        return PowerWord.from_letters(letters[::-1], len(self.gens))


def bfs_semigroup(
    gens: Sequence[SA2Element], depth: int, norm: int, max_states: int = 100_000
) -> OracleReport:
    """
    Enumerate products of length <= depth, pruning entries above norm.

    Raises:
        InputError: If gens is empty
        ResourceError: If more than max_states states are needed
    """
    search = _SemigroupSearch(gens, norm, max_states)
    identity = full_identity = False
    for level in search.levels(depth):
        for element, mask in level:
            if element.is_identity:
                identity = True
                full_identity = full_identity or mask == search.full_mask
    return OracleReport(
        identity_found=identity,
        full_image_identity_found=full_identity,
        elements_visited=len(search.elements),
        depth_reached=search.depth_reached,
        depth_cap=depth,
        norm_cap=norm,
    )


def find_identity_word(
    gens: Sequence[SA2Element], depth: int, norm: int, max_states: int = 100_000
) -> PowerWord | None:
    """Shortest full-image word evaluating to (I, 0) found by bounded BFS, or None."""
    search = _SemigroupSearch(gens, norm, max_states)
    for level in search.levels(depth):
        for state in level:
            if state[0].is_identity and state[1] == search.full_mask:
                return search.word(state)
    return None


def _random_matrix(rng: random.Random, length: int) -> SL2:
    result = SL2.identity()
    for _ in range(length):
        result = result @ rng.choice(_LETTERS)
    return result


def _conjugate(rng: random.Random, matrix: SL2) -> SL2:
    w = _random_matrix(rng, rng.randint(0, 2))
    return w @ matrix @ w.inverse()


def _exponents(rng: random.Random, k: int, choices: Sequence[int]) -> list[int]:
    values = [rng.choice(choices) for _ in range(k)]
    # one generator of each sign keeps the class reachable as a group
    if k >= 2 and all(v > 0 for v in values):
        values[-1] = -values[-1]
    return values


def _matrices_for(rng: random.Random, k: int, class_mix: str) -> list[SL2]:
    if class_mix == "trivial":
        return [SL2.identity()] * k
    if class_mix == "torsion":
        base = _conjugate(rng, rng.choice((S, S @ U, -SL2.identity(), (S @ U).power(2))))
        return [base.power(rng.randint(1, 5)) for _ in range(k)]
    if class_mix == "twisted-inversion":
        base = _conjugate(rng, -U.power(rng.randint(1, 2)))
        return [base.power(e) for e in _exponents(rng, k, (1, -1))]
    if class_mix == "shear":
        base = _conjugate(rng, U)
        return [base.power(e) for e in _exponents(rng, k, (1, 2, -1, -2))]
    if class_mix == "inverting-scale":
        base = _conjugate(rng, -H)
        return [base.power(e) for e in _exponents(rng, k, (1, -1))]
    if class_mix == "positive-scale":
        base = _conjugate(rng, rng.choice((H, SL2(1, 1, 1, 2))))
        return [base.power(e) for e in _exponents(rng, k, (1, 2, -1, -2, 0))]
    if class_mix == "non-abelian":
        return [_random_matrix(rng, rng.randint(1, 4)) for _ in range(k)]
    return [_random_matrix(rng, rng.randint(0, 4)) for _ in range(k)]


def random_instance(k: int, entry_bound: int, class_mix: str = "any", seed: int | None = None) -> Instance:
    """
    Deterministic random instance for a seed.

    Matrix parts are products of elementary shears and S, or powers of a
    conjugated class representative when a class mix is requested;
    translations are uniform in [-entry_bound, entry_bound]^2.

    Raises:
        InputError: If k < 1 or the class mix is unknown
    """
    if k < 1:
        raise InputError("an instance needs at least one generator")
    if class_mix not in CLASS_MIXES:
        raise InputError(f"unknown class mix {class_mix!r}; expected one of {CLASS_MIXES}")
    rng = random.Random(seed)
    matrices = _matrices_for(rng, k, class_mix)
    return Instance(
        tuple(
            SA2Element(m, (rng.randint(-entry_bound, entry_bound), rng.randint(-entry_bound, entry_bound)))
            for m in matrices
        )
    )


@dataclass(frozen=True)
class CrossValidation:
    """A decision next to the oracle's findings."""

    decision: Decision
    oracle: OracleReport | None
    contradiction: bool
    detail: str | None = None

    @property
    def oracle_aborted(self) -> bool:
        return self.oracle is None


def cross_validate(inst: Instance, caps: Caps | None = None) -> CrossValidation:
    """
    Decide the Group Problem and compare against bounded enumeration.

    A contradiction is NotGroup next to an oracle full-image identity, or an
    IsGroup certificate that fails verification. Inconclusive never counts.
    """
    caps = caps or Caps()
    decision = decide_group_problem(inst, caps)
    try:
        report = bfs_semigroup(inst.generators, caps.oracle_depth, caps.norm, caps.max_states)
    except ResourceError as exc:
        logger.info("oracle aborted: %s", exc)
        report = None

    detail = None
    if decision.tag is DecisionTag.NOT_GROUP and report is not None and report.full_image_identity_found:
        detail = "decided not a group but enumeration found a full-image identity"
    elif decision.certificate is not None and not verify_identity_certificate(decision.certificate, inst.generators):
        detail = "certificate does not evaluate to the identity"
    if detail:
        logger.error("contradiction on %s: %s", inst, detail)
    return CrossValidation(decision, report, detail is not None, detail)
