"""Curated and random instance corpora and the concurrent cross-validation runner."""
from __future__ import annotations

import asyncio
import logging
import random
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Sequence

from .algebra import SL2, Instance, SA2Element
from .errors import Sa2DecideError
from .models import Caps, CorpusSummary, RunProgress, RunStatus
from .oracle import CLASS_MIXES, CrossValidation, cross_validate, random_instance
from .pipeline import DecisionTag

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NamedInstance:
    """Corpus entry; ``expected`` is the known Group Problem answer when there is one."""

    name: str
    instance: Instance
    expected: DecisionTag | None = None


def _inst(*generators: tuple[SL2, tuple[int, int]]) -> Instance:
    return Instance(tuple(SA2Element(m, a) for m, a in generators))


ID = SL2.identity()
U = SL2(1, 1, 0, 1)
S = SL2(0, -1, 1, 0)
H = SL2(2, 1, 1, 1)
K = SL2(1, 1, 1, 2)
L = SL2(1, 0, 1, 1)
T = SL2(-1, 1, 0, -1)
R3 = SL2(0, 1, -1, -1)
R6 = SL2(1, 1, -1, 0)
# T and U conjugated by [[1, 0], [1, 1]]
T_CONJ = SL2(-2, 1, -1, 0)
U_CONJ = SL2(0, 1, -1, 2)

YES = DecisionTag.IS_GROUP
NO = DecisionTag.NOT_GROUP


def curated_instances() -> list[NamedInstance]:
    """Hand-checked instances covering every dispatch branch, with their answers."""
    return [
        # translations only
        NamedInstance("trivial-pair", _inst((ID, (1, 0)), (ID, (-1, 0))), YES),
        NamedInstance("trivial-basis", _inst((ID, (1, 0)), (ID, (0, 1))), NO),
        NamedInstance("trivial-triple", _inst((ID, (2, 3)), (ID, (-1, 0)), (ID, (0, -1))), YES),
        NamedInstance("trivial-zero", _inst((ID, (0, 0))), YES),
        NamedInstance("trivial-single", _inst((ID, (1, 2))), NO),
        NamedInstance("trivial-halfplane", _inst((ID, (1, 1)), (ID, (-1, 1))), NO),
        NamedInstance("trivial-triangle", _inst((ID, (1, 0)), (ID, (0, 1)), (ID, (-1, -1))), YES),
        # torsion
        NamedInstance("torsion-order4", _inst((S, (0, 0))), YES),
        NamedInstance("torsion-order4-shifted", _inst((S, (1, 0))), YES),
        NamedInstance("torsion-minus-identity", _inst((-ID, (3, -2))), YES),
        NamedInstance("torsion-order6", _inst((R6, (1, 1))), YES),
        NamedInstance("torsion-order3", _inst((R3, (2, 0))), YES),
        NamedInstance("torsion-two-powers", _inst((S, (1, 0)), (S.power(3), (0, 5))), YES),
        NamedInstance("torsion-hidden-scale", _inst((H, (1, 0)), (-H.inverse(), (0, 1))), YES),
        NamedInstance("torsion-hidden-shear", _inst((U, (0, 1)), (-U.inverse(), (1, 0))), YES),
        # twisted inversions
        NamedInstance("twisted-pair", _inst((T, (5, 7)), (T.inverse(), (2, 3))), YES),
        NamedInstance("twisted-zero", _inst((T, (0, 0)), (T.inverse(), (0, 0))), YES),
        NamedInstance("twisted-conjugated", _inst((T_CONJ, (3, -2)), (T_CONJ.inverse(), (7, 1))), YES),
        NamedInstance("twisted-single", _inst((T, (1, 0))), NO),
        NamedInstance("twisted-triple", _inst((T, (1, 0)), (T, (0, 1)), (T.inverse(), (2, 2))), YES),
        # inverting scales
        NamedInstance("inverting-zero", _inst((-H, (0, 0)), (-H.inverse(), (0, 0))), YES),
        NamedInstance("inverting-one-sided", _inst((-H, (1, 0)), (-H.inverse(), (0, 0))), YES),
        NamedInstance("inverting-general", _inst((-H, (1, 1)), (-H.inverse(), (-1, 2))), YES),
        NamedInstance("inverting-single", _inst((-H, (0, 0))), NO),
        # shears
        NamedInstance("shear-single", _inst((U, (0, 0))), NO),
        NamedInstance("shear-exact-inverse", _inst((U, (0, 1)), (U.inverse(), (1, -1))), YES),
        NamedInstance("shear-near-inverse", _inst((U, (0, 1)), (U.inverse(), (0, -1))), NO),
        NamedInstance("shear-along-line", _inst((U, (1, 0)), (U.inverse(), (1, 0))), NO),
        NamedInstance("shear-along-line-balanced", _inst((U, (1, 0)), (U.inverse(), (-1, 0))), YES),
        NamedInstance("shear-central-offset", _inst((U, (1, 0)), (U.inverse(), (0, 0))), NO),
        NamedInstance("shear-same-side", _inst((U, (0, 1)), (U.inverse(), (0, 1))), NO),
        NamedInstance(
            "shear-noncommuting", _inst((U, (0, 1)), (U.inverse(), (0, 0)), (ID, (0, -1))), YES
        ),
        NamedInstance(
            "shear-powers", _inst((U.power(2), (0, 1)), (U.inverse(), (1, 0)), (U.inverse(), (-1, -2))), YES
        ),
        NamedInstance("shear-conjugated", _inst((U_CONJ, (1, 0)), (U_CONJ.inverse(), (-2, -1))), YES),
        # positive scales
        NamedInstance("scale-zero", _inst((H, (0, 0)), (H.inverse(), (0, 0))), YES),
        NamedInstance("scale-exact-inverse", _inst((H, (1, 0)), (H.inverse(), (-1, 1))), YES),
        NamedInstance("scale-one-sided", _inst((H, (1, 0)), (H.inverse(), (0, 0))), NO),
        NamedInstance("scale-near-inverse", _inst((H, (1, 0)), (H.inverse(), (-1, 0))), NO),
        NamedInstance(
            "scale-with-identity", _inst((H, (1, 0)), (H.inverse(), (-1, 1)), (ID, (0, 0))), YES
        ),
        NamedInstance(
            "scale-with-translation", _inst((H, (1, 0)), (H.inverse(), (-1, 1)), (ID, (1, 0))), NO
        ),
        NamedInstance(
            "scale-power-relation", _inst((H.power(2), (0, 1)), (H.inverse(), (0, 0)), (H.inverse(), (1, -2))), YES
        ),
        NamedInstance("scale-conjugated", _inst((K, (2, -1)), (K.inverse(), (-5, 3))), YES),
        # non-abelian matrix groups
        NamedInstance("nonabelian-modular", _inst((S, (0, 0)), (U, (0, 0))), YES),
        NamedInstance("nonabelian-modular-shifted", _inst((S, (1, 0)), (U, (0, 1))), YES),
        NamedInstance(
            "nonabelian-elementary",
            _inst((U, (0, 0)), (L, (0, 0)), (U.inverse(), (0, 0)), (L.inverse(), (0, 0))),
            YES,
        ),
        NamedInstance("nonabelian-positive-monoid", _inst((U, (0, 0)), (L, (1, 1))), NO),
        NamedInstance("nonabelian-mixed-shears", _inst((U, (1, 0)), (L.inverse(), (0, 0))), YES),
        NamedInstance(
            "nonabelian-scales",
            _inst((H, (0, 0)), (H.inverse(), (0, 0)), (K, (0, 0)), (K.inverse(), (0, 0))),
            YES,
        ),
    ]


def random_corpus(seed: int, count: int, entry_bound: int = 2, max_k: int = 3) -> list[NamedInstance]:
    """Seeded random instances with K <= max_k, cycling through the class mixes."""
    rng = random.Random(seed)
    corpus = []
    for index in range(count):
        k = rng.randint(1, max_k)
        mix = CLASS_MIXES[index % len(CLASS_MIXES)]
        instance = random_instance(k, entry_bound, mix, seed=rng.randrange(2**32))
        corpus.append(NamedInstance(f"random-{seed}-{index}-{mix}", instance))
    return corpus


def _row(entry: NamedInstance, result: CrossValidation) -> dict[str, Any]:
    decision, oracle = result.decision, result.oracle
    mismatch = entry.expected is not None and decision.tag not in (entry.expected, DecisionTag.INCONCLUSIVE)
    return {
        "name": entry.name,
        "k": entry.instance.k,
        "tag": decision.tag.value,
        "case": decision.case.value if decision.case else "",
        "expected": entry.expected.value if entry.expected else "",
        "certificate_factors": len(decision.certificate) if decision.certificate else 0,
        "oracle_identity": oracle.identity_found if oracle else None,
        "oracle_full_image_identity": oracle.full_image_identity_found if oracle else None,
        "oracle_aborted": result.oracle_aborted,
        "contradiction": result.contradiction or mismatch,
        "detail": result.detail or ("decision differs from the expected answer" if mismatch else ""),
    }


@dataclass
class CorpusRun:
    """Represents one cross-validation run over a corpus."""

    run_id: str
    status: RunStatus
    progress: RunProgress
    submitted_at: datetime
    updated_at: datetime
    caps: Caps
    results: list[dict[str, Any]] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    def update_progress(self, completed: int | None = None, errors: int | None = None, total: int | None = None) -> None:
        """Update run progress and timestamp."""
        if completed is not None:
            self.progress.completed = completed
        if errors is not None:
            self.progress.errors = errors
        if total is not None:
            self.progress.total = total
        self.updated_at = datetime.now(timezone.utc)

    def update_status(self, status: RunStatus) -> None:
        """Update run status and timestamp."""
        self.status = status
        self.updated_at = datetime.now(timezone.utc)

    def add_result(self, result: dict[str, Any]) -> None:
        """Add a validated instance to the run."""
        self.results.append(result)
        self.update_progress(completed=len(self.results))

    def add_error(self, error: str) -> None:
        """Add a failed instance to the run."""
        self.errors.append(error)
        self.update_progress(errors=len(self.errors))

    def summary(self) -> CorpusSummary:
        """Counts by outcome, with the names of contradicting instances."""
        tags = [r["tag"] for r in self.results]
        contradicting = [r["name"] for r in self.results if r["contradiction"]]
        return CorpusSummary(
            status=self.status,
            progress=self.progress.model_copy(),
            is_group=tags.count(DecisionTag.IS_GROUP.value),
            not_group=tags.count(DecisionTag.NOT_GROUP.value),
            inconclusive=tags.count(DecisionTag.INCONCLUSIVE.value),
            oracle_aborted=sum(1 for r in self.results if r["oracle_aborted"]),
            contradictions=len(contradicting),
            contradiction_names=contradicting,
        )


def new_run(total: int, caps: Caps) -> CorpusRun:
    """Create a queued run."""
    now = datetime.now(timezone.utc)
    return CorpusRun(
        run_id=str(uuid.uuid4()),
        status=RunStatus.QUEUED,
        progress=RunProgress(total=total, completed=0, errors=0),
        submitted_at=now,
        updated_at=now,
        caps=caps,
    )


async def run_corpus(
    entries: Sequence[NamedInstance], caps: Caps | None = None, concurrency: int = 4
) -> CorpusRun:
    """
    Cross-validate every entry with bounded concurrency.

    Each instance runs in a worker thread; failures are recorded on the run
    and do not stop the others.

    Args:
        entries: Instances to validate
        caps: Caps for both decider and oracle
        concurrency: Instances validated at once

    Returns:
        The finished run
    """
    caps = caps or Caps()
    run = new_run(len(entries), caps)
    run.update_status(RunStatus.RUNNING)
    sem = asyncio.Semaphore(max(1, concurrency))

    async def validate(entry: NamedInstance) -> None:
        async with sem:
            try:
                result = await asyncio.to_thread(cross_validate, entry.instance, caps)
            except Sa2DecideError as exc:
                logger.warning("instance %s failed: %s", entry.name, exc)
                run.add_error(f"{entry.name}: {exc}")
                return
            run.add_result(_row(entry, result))

    try:
        await asyncio.gather(*[validate(entry) for entry in entries])
    except Exception:
        run.update_status(RunStatus.FAILED)
        raise
    run.results.sort(key=lambda r: r["name"])
    run.update_status(RunStatus.SUCCEEDED)
    logger.info("corpus run %s finished: %s", run.run_id, run.summary().model_dump(exclude={"contradiction_names"}))
    return run
