"""Tests for the corpora and the concurrent cross-validation runner."""
import pytest

from sa2_decide.corpus import NamedInstance, curated_instances, new_run, random_corpus, run_corpus
from sa2_decide.models import Caps, RunStatus
from sa2_decide.pipeline import DecisionTag


def _curated(*names):
    by_name = {entry.name: entry for entry in curated_instances()}
    return [by_name[name] for name in names]


class TestCuratedInstances:
    """Tests for the curated corpus."""

    def test_names_unique(self):
        """Test curated names identify entries."""
        names = [entry.name for entry in curated_instances()]
        assert len(names) == len(set(names))

    def test_every_entry_has_an_answer(self):
        """Test curated entries all carry a definite expected answer."""
        expected = {entry.expected for entry in curated_instances()}
        assert expected == {DecisionTag.IS_GROUP, DecisionTag.NOT_GROUP}


class TestRandomCorpus:
    """Tests for random_corpus."""

    def test_deterministic(self):
        """Test the same seed reproduces the same corpus."""
        first = random_corpus(3, 10)
        second = random_corpus(3, 10)

        assert [e.name for e in first] == [e.name for e in second]
        assert [e.instance for e in first] == [e.instance for e in second]

    def test_size_and_names(self):
        """Test entries are numbered, bounded in K and unlabelled."""
        corpus = random_corpus(0, 9, max_k=2)

        assert len(corpus) == 9
        assert corpus[0].name == "random-0-0-any"
        assert corpus[1].name == "random-0-1-trivial"
        assert all(1 <= e.instance.k <= 2 for e in corpus)
        assert all(e.expected is None for e in corpus)


class TestCorpusRun:
    """Tests for CorpusRun bookkeeping."""

    def test_new_run_is_queued(self):
        """Test a fresh run starts queued with empty progress."""
        run = new_run(3, Caps())

        assert run.status == RunStatus.QUEUED
        assert run.progress.total == 3
        assert run.progress.completed == 0

    def test_add_result_and_error(self):
        """Test results and errors update progress."""
        run = new_run(2, Caps())
        run.add_result({"name": "a", "tag": "is-group", "oracle_aborted": False, "contradiction": False})
        run.add_error("b: boom")

        assert run.progress.completed == 1
        assert run.progress.errors == 1
        summary = run.summary()
        assert summary.is_group == 1
        assert summary.contradictions == 0


class TestRunCorpus:
    """Tests for run_corpus."""

    @pytest.mark.asyncio
    async def test_curated_sample_agrees(self):
        """Test a mixed sample of curated instances has no contradictions."""
        entries = _curated(
            "trivial-pair",
            "trivial-basis",
            "torsion-order4-shifted",
            "twisted-pair",
            "shear-single",
            "shear-exact-inverse",
            "scale-one-sided",
        )
        run = await run_corpus(entries, concurrency=3)
        summary = run.summary()

        assert run.status == RunStatus.SUCCEEDED
        assert run.errors == []
        assert summary.progress.completed == len(entries)
        assert summary.contradictions == 0
        assert summary.is_group == 4
        assert summary.not_group == 3
        assert [r["name"] for r in run.results] == sorted(e.name for e in entries)

    @pytest.mark.asyncio
    async def test_wrong_expectation_is_flagged(self):
        """Test a decision that differs from the recorded answer counts as a contradiction."""
        entry = _curated("trivial-basis")[0]
        mislabelled = NamedInstance("mislabelled", entry.instance, DecisionTag.IS_GROUP)
        run = await run_corpus([mislabelled])
        summary = run.summary()

        assert summary.contradictions == 1
        assert summary.contradiction_names == ["mislabelled"]
        assert run.results[0]["detail"] == "decision differs from the expected answer"

    @pytest.mark.asyncio
    async def test_random_sample_runs(self):
        """Test random instances run to completion with rows for every entry."""
        entries = random_corpus(1, 4, max_k=2)
        run = await run_corpus(entries, Caps(oracle_depth=4))

        assert run.status == RunStatus.SUCCEEDED
        assert run.progress.completed + run.progress.errors == 4
        assert run.summary().contradictions == 0


_DECIDABLE_MIXES = ("trivial", "torsion", "twisted-inversion", "shear", "inverting-scale", "positive-scale")


class TestAcceptanceCorpus:
    """Full cross-validation over the curated corpus and 300 seeded random instances."""

    @pytest.mark.asyncio
    async def test_no_contradictions_and_no_undecided_covered_cases(self):
        """Test zero contradictions overall and no Inconclusive outside the non-abelian mixes."""
        curated = curated_instances()
        entries = curated + random_corpus(2024, 300, entry_bound=2, max_k=3)
        run = await run_corpus(entries, concurrency=4)
        summary = run.summary()

        assert len(curated) >= 40
        assert run.errors == []
        assert summary.progress.completed == len(entries)
        assert summary.contradictions == 0, summary.contradiction_names
        undecided = [
            row["name"]
            for row in run.results
            if row["tag"] == DecisionTag.INCONCLUSIVE.value
            and (not row["name"].startswith("random-") or row["name"].endswith(_DECIDABLE_MIXES))
        ]
        assert undecided == []
