"""Tests for bounded enumeration, random instances and cross-validation."""
import pytest

from sa2_decide.algebra import SL2, ElementKind, Instance, SA2Element, classify
from sa2_decide.errors import InputError, ResourceError
from sa2_decide.models import Caps
from sa2_decide.oracle import CLASS_MIXES, bfs_semigroup, cross_validate, find_identity_word, random_instance
from sa2_decide.pipeline import DecisionTag
from sa2_decide.witness import PowerWord

I = SL2.identity()
U = SL2(1, 1, 0, 1)


def _gens(*generators):
    return [SA2Element(m, a) for m, a in generators]


class TestBfsSemigroup:
    """Tests for bfs_semigroup."""

    def test_translation_pair(self):
        """Test the identity shows up at length two as a full-image product."""
        report = bfs_semigroup(_gens((I, (1, 0)), (I, (-1, 0))), depth=2, norm=100)

        assert report.identity_found
        assert report.full_image_identity_found
        assert report.elements_visited == 5
        assert report.depth_reached == 2
        assert report.depth_cap == 2

    def test_single_shear(self):
        """Test a lone shear never produces the identity."""
        report = bfs_semigroup(_gens((U, (0, 0))), depth=5, norm=100)

        assert not report.identity_found
        assert report.depth_reached == 5

    def test_identity_only_on_a_subset(self):
        """Test an identity generator alone is not a full-image identity."""
        report = bfs_semigroup(_gens((I, (0, 0)), (U, (0, 0))), depth=4, norm=100)

        assert report.identity_found
        assert not report.full_image_identity_found

    def test_norm_prunes(self):
        """Test generators above the norm cap are never admitted."""
        report = bfs_semigroup(_gens((I, (5, 0))), depth=3, norm=3)

        assert report.elements_visited == 0
        assert not report.identity_found

    def test_state_cap(self):
        """Test exceeding max_states raises a resource error."""
        with pytest.raises(ResourceError):
            bfs_semigroup(_gens((I, (1, 0)), (I, (0, 1))), depth=3, norm=100, max_states=2)

    def test_empty(self):
        """Test enumeration needs generators."""
        with pytest.raises(InputError):
            bfs_semigroup([], depth=3, norm=100)


class TestFindIdentityWord:
    """Tests for find_identity_word."""

    def test_shortest_word(self):
        """Test the returned word is the shortest full-image identity."""
        word = find_identity_word(_gens((I, (1, 0)), (I, (-1, 0))), depth=4, norm=100)

        assert word == PowerWord(((1, 1), (2, 1)), 2)

    def test_none_when_absent(self):
        """Test None comes back when nothing is found within the caps."""
        assert find_identity_word(_gens((U, (0, 0))), depth=4, norm=100) is None


class TestRandomInstance:
    """Tests for random_instance."""

    def test_deterministic(self):
        """Test equal seeds give equal instances."""
        assert random_instance(3, 2, seed=7) == random_instance(3, 2, seed=7)

    @pytest.mark.parametrize("class_mix", CLASS_MIXES)
    def test_translation_bound(self, class_mix):
        """Test translations stay inside the entry bound for every mix."""
        inst = random_instance(3, 2, class_mix, seed=11)

        assert inst.k == 3
        assert all(abs(v) <= 2 for g in inst.generators for v in g.a)

    def test_trivial_mix(self):
        """Test the trivial mix has identity matrix parts only."""
        inst = random_instance(4, 3, "trivial", seed=1)

        assert all(m.is_identity for m in inst.matrices)

    def test_shear_mix(self):
        """Test the shear mix gives powers of one shear."""
        inst = random_instance(3, 2, "shear", seed=5)

        assert all(classify(m).kind is ElementKind.SHEAR for m in inst.matrices)
        assert all(x @ y == y @ x for x in inst.matrices for y in inst.matrices)

    def test_rejects_bad_arguments(self):
        """Test k < 1 and unknown mixes are refused."""
        with pytest.raises(InputError):
            random_instance(0, 2)
        with pytest.raises(InputError):
            random_instance(2, 2, "hyperbolic")


class TestCrossValidate:
    """Tests for cross_validate."""

    def test_agreement(self):
        """Test a group decision next to an oracle identity is not a contradiction."""
        inst = Instance(tuple(_gens((I, (1, 0)), (I, (-1, 0)))))
        result = cross_validate(inst)

        assert result.decision.tag is DecisionTag.IS_GROUP
        assert result.oracle.full_image_identity_found
        assert not result.contradiction
        assert result.detail is None

    def test_not_group_without_identity(self):
        """Test a NotGroup decision with no enumerated identity agrees."""
        inst = Instance(tuple(_gens((I, (1, 0)), (I, (0, 1)))))
        result = cross_validate(inst)

        assert result.decision.tag is DecisionTag.NOT_GROUP
        assert not result.oracle.identity_found
        assert not result.contradiction

    def test_oracle_aborted(self):
        """Test a capped-out oracle is recorded without a contradiction."""
        inst = Instance(tuple(_gens((I, (1, 0)), (I, (-1, 0)))))
        result = cross_validate(inst, Caps(max_states=1))

        assert result.oracle_aborted
        assert result.oracle is None
        assert not result.contradiction


class TestOracleMonotonicity:
    """Raising caps never loses an identity."""

    @pytest.mark.parametrize("seed", range(16))
    def test_larger_caps_keep_identity(self, seed):
        """Test depth and norm increases keep identity_found and full_image_identity_found."""
        inst = random_instance(1 + seed % 2, 2, CLASS_MIXES[seed % len(CLASS_MIXES)], seed=seed)
        small = bfs_semigroup(inst.generators, depth=3, norm=50)
        deeper = bfs_semigroup(inst.generators, depth=6, norm=50)
        wider = bfs_semigroup(inst.generators, depth=6, norm=10**6)

        for low, high in ((small, deeper), (deeper, wider)):
            assert high.identity_found or not low.identity_found
            assert high.full_image_identity_found or not low.full_image_identity_found
            assert high.elements_visited >= low.elements_visited
