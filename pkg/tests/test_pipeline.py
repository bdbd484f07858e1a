"""Tests for the Group and Identity Problem deciders."""
import random

import pytest

from sa2_decide import pipeline
from sa2_decide.algebra import SL2, Instance, SA2Element
from sa2_decide.corpus import curated_instances
from sa2_decide.errors import InputError, ResourceError
from sa2_decide.models import Caps
from sa2_decide.oracle import random_instance
from sa2_decide.pipeline import (
    CaseLabel,
    DecisionTag,
    case_inverting_scale_certificate,
    case_torsion_certificate,
    case_trivial,
    case_twisted_inversion_certificate,
    decide_group_problem,
    decide_identity_problem,
)
from sa2_decide.witness import PowerWord, verify_identity_certificate, verify_identity_word

I = SL2.identity()
U = SL2(1, 1, 0, 1)
S = SL2(0, -1, 1, 0)
H = SL2(2, 1, 1, 1)
T = SL2(-1, 1, 0, -1)

CURATED = curated_instances()


def _inst(*generators):
    return Instance(tuple(SA2Element(m, a) for m, a in generators))


class TestDecideGroupProblem:
    """Tests for decide_group_problem."""

    @pytest.mark.parametrize("entry", CURATED, ids=[entry.name for entry in CURATED])
    def test_curated_answers(self, entry):
        """Test every curated instance gets its hand-checked answer."""
        decision = decide_group_problem(entry.instance)

        assert decision.tag is entry.expected
        if decision.certificate is not None:
            assert verify_identity_certificate(decision.certificate, entry.instance.generators)
        if decision.tag is DecisionTag.NOT_GROUP:
            assert decision.reason

    def test_translation_pair(self):
        """Test {(I,(1,0)), (I,(-1,0))} is a group with the obvious certificate."""
        decision = decide_group_problem(_inst((I, (1, 0)), (I, (-1, 0))))

        assert decision.is_group
        assert decision.case is CaseLabel.TRIVIAL
        assert decision.certificate == PowerWord(((1, 1), (2, 1)), 2)

    def test_translation_basis(self):
        """Test independent translations are not a group."""
        decision = decide_group_problem(_inst((I, (1, 0)), (I, (0, 1))))

        assert decision.tag is DecisionTag.NOT_GROUP
        assert decision.case is CaseLabel.TRIVIAL

    def test_single_shear(self):
        """Test a lone shear fails at the matrix-part stage."""
        decision = decide_group_problem(_inst((U, (0, 0))))

        assert decision.tag is DecisionTag.NOT_GROUP
        assert decision.case is CaseLabel.MATRIX_NOT_A_GROUP

    def test_twisted_inversion_pair(self):
        """Test (T,(5,7)), (T^-1,(2,3)) is a group with a verified certificate."""
        inst = _inst((T, (5, 7)), (T.inverse(), (2, 3)))
        decision = decide_group_problem(inst)

        assert decision.is_group
        assert decision.case is CaseLabel.TWISTED_INVERSION
        assert verify_identity_certificate(decision.certificate, inst.generators)
        assert decision.stats["factors"] == len(decision.certificate)

    def test_torsion_case_label(self):
        """Test a single order-4 generator is decided through the torsion branch."""
        inst = _inst((S, (1, 0)))
        decision = decide_group_problem(inst)

        assert decision.case is CaseLabel.TORSION
        assert decision.certificate.letters == frozenset({1})
        assert decision.certificate.total_exponent() % 4 == 0
        assert verify_identity_certificate(decision.certificate, inst.generators)

    def test_report_round_trip_fields(self):
        """Test the machine-readable report mirrors the decision."""
        decision = decide_group_problem(_inst((I, (1, 0)), (I, (-1, 0))))
        report = decision.to_report()

        assert report.tag == "is-group"
        assert report.case == "trivial"
        assert report.certificate == [[1, 1], [2, 1]]
        assert report.subset is None

    def test_translations_with_one_cancelling_row(self):
        """Test translations whose y-components are all negative are not a group."""
        decision = decide_group_problem(_inst((I, (96, -408)), (I, (-936, -1224))))

        assert decision.tag is DecisionTag.NOT_GROUP
        assert decision.certificate is None

    @pytest.mark.parametrize(
        "builder,generators,stage",
        [
            ("scale_certificate", ((H, (1, 0)), (H.inverse(), (-1, 1))), "positive-scale certificate"),
            (
                "case_inverting_scale_certificate",
                ((-H, (1, 1)), (-H.inverse(), (-1, 2))),
                "inverting-scale certificate",
            ),
        ],
    )
    def test_capped_certificate_search_is_inconclusive(self, monkeypatch, builder, generators, stage):
        """Test a scale group whose certificate search runs out of caps is not reported as a bare yes."""

        def exhausted(*args, **kwargs):
            raise ResourceError("no certificate within 0 doublings")

        monkeypatch.setattr(pipeline, builder, exhausted)
        decision = decide_group_problem(_inst(*generators))

        assert decision.tag is DecisionTag.INCONCLUSIVE
        assert decision.stage == stage
        assert decision.certificate is None

    def test_inconclusive_carries_stage(self):
        """Test capped-out matrix groupness surfaces as Inconclusive with a stage."""
        inst = _inst((S, (0, 0)), (U, (0, 0)))
        decision = decide_group_problem(inst, Caps(depth=0, closure=1))

        assert decision.tag is DecisionTag.INCONCLUSIVE
        assert decision.stage == "matrix-groupness"


class TestDecideIdentityProblem:
    """Tests for decide_identity_problem."""

    def test_torsion_subset(self):
        """Test {(S,0), (U,0)} reaches the identity through {(S,0)}."""
        inst = _inst((S, (0, 0)), (U, (0, 0)))
        decision = decide_identity_problem(inst)

        assert decision.is_group
        assert decision.subset == (1,)
        assert verify_identity_word(decision.certificate, inst.generators)

    def test_single_shear_absent(self):
        """Test a lone shear never reaches the identity."""
        decision = decide_identity_problem(_inst((U, (0, 0))))

        assert decision.tag is DecisionTag.NOT_GROUP
        assert decision.subset is None

    def test_neutral_generator(self):
        """Test (I, 0) as a generator is the identity itself."""
        decision = decide_identity_problem(_inst((I, (0, 0))))

        assert decision.is_group
        assert decision.subset == (1,)

    def test_certificate_renamed_into_full_alphabet(self):
        """Test a winning subset's certificate uses the original generator indices."""
        inst = _inst((U, (0, 1)), (H, (0, 0)), (U.inverse(), (1, -1)))
        decision = decide_identity_problem(inst)

        assert decision.subset == (1, 3)
        assert decision.certificate.letters == frozenset({1, 3})
        assert decision.certificate.k == 3
        assert verify_identity_word(decision.certificate, inst.generators)
        assert not verify_identity_certificate(decision.certificate, inst.generators)

    def test_subset_cap(self):
        """Test more generators than the subset cap raise a resource error."""
        inst = _inst((I, (1, 0)), (I, (-1, 0)))

        with pytest.raises(ResourceError):
            decide_identity_problem(inst, Caps(subset_cap=1))

    def test_report_lists_subset(self):
        """Test the identity report carries the 1-based subset."""
        decision = decide_identity_problem(_inst((U, (0, 0)), (S, (0, 0))))

        assert decision.to_report().subset == [2]


class TestCaseTrivial:
    """Tests for case_trivial."""

    def test_vectors(self):
        """Test plain vectors are accepted."""
        assert case_trivial([(2, 3), (-1, 0), (0, -1)]).is_group
        assert case_trivial([(1, 1), (-1, 1)]).tag is DecisionTag.NOT_GROUP

    def test_zero_vector(self):
        """Test a single zero translation is the identity."""
        decision = case_trivial([(0, 0)])

        assert decision.certificate == PowerWord(((1, 1),), 1)

    def test_rejects_matrix_parts(self):
        """Test an instance with a non-identity matrix part is refused."""
        with pytest.raises(InputError):
            case_trivial(_inst((U, (0, 0))))


class TestCaseCertificates:
    """Tests for the per-case certificate constructions."""

    def test_torsion_repeats_word(self):
        """Test the torsion word is the generator repeated to its order."""
        gens = [SA2Element(S, (1, 0))]
        certificate = case_torsion_certificate(PowerWord.letter(1, 1), 4, gens)

        assert certificate == PowerWord(((1, 4),), 1)
        assert verify_identity_certificate(certificate, gens)

    @pytest.mark.parametrize("order", [2, 5])
    def test_torsion_rejects_wrong_order(self, order):
        """Test orders outside the allowed set or not killing the matrix are refused."""
        with pytest.raises(InputError):
            case_torsion_certificate(PowerWord.letter(1, 1), order, [SA2Element(S, (0, 0))])

    def test_torsion_needs_full_image(self):
        """Test a word missing a generator is refused."""
        gens = [SA2Element(S, (0, 0)), SA2Element(U, (0, 0))]

        with pytest.raises(InputError):
            case_torsion_certificate(PowerWord.letter(1, 2), 4, gens)

    def test_twisted_inversion(self):
        """Test the twisted-inversion word evaluates to the identity."""
        gens = [SA2Element(T, (5, 7)), SA2Element(T.inverse(), (2, 3))]
        certificate = case_twisted_inversion_certificate(PowerWord.letter(1, 2), PowerWord.letter(2, 2), gens)

        assert certificate == PowerWord(((1, 2), (2, 3), (1, 2), (2, 1)), 2)
        assert verify_identity_certificate(certificate, gens)

    def test_twisted_inversion_rejects_scale(self):
        """Test a scale pair is refused by the twisted-inversion construction."""
        gens = [SA2Element(H, (0, 0)), SA2Element(H.inverse(), (0, 0))]

        with pytest.raises(InputError):
            case_twisted_inversion_certificate(PowerWord.letter(1, 2), PowerWord.letter(2, 2), gens)

    def test_inverting_scale_zero_offset(self):
        """Test an exact inverse pair gives the two-letter word."""
        gens = [SA2Element(-H, (0, 0)), SA2Element(-H.inverse(), (0, 0))]
        certificate = case_inverting_scale_certificate(PowerWord.letter(1, 2), PowerWord.letter(2, 2), gens)

        assert certificate == PowerWord(((1, 1), (2, 1)), 2)

    def test_inverting_scale_general(self):
        """Test a generic inverting-scale pair gets a verified certificate."""
        gens = [SA2Element(-H, (1, 1)), SA2Element(-H.inverse(), (-1, 2))]
        certificate = case_inverting_scale_certificate(PowerWord.letter(1, 2), PowerWord.letter(2, 2), gens)

        assert verify_identity_certificate(certificate, gens)

    def test_inverting_scale_needs_inverse(self):
        """Test the second word must invert the first matrix."""
        gens = [SA2Element(-H, (1, 1)), SA2Element(-H, (0, 0))]

        with pytest.raises(InputError):
            case_inverting_scale_certificate(PowerWord.letter(1, 2), PowerWord.letter(2, 2), gens)


def _random_conjugator(rng):
    result = I
    for _ in range(rng.randint(0, 4)):
        result = result @ rng.choice((U, U.inverse(), S, SL2(1, 0, 1, 1)))
    return result


def _random_translation(rng, bound=5):
    return (rng.randint(-bound, bound), rng.randint(-bound, bound))


class TestCertificateProperties:
    """Seeded checks of the closed-form certificates on random instances."""

    def test_twisted_inversion_word_on_random_pairs(self):
        """Test the twisted-inversion word is the identity for random conjugates and translations."""
        rng = random.Random(20)
        for _ in range(100):
            w = _random_conjugator(rng)
            matrix = w @ (-U.power(rng.randint(1, 3))) @ w.inverse()
            gens = [
                SA2Element(matrix, _random_translation(rng)),
                SA2Element(matrix.inverse(), _random_translation(rng)),
            ]
            certificate = case_twisted_inversion_certificate(PowerWord.letter(1, 2), PowerWord.letter(2, 2), gens)
            assert verify_identity_certificate(certificate, gens)

    @pytest.mark.parametrize(
        "matrix,order",
        [(-I, 2), (SL2(0, 1, -1, -1), 3), (S, 4), (SL2(1, 1, -1, 0), 6)],
    )
    def test_torsion_power_annihilates_translation(self, matrix, order):
        """Test (T, t)**m = (I, 0) for every torsion order and random t."""
        rng = random.Random(order)
        for _ in range(25):
            w = _random_conjugator(rng)
            gens = [SA2Element(w @ matrix @ w.inverse(), _random_translation(rng))]
            certificate = case_torsion_certificate(PowerWord.letter(1, 1), order, gens)
            assert certificate == PowerWord(((1, order),), 1)


class TestIdentityMonotonicity:
    """A reachable identity stays reachable when generators are added."""

    @pytest.mark.parametrize(
        "mix", ["trivial", "torsion", "twisted-inversion", "shear", "inverting-scale", "positive-scale"]
    )
    def test_superset_keeps_identity(self, mix):
        """Test nested instances: a positive answer on a prefix carries to the whole instance."""
        for seed in range(4):
            inst = random_instance(3, 2, mix, seed=seed)
            previous = None
            for size in range(1, inst.k + 1):
                prefix = inst.subset(range(size))
                decision = decide_identity_problem(prefix)
                if previous is not None and previous.is_group:
                    assert decision.is_group
                    assert decision.certificate is None or verify_identity_word(decision.certificate, prefix.generators)
                previous = decision
