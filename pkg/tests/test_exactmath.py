"""Tests for exact quadratic-field and lattice arithmetic."""
from fractions import Fraction
from itertools import product
import random

import pytest
import sympy

from sa2_decide.errors import FieldContextError, InputError
from sa2_decide.exactmath import (
    Lattice,
    QuadNum,
    exact_sign,
    hnf,
    integer_kernel,
    lattice_saturation,
    qnum_inv,
    qnum_mul,
    qnum_sign,
    squarefree_core,
    strictly_positive_zero_combo,
)

GOLDEN_SQUARE = QuadNum(Fraction(3, 2), Fraction(1, 2), 5)


class TestSquarefreeCore:
    """Tests for squarefree_core."""

    @pytest.mark.parametrize("n,expected", [(20, (5, 2)), (12, (3, 2)), (7, (7, 1)), (32, (2, 4)), (45, (5, 3))])
    def test_split(self, n, expected):
        """Test n = root**2 * core."""
        assert squarefree_core(n) == expected

    def test_rejects_non_positive(self):
        """Test zero has no core."""
        with pytest.raises(InputError):
            squarefree_core(0)


class TestQuadNum:
    """Tests for QuadNum."""

    def test_golden_ratio_identity(self):
        """Test phi**2 == phi + 1."""
        phi = QuadNum(Fraction(1, 2), Fraction(1, 2), 5)
        assert phi * phi == phi + 1

    def test_inverse_of_scale_eigenvalue(self):
        """Test (3+sqrt5)/2 has inverse (3-sqrt5)/2."""
        inverse = GOLDEN_SQUARE.inverse()
        assert inverse == QuadNum(Fraction(3, 2), Fraction(-1, 2), 5)
        assert GOLDEN_SQUARE * inverse == 1
        assert GOLDEN_SQUARE.norm() == 1

    def test_negative_power(self):
        """Test x**-2 is the inverse of x**2."""
        assert GOLDEN_SQUARE**-2 * GOLDEN_SQUARE**2 == 1

    @pytest.mark.parametrize(
        "value,sign",
        [
            (QuadNum(3, -1, 5), 1),
            (QuadNum(2, -1, 5), -1),
            (QuadNum(-3, 1, 5), -1),
            (QuadNum(0, -1, 2), -1),
            (QuadNum(0, 0, 2), 0),
        ],
    )
    def test_exact_sign(self, value, sign):
        """Test signs agree with an independent symbolic evaluation."""
        assert value.sign() == sign
        symbolic = sympy.Rational(value.p) + sympy.Rational(value.q) * sympy.sqrt(value.d)
        assert sympy.sign(symbolic) == sign

    def test_ordering(self):
        """Test comparison goes through the exact sign."""
        assert QuadNum(2, -1, 5) < 0 < QuadNum(3, -1, 5)
        assert GOLDEN_SQUARE > 2

    def test_rational_embeds_in_any_field(self):
        """Test a rational element combines with another field."""
        assert QuadNum(1, 0, 3) + QuadNum(0, 1, 2) == QuadNum(1, 1, 2)

    def test_mixed_fields_raise(self):
        """Test combining sqrt2 and sqrt3 raises."""
        with pytest.raises(FieldContextError):
            QuadNum(1, 1, 2) + QuadNum(0, 1, 3)
        with pytest.raises(FieldContextError):
            qnum_mul(QuadNum(1, 1, 2), QuadNum(1, 1, 3))

    def test_square_parameter_rejected(self):
        """Test d must be a nonsquare."""
        with pytest.raises(InputError):
            QuadNum(1, 1, 4)

    def test_float_is_display_only(self):
        """Test float conversion approximates the value."""
        assert abs(float(GOLDEN_SQUARE) - 2.6180339887) < 1e-9

    def test_exact_sign_of_rationals(self):
        """Test exact_sign on plain numbers."""
        assert exact_sign(-3) == -1
        assert exact_sign(Fraction(1, 7)) == 1
        assert exact_sign(0) == 0


class TestLattices:
    """Tests for hnf, integer_kernel and lattice_saturation."""

    def test_hnf_and_transform(self):
        """Test the HNF basis and that transform rows map onto it."""
        vectors = [(2, 0), (0, 3), (4, 6)]
        lattice, transform = hnf(vectors)
        assert lattice.basis == ((2, 0), (0, 3))
        for row, target in zip(transform, list(lattice.basis) + [(0, 0)]):
            combo = tuple(sum(t * v[c] for t, v in zip(row, vectors)) for c in range(2))
            assert combo == target

    def test_hnf_transform_is_unimodular(self):
        """Test det(transform) = +-1 using sympy as an independent check."""
        _, transform = hnf([(3, 5), (7, 2), (1, 1)])
        assert abs(sympy.Matrix(transform).det()) == 1

    def test_integer_kernel(self):
        """Test the relation lattice of (2,0), (0,3), (4,6)."""
        assert integer_kernel([(2, 0), (0, 3), (4, 6)]) == ((2, 2, -1),)

    def test_integer_kernel_trivial(self):
        """Test independent vectors have no relations."""
        assert integer_kernel([(1, 0), (0, 1)]) == ()

    def test_coordinates_and_membership(self):
        """Test membership in 2Z x 3Z."""
        lattice = Lattice(((2, 0), (0, 3)), 2)
        assert lattice.coordinates((4, 9)) == (2, 3)
        assert (1, 0) not in lattice
        assert (0, -3) in lattice

    def test_saturation(self):
        """Test the saturation of Z(2, 4) is Z(1, 2)."""
        assert lattice_saturation(Lattice(((2, 4),), 2)).basis == ((1, 2),)

    def test_saturation_of_saturated(self):
        """Test a saturated lattice is its own saturation."""
        lattice = Lattice(((1, 1),), 2)
        assert lattice_saturation(lattice).basis == lattice.basis

    def test_full_lattice(self):
        """Test Z^3 contains everything."""
        assert (5, -7, 11) in Lattice.full(3)


class TestStrictlyPositiveZeroCombo:
    """Tests for strictly_positive_zero_combo."""

    @staticmethod
    def _sum(n, vectors):
        return tuple(sum(c * v[r] for c, v in zip(n, vectors)) for r in range(len(vectors[0])))

    def test_opposite_pair(self):
        """Test (1,0) and (-1,0) cancel with (1,1)."""
        assert strictly_positive_zero_combo([(1, 0), (-1, 0)]) == (1, 1)

    @pytest.mark.parametrize(
        "vectors",
        [[(2, 3), (-1, 0), (0, -1)], [(1, 0), (0, 1), (-1, -1)], [(3, 1), (-1, 2), (-2, -3)]],
    )
    def test_feasible(self, vectors):
        """Test feasible systems return a positive integer solution."""
        n = strictly_positive_zero_combo(vectors)
        assert n is not None
        assert all(isinstance(x, int) and x > 0 for x in n)
        assert self._sum(n, vectors) == (0, 0)

    @pytest.mark.parametrize("vectors", [[(1, 0), (0, 1)], [(1, 1), (-1, 1)], [(1, 2)]])
    def test_infeasible(self, vectors):
        """Test vectors inside an open halfplane have no solution."""
        assert strictly_positive_zero_combo(vectors) is None

    def test_zero_vector(self):
        """Test the zero vector alone is its own combination."""
        assert strictly_positive_zero_combo([(0, 0)]) == (1,)

    def test_rational_vectors(self):
        """Test rational input is scaled to integers."""
        assert strictly_positive_zero_combo([(Fraction(1, 2),), (-1,)]) == (2, 1)

    def test_empty_input(self):
        """Test the empty list is rejected."""
        with pytest.raises(InputError):
            strictly_positive_zero_combo([])

    def test_infeasible_pair_with_matching_first_row(self):
        """Test a pair whose x-components cancel but whose y-components share a sign."""
        assert strictly_positive_zero_combo([(96, -408), (-936, -1224)]) is None

    def test_infeasible_with_three_vectors_in_a_halfplane(self):
        """Test vectors with positive y-components but x-components of both signs."""
        assert strictly_positive_zero_combo([(5, 1), (-7, 2), (0, 3)]) is None


def _exhaustive_combo(vectors, bound=8):
    dim = len(vectors[0])
    for n in product(range(1, bound + 1), repeat=len(vectors)):
        if all(sum(c * v[r] for c, v in zip(n, vectors)) == 0 for r in range(dim)):
            return n
    return None


def _random_quad(rng, d):
    return QuadNum(Fraction(rng.randint(-9, 9), rng.randint(1, 4)), Fraction(rng.randint(-9, 9), rng.randint(1, 4)), d)


class TestExactProperties:
    """Seeded algebraic properties of the exact arithmetic."""

    @pytest.mark.parametrize("d", [2, 3, 5, 13])
    def test_field_axioms_on_random_triples(self, d):
        """Test associativity, commutativity, distributivity and inverses in Q(sqrt(d))."""
        rng = random.Random(d)
        for _ in range(40):
            x, y, z = (_random_quad(rng, d) for _ in range(3))
            assert (x + y) + z == x + (y + z)
            assert qnum_mul(qnum_mul(x, y), z) == qnum_mul(x, qnum_mul(y, z))
            assert qnum_mul(x, y) == qnum_mul(y, x)
            assert qnum_mul(x, y + z) == qnum_mul(x, y) + qnum_mul(x, z)
            if x:
                assert qnum_mul(x, qnum_inv(x)) == 1

    @pytest.mark.parametrize("d", [2, 5, 7])
    def test_sign_is_multiplicative(self, d):
        """Test sign(xy) = sign(x) sign(y) on random pairs."""
        rng = random.Random(100 + d)
        for _ in range(60):
            x, y = _random_quad(rng, d), _random_quad(rng, d)
            assert qnum_sign(qnum_mul(x, y)) == qnum_sign(x) * qnum_sign(y)

    def test_zero_combo_agrees_with_exhaustive_search(self):
        """Test the solver against brute force over {1..8}^K for K <= 4 and dimension <= 3."""
        rng = random.Random(31)
        for trial in range(60):
            k, dim = rng.randint(2, 4), rng.randint(1, 3)
            vectors = [tuple(rng.randint(-3, 3) for _ in range(dim)) for _ in range(k)]
            if trial % 2:
                n = [rng.randint(1, 8) for _ in range(k - 1)]
                vectors[-1] = tuple(-sum(c * v[r] for c, v in zip(n, vectors[:-1])) for r in range(dim))

            found = strictly_positive_zero_combo(vectors)
            brute = _exhaustive_combo(vectors)

            if brute is not None:
                assert found is not None, vectors
            if found is not None:
                assert all(c > 0 for c in found)
                assert all(sum(c * v[r] for c, v in zip(found, vectors)) == 0 for r in range(dim)), vectors
