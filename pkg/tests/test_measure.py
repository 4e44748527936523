"""Tests for exact numbers, interval sets, step functions and sources"""

from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

F = Fraction


class TestQuadIrrational:
    """Tests for exact multi-quadratic arithmetic"""

    def test_parse_and_format(self):
        """Test parsing common radical notations"""
        from src.measure.numbers import QuadIrrational, format_exact, parse_exact

        x = parse_exact("√2-1")
        assert x == QuadIrrational(-1, 1, 2)
        assert parse_exact("sqrt(2) - 1") == x
        assert parse_exact("(5-3√2)/2") == QuadIrrational(F(5, 2), F(-3, 2), 2)
        assert parse_exact(format_exact(parse_exact("5/2-3/2√2"))) == parse_exact("(5-3√2)/2")
        assert parse_exact("1/3") == F(1, 3)
        assert parse_exact("−1+√8") == QuadIrrational(-1, 2, 2)

    def test_radicals_cancel_to_fraction(self):
        """Test that cancelling radicals yields a Fraction"""
        from src.measure.numbers import parse_exact

        x = parse_exact("√2-1")
        y = parse_exact("2-√2")
        assert x + y == 1
        assert isinstance(x + y, Fraction)
        assert parse_exact("√2") * parse_exact("√2") == 2

    def test_division_and_inverse(self):
        """Test field division"""
        from src.measure.numbers import parse_exact

        x = parse_exact("√2-1")
        assert 1 / x == parse_exact("√2+1")
        mixed = parse_exact("1+√2+√3")
        assert mixed * (1 / mixed) == 1

    def test_comparisons(self):
        """Test exact ordering including mixed radicals"""
        from src.measure.numbers import parse_exact

        assert parse_exact("√2-1") > F(2, 5)
        assert parse_exact("√2-1") < F(1, 2)
        assert F(1, 2) > parse_exact("√2-1")
        assert parse_exact("√2+√3") < parse_exact("√10")
        assert parse_exact("√2+√3-√5") < parse_exact("√6") - 1

    def test_floor_and_fractional_part(self):
        """Test floor of irrational values"""
        from src.measure.numbers import exact_floor, frac_part, parse_exact

        assert exact_floor(parse_exact("3√2")) == 4
        assert exact_floor(parse_exact("-√2")) == -2
        assert frac_part(parse_exact("1+√2")) == parse_exact("√2-1")

    def test_json_round_trip(self):
        """Test JSON encoding of exact numbers"""
        from src.measure.numbers import exact_from_json, exact_to_json, parse_exact

        x = parse_exact("(5-3√2)/2")
        assert exact_to_json(x) == {"a": "5/2", "b": "-3/2", "d": 2}
        assert exact_to_json(F(1, 3)) == {"a": "1/3", "b": "0", "d": 1}
        multi = parse_exact("√2+√3")
        assert exact_from_json(exact_to_json(multi)) == multi

    def test_hash_matches_fraction(self):
        """Test that rational-valued instances hash like Fractions"""
        from src.measure.numbers import QuadIrrational

        assert hash(QuadIrrational(F(1, 2))) == hash(F(1, 2))

    def test_parse_errors(self):
        """Test malformed numbers"""
        from src.core.errors import ExactArithmeticError
        from src.measure.numbers import parse_exact

        with pytest.raises(ExactArithmeticError):
            parse_exact("1/0")
        with pytest.raises(ExactArithmeticError):
            parse_exact("(1+2")
        with pytest.raises(ExactArithmeticError):
            parse_exact("")

    @settings(max_examples=200, deadline=None)
    @given(
        st.fractions(min_value=-50, max_value=50, max_denominator=40),
        st.fractions(min_value=-50, max_value=50, max_denominator=40),
        st.fractions(min_value=-50, max_value=50, max_denominator=40),
        st.sampled_from([2, 3, 5, 6, 7]),
        st.sampled_from([2, 3, 5, 10]),
    )
    def test_sign_agrees_with_high_precision(self, a, b, c, d, e):
        """Test exact sign against 100-digit evaluation"""
        from src.measure.numbers import QuadIrrational, exact_sign

        x = QuadIrrational(a, b, d) + QuadIrrational(0, c, e)
        with mpmath.workdps(100):
            approx = mpmath.mpf(a.numerator) / a.denominator
            approx += mpmath.mpf(b.numerator) / b.denominator * mpmath.sqrt(d)
            approx += mpmath.mpf(c.numerator) / c.denominator * mpmath.sqrt(e)
            expected = (approx > 0) - (approx < 0)
        if abs(approx) > mpmath.mpf(10) ** -80:
            assert exact_sign(x) == expected


class TestIntervalSet:
    """Tests for interval set algebra"""

    def test_adjacent_merge(self):
        """Test that adjacent intervals merge"""
        from src.measure.intervals import interval_set

        s = interval_set([(0, F(1, 2)), (F(1, 2), F(3, 4))])
        assert s.intervals == ((F(0), F(3, 4)),)

    def test_empty(self):
        """Test the empty set"""
        from src.measure.intervals import interval_set

        s = interval_set([])
        assert not s
        assert s.measure == 0

    def test_irrational_endpoint(self):
        """Test disjoint intervals with a radical endpoint"""
        from src.measure.intervals import interval_set
        from src.measure.numbers import parse_exact

        s = interval_set([(0, "√2-1"), (F(1, 2), 1)])
        assert len(s) == 2
        assert s.measure == parse_exact("√2-1") + F(1, 2)

    def test_validation(self):
        """Test rejection of bad endpoints"""
        from src.core.errors import IntervalError
        from src.measure.intervals import interval_set

        with pytest.raises(IntervalError):
            interval_set([(0, F(3, 2))])
        with pytest.raises(IntervalError):
            interval_set([(F(1, 2), F(1, 4))])

    def test_set_operations(self):
        """Test union, intersection, difference and complement"""
        from src.measure.intervals import IntervalSet

        a = IntervalSet([(0, F(1, 2))])
        b = IntervalSet([(F(1, 4), F(3, 4))])
        assert (a | b).measure == F(3, 4)
        assert (a & b) == IntervalSet([(F(1, 4), F(1, 2))])
        assert (a - b) == IntervalSet([(0, F(1, 4))])
        assert a.complement() == IntervalSet([(F(1, 2), 1)])
        assert F(1, 4) in b and F(3, 4) not in b

    def test_take_and_split_measure(self):
        """Test carving by measure"""
        from src.measure.intervals import IntervalSet

        s = IntervalSet([(0, F(1, 4)), (F(1, 2), 1)])
        taken, rest = s.take_measure(F(1, 2))
        assert taken == IntervalSet([(0, F(1, 4)), (F(1, 2), F(3, 4))])
        assert rest == IntervalSet([(F(3, 4), 1)])
        parts = s.split_measure(3)
        assert [p.measure for p in parts] == [F(1, 4)] * 3

    def test_split_pieces_follows_order(self):
        """Test that pieces are filled in the order given, not left to right"""
        from src.measure.intervals import IntervalSet, split_pieces

        parts = split_pieces([(F(1, 2), 1), (0, F(1, 2))], 4)
        assert [p.measure for p in parts] == [F(1, 4)] * 4
        assert parts[0] == IntervalSet([(F(1, 2), F(3, 4))])
        assert parts[3] == IntervalSet([(F(1, 4), F(1, 2))])

    def test_split_pieces_straddles(self):
        """Test a share that spans two pieces"""
        from src.core.errors import IntervalError
        from src.measure.intervals import IntervalSet, split_pieces

        parts = split_pieces([(F(3, 4), 1), (0, F(1, 2))], 3)
        assert [p.measure for p in parts] == [F(1, 4)] * 3
        assert parts[1] == IntervalSet([(0, F(1, 4))])
        assert split_pieces([], 2) == [IntervalSet.empty()] * 2
        with pytest.raises(IntervalError):
            split_pieces([(0, 1)], 0)

    @settings(max_examples=100, deadline=None)
    @given(
        st.lists(st.tuples(st.fractions(0, 1, max_denominator=16), st.fractions(0, 1, max_denominator=16)), max_size=6),
        st.lists(st.tuples(st.fractions(0, 1, max_denominator=16), st.fractions(0, 1, max_denominator=16)), max_size=6),
    )
    def test_inclusion_exclusion(self, raw_a, raw_b):
        """Test measure(A∪B) + measure(A∩B) = measure(A) + measure(B)"""
        from src.measure.intervals import IntervalSet

        a = IntervalSet([(min(x, y), max(x, y)) for x, y in raw_a])
        b = IntervalSet([(min(x, y), max(x, y)) for x, y in raw_b])
        assert (a | b).measure + (a & b).measure == a.measure + b.measure
        assert (a - b).measure + (a & b).measure == a.measure


class TestStepFunction:
    """Tests for step functions"""

    def test_evaluate_half_open(self):
        """Test the half-open convention"""
        from src.measure.intervals import IntervalSet
        from src.measure.step_functions import StepFunction

        f = StepFunction.indicator(IntervalSet([(0, F(1, 2))]))
        assert f.evaluate(F(1, 4)) == 1
        assert f.evaluate(F(1, 2)) == 0

    def test_evaluate_irrational_breakpoint(self):
        """Test lookup against a radical breakpoint"""
        from src.measure.step_functions import step_function

        f = step_function([(0, "√2-1", 1), ("√2-1", 1, -1)])
        assert f.evaluate(F(2, 5)) == 1
        assert f.evaluate(F(1, 2)) == -1

    def test_norms(self):
        """Test L1, L2 and sup norms"""
        from src.measure.numbers import parse_exact
        from src.measure.step_functions import StepFunction, step_function

        f = step_function([(0, F(1, 2), F(1, 2)), (F(1, 2), 1, F(-1, 2))])
        assert f.lr_norm(1) == F(1, 2)
        assert f.lr_norm("inf") == F(1, 2)
        g = step_function([(0, F(1, 3), 2), (F(1, 3), 1, -1)])
        assert g.lr_norm(2) == parse_exact("√2")
        assert StepFunction.zero().lr_norm(3) == 0

    def test_norm_rejects_small_r(self):
        """Test that r < 1 is rejected"""
        from src.core.errors import ConfigError
        from src.measure.step_functions import StepFunction

        with pytest.raises(ConfigError):
            StepFunction.zero().lr_norm(F(1, 2))

    def test_homogeneity(self):
        """Test ‖c·f‖ = |c|·‖f‖"""
        from src.measure.step_functions import step_function

        f = step_function([(0, F(1, 3), 2), (F(1, 3), F(1, 2), -1)])
        for r in (1, "inf"):
            assert f.scale(-3).lr_norm(r) == 3 * f.lr_norm(r)

    def test_pieces_and_integral(self):
        """Test grouping by value and exact integration"""
        from src.measure.step_functions import step_function

        f = step_function([(0, F(1, 4), 1), (F(1, 4), F(1, 2), 2), (F(1, 2), F(3, 4), 1)])
        values = sorted(v for _, v in f.pieces)
        assert values == [1, 2]
        assert f.integral() == sum(v * s.measure for s, v in f.pieces)
        assert f.integral() == 1

    def test_arithmetic(self):
        """Test pointwise sum over mismatched breakpoints"""
        from src.measure.step_functions import step_function

        f = step_function([(0, F(1, 2), 1)])
        g = step_function([(F(1, 4), 1, 1)])
        h = f + g
        assert h.evaluate(F(1, 8)) == 1
        assert h.evaluate(F(3, 8)) == 2
        assert h.evaluate(F(7, 8)) == 1
        assert (f - f) == f.scale(0)


class TestFunctionSource:
    """Tests for refinable sources"""

    def test_identity_staircase(self):
        """Test f(x)=x refined below oscillation 1/8"""
        from src.measure.sources import affine_source

        src = affine_source(1, 0, base_bins=4)
        f = src.refine(F(1, 8))
        assert len(f) == 16
        assert f.evaluate(0) == F(1, 32)

    def test_step_source_coarse(self):
        """Test that a coarse request returns the base"""
        from src.core.errors import PreconditionError
        from src.measure.sources import step_source
        from src.measure.step_functions import step_function

        base = step_function([(0, F(1, 2), 1)])
        src = step_source(base)
        assert src.refine(F(1, 2)) is base
        with pytest.raises(PreconditionError):
            src.refine(F(1, 8))

    def test_square_l1_distance(self):
        """Test midpoint refinement of x**2"""
        from src.measure.sources import square_source

        f = square_source().refine(F(1, 16))
        assert len(f) == 64
        # |x**2 - v| on a bin is at most the oscillation hi**2 - lo**2
        bound = sum((hi * hi - lo * lo) * (hi - lo) for lo, hi, _ in f.atoms)
        assert bound <= F(1, 16)
        assert all(lo * lo <= v < hi * hi for lo, hi, v in f.atoms if lo > 0)

    def test_refinement_oscillation_below_delta(self):
        """Test that every refined bin oscillates by less than the requested resolution"""
        from src.measure.sources import affine_source, square_source

        f = square_source().refine(F(1, 16))
        assert all(hi * hi - lo * lo < F(1, 16) for lo, hi, _ in f.atoms)
        g = affine_source(4, -2).refine(F(1, 8))
        assert len(g) == 64
        assert all(4 * (hi - lo) < F(1, 8) for lo, hi, _ in g.atoms)

    def test_lipschitz_bounds(self):
        """Test the Lipschitz constants of the built-in families"""
        from src.measure.sources import affine_source, square_source

        assert square_source().lipschitz == 2
        assert affine_source(-3, 1).lipschitz == 3
        assert affine_source(0, 5).bins_for(F(1, 8)) == 8

    def test_refinements_nest(self):
        """Test that finer refinements subdivide coarser ones"""
        from src.measure.sources import affine_source

        src = affine_source(2, -1)
        coarse, fine = src.refine(F(1, 8)), src.refine(F(1, 32))
        assert set(coarse.breakpoints()) <= set(fine.breakpoints()) | {F(0), F(1)}

    def test_exact_integral(self):
        """Test closed-form integrals"""
        from src.measure.intervals import IntervalSet
        from src.measure.sources import affine_source, square_source

        assert square_source().integral() == F(1, 3)
        assert affine_source(1, F(-1, 2)).integral() == 0
        assert affine_source().integral_over(IntervalSet([(0, F(1, 2))])) == F(1, 8)


class TestPiecewisePolynomial:
    """Tests for exact piecewise polynomial observables"""

    def test_integral_and_range(self):
        """Test exact integral and range of x - 1/2"""
        from src.measure.intervals import IntervalSet
        from src.measure.polynomials import PiecewisePolynomial

        f = PiecewisePolynomial.polynomial((F(-1, 2), 1))
        assert f.integral() == 0
        assert f.integral_over(IntervalSet([(0, F(1, 2))])) == F(-1, 8)
        assert f.range_over(IntervalSet([(F(1, 4), F(1, 2))])) == (F(-1, 4), 0)
        assert f.oscillation(IntervalSet.unit()) == 1

    def test_quadratic_vertex(self):
        """Test the vertex of a quadratic enters the range"""
        from src.measure.intervals import IntervalSet
        from src.measure.polynomials import PiecewisePolynomial

        f = PiecewisePolynomial.polynomial((0, -1, 1))
        assert f.range_over(IntervalSet.unit()) == (F(-1, 4), 0)

    def test_uncovered_part_counts_as_zero(self):
        """Test that gaps in the support contribute the value 0"""
        from src.measure.intervals import IntervalSet
        from src.measure.polynomials import PiecewisePolynomial

        f = PiecewisePolynomial([(F(1, 2), 1, (1,))])
        assert f.range_over(IntervalSet.unit()) == (0, 1)
        assert f.range_over(IntervalSet.empty()) is None

    def test_profile_and_place_invert(self):
        """Test that place undoes profile on a two-interval cell"""
        from src.measure.intervals import IntervalSet
        from src.measure.polynomials import PiecewisePolynomial

        f = PiecewisePolynomial.polynomial((0, 1))
        cell = IntervalSet([(0, F(1, 8)), (F(1, 2), F(5, 8))])
        p = f.profile(cell)
        assert p.evaluate(F(1, 16)) == F(1, 16)
        assert p.evaluate(F(3, 16)) == F(9, 16)
        assert p.place(cell) == f.restrict(cell)

    def test_compose_with_translation(self):
        """Test composition with a rotation by 1/4"""
        from src.measure.polynomials import PiecewisePolynomial
        from src.transforms.interval_map import PiecewiseTranslation

        f = PiecewisePolynomial.polynomial((0, 1))
        g = f.compose(PiecewiseTranslation.from_rotation(F(1, 4)))
        assert g.evaluate(F(1, 8)) == F(3, 8)
        assert g.evaluate(F(7, 8)) == F(1, 8)

    def test_window_position(self):
        """Test a window of x with prescribed integral"""
        from src.measure.polynomials import PiecewisePolynomial

        f = PiecewisePolynomial.polynomial((0, 1))
        u = f.window_position(F(0), F(1), F(1, 4), F(1, 16))
        # integral of x over [u, u + 1/4) is u/4 + 1/32
        assert u == F(1, 8)
        assert f.window_position(F(0), F(1), F(1, 4), F(1)) is None

    def test_from_source_and_step(self):
        """Test conversion of sources and step functions"""
        from src.measure.polynomials import as_polynomial
        from src.measure.sources import affine_source
        from src.measure.step_functions import step_function

        f = as_polynomial(affine_source(2, -1))
        assert f.evaluate(F(3, 4)) == F(1, 2)
        step = step_function([(0, F(1, 2), 3)])
        assert as_polynomial(step).to_step() == step

    def test_json_round_trip(self):
        """Test serialization of a quadratic piece"""
        from src.measure.polynomials import PiecewisePolynomial

        f = PiecewisePolynomial([(0, F(1, 3), (1, 0, F(1, 2)))])
        assert PiecewisePolynomial.from_json(f.to_json()) == f

    @settings(max_examples=30, deadline=None)
    @given(st.fractions(-1, 1, max_denominator=20), st.fractions(-1, 1, max_denominator=20), st.fractions(-1, 1, max_denominator=20))
    def test_translate_matches_evaluation(self, a, b, s):
        """Test translate(s) evaluates as f(x - s)"""
        from src.measure.polynomials import PiecewisePolynomial

        f = PiecewisePolynomial.polynomial((a, b))
        x = F(1, 3)
        assert f.translate(s).evaluate(x + s) == f.evaluate(x)
