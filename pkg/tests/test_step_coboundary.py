"""Tests for step-function classification and the three coboundary builders"""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

F = Fraction


def _step(*pieces):
    """Step function from consecutive (width, value) pairs starting at 0"""
    from src.measure.numbers import as_exact
    from src.measure.step_functions import StepFunction

    atoms = []
    lo = F(0)
    for width, value in pieces:
        hi = lo + as_exact(width)
        atoms.append((lo, hi, value))
        lo = hi
    return StepFunction(atoms)


def _torus_example():
    return _step(("√2-1", "2-√2"), ("2-√2", "1-√2"))


def _mixed_example():
    return _step(("√2-1", 1), ("(√2-1)/2", -2), ("(5-3*√2)/2", 0))


def _intervals():
    return st.lists(st.fractions(0, 1, max_denominator=30), min_size=2, max_size=6).map(
        lambda xs: sorted(set(x for x in xs if x <= 1))
    )


def _as_set(points):
    from src.measure.intervals import IntervalSet

    return IntervalSet([(a, b) for a, b in zip(points[::2], points[1::2]) if a < b])


class TestClassification:
    """Tests for the arithmetic case split"""

    def test_all_rational(self):
        """Test measures (1/3, 2/3)"""
        from src.step_coboundary import ALL_RATIONAL, classify_step_function

        result = classify_step_function(_step((F(1, 3), 2), (F(2, 3), -1)))
        assert result.case == ALL_RATIONAL
        assert result.measures == [F(1, 3), F(2, 3)]
        assert result.common_denominator == 3

    def test_independent(self):
        """Test measures (√2-1, 2-√2)"""
        from src.step_coboundary import INDEPENDENT, classify_step_function

        result = classify_step_function(_torus_example())
        assert result.case == INDEPENDENT
        assert result.relations == []

    def test_mixed_relation(self):
        """Test the relation beta_2 = beta_1 / 2 is found"""
        from src.step_coboundary import MIXED, classify_step_function

        result = classify_step_function(_mixed_example())
        assert result.case == MIXED
        relation = result.relation
        assert relation is not None
        assert relation.dependent == 1
        assert relation.coefficients == {0: F(1, 2)}
        assert relation.homogeneous

    def test_zero_set_is_a_piece(self):
        """Test the zero level set counts as a piece"""
        from src.step_coboundary import step_pieces

        pieces = step_pieces(_mixed_example())
        assert len(pieces) == 3
        assert pieces[-1].value == 0

    def test_rejects_nonzero_mean(self):
        """Test mean-zero is required"""
        from src.core.errors import PreconditionError
        from src.step_coboundary import classify_step_function

        with pytest.raises(PreconditionError):
            classify_step_function(_step((F(1, 2), 1), (F(1, 2), 0)))

    def test_no_common_denominator_for_irrational(self):
        """Test the odometer denominator is refused for irrational measures"""
        from src.core.errors import PreconditionError
        from src.step_coboundary import classify_step_function

        with pytest.raises(PreconditionError):
            classify_step_function(_torus_example()).common_denominator


class TestTorusCoboundary:
    """Tests for the simplex translation construction"""

    def test_bound(self):
        """Test the certified bound 2m sum|a_j| = 4"""
        from src.step_coboundary import build_torus_coboundary

        result = build_torus_coboundary(_torus_example())
        assert result.m == 2
        assert result.bound == 4

    def test_transfer_identity_on_states(self):
        """Test f = h - h∘tau exactly along an orbit"""
        from src.step_coboundary import build_torus_coboundary

        result = build_torus_coboundary(_torus_example())
        assert result.identity_defect(200) == 0

    def test_sweep_bounded(self):
        """Test the sweep stays below the certified bound"""
        from src.step_coboundary import build_torus_coboundary

        result = build_torus_coboundary(_torus_example())
        report = result.sweep(40)
        assert report.verdict.kind == "bounded"
        assert report.max_norm() < 4

    def test_transported_map(self):
        """Test f itself has bounded sums under the transported translation"""
        from src.cocycle.birkhoff import cocycle_norm_sweep
        from src.step_coboundary import build_torus_coboundary

        f = _torus_example()
        result = build_torus_coboundary(f)
        t = result.transported()
        assert t.is_total
        report = cocycle_norm_sweep(t, f, "inf", 30, transfer_bound=result.bound)
        assert report.verdict.kind == "bounded"

    def test_zero_function(self):
        """Test f = 0 gives h = 0 and bound 0"""
        from src.measure.step_functions import StepFunction
        from src.step_coboundary import build_torus_coboundary

        result = build_torus_coboundary(StepFunction.zero())
        assert result.bound == 0
        assert result.identity_defect(10) == 0

    def test_three_pieces(self):
        """Test a two-dimensional torus with sampled states"""
        from src.measure.numbers import parse_exact
        from src.step_coboundary import build_torus_coboundary

        b1, b2, b3 = parse_exact("√2-1"), parse_exact("√3-1"), parse_exact("3-√2-√3")
        # a_3 chosen so the mean vanishes
        a3 = -(b1 - b2) / b3
        f = _step((b1, 1), (b2, -1), (b3, a3))
        result = build_torus_coboundary(f)
        assert result.m == 3
        assert result.bound == 6 * (2 + abs(a3))
        assert result.identity_defect(100) == 0
        report = result.sweep(60, samples=16)
        assert report.sampled
        assert report.verdict.kind == "bounded"

    def test_wrong_case(self):
        """Test rational measures are refused"""
        from src.core.errors import PreconditionError
        from src.step_coboundary import build_torus_coboundary

        with pytest.raises(PreconditionError):
            build_torus_coboundary(_step((F(1, 2), 1), (F(1, 2), -1)))

    def test_serialization(self):
        """Test the certificate names the bound"""
        from src.step_coboundary import build_torus_coboundary

        data = build_torus_coboundary(_torus_example()).to_json()
        assert data["transform"]["kind"] == "simplex"
        assert data["certificate"]["bound"] == {"a": "4", "b": "0", "d": 1}


class TestRationalCoboundary:
    """Tests for the odometer construction"""

    def test_thirds(self):
        """Test q=3 and level values (0, -2, -1)"""
        from src.step_coboundary import build_rational_coboundary

        result = build_rational_coboundary(_step((F(1, 3), 2), (F(2, 3), -1)), stages=3)
        assert result.q == 3
        assert result.g_levels == [0, -2, -1]
        assert result.machine.height == 81
        assert result.exact

    def test_coverage_grows(self):
        """Test the checked region is all but the top level"""
        from src.step_coboundary import build_rational_coboundary

        result = build_rational_coboundary(_step((F(1, 3), 2), (F(2, 3), -1)), stages=2)
        for stage in result.stages:
            assert stage.coverage == 1 - F(1, stage.height)

    def test_dyadic(self):
        """Test 1_[0,1/2) - 1_[1/2,1) on the dyadic odometer"""
        from src.step_coboundary import build_rational_coboundary

        result = build_rational_coboundary(_step((F(1, 2), 1), (F(1, 2), -1)), stages=4)
        assert result.q == 2
        assert result.g_levels == [0, -1]
        assert result.exact
        assert [s.cuts for s in result.machine.recipe] == [2, 2, 2, 2]

    def test_dyadic_eigenvalue(self):
        """Test the machine has eigenvalue -1"""
        from src.step_coboundary import build_rational_coboundary

        result = build_rational_coboundary(_step((F(1, 2), 1), (F(1, 2), -1)), stages=3)
        check = result.eigenvalue_check(samples=64)
        assert check.passed
        assert check.constant == F(1, 2)
        assert abs(check.eigenvalue + 1) < 1e-12

    def test_third_root_of_unity(self):
        """Test p(E) = 1/3 gives exp(2 pi i / 3)"""
        import mpmath

        from src.step_coboundary import build_rational_coboundary

        result = build_rational_coboundary(_step((F(1, 3), 2), (F(2, 3), -1)), stages=2)
        check = result.eigenvalue_check(samples=64)
        assert check.passed
        assert check.rational and not check.trivial
        assert abs(check.eigenvalue - mpmath.expjpi(mpmath.mpf(2) / 3)) < 1e-12

    def test_zero_function(self):
        """Test f = 0 gives g = 0 on a height-one column"""
        from src.measure.step_functions import StepFunction
        from src.step_coboundary import build_rational_coboundary

        result = build_rational_coboundary(StepFunction.zero())
        assert result.q == 1
        assert result.machine.height == 1
        assert not result.g
        assert result.exact

    def test_levels_split_pieces(self):
        """Test each piece contributes q p(A_i) levels of width 1/q"""
        from src.step_coboundary import build_rational_coboundary

        f = _step((F(1, 4), 3), (F(1, 2), -1), (F(1, 4), -1))
        result = build_rational_coboundary(f, stages=1)
        assert result.q == 4
        assert all(level.measure == F(1, 4) for level in result.column)
        assert result.exact

    def test_wrong_case(self):
        """Test irrational measures are refused"""
        from src.core.errors import PreconditionError
        from src.step_coboundary import build_rational_coboundary

        with pytest.raises(PreconditionError):
            build_rational_coboundary(_torus_example())


class TestExtensionCoboundary:
    """Tests for the two-floor extension construction"""

    def test_construction_data(self):
        """Test alpha, D and the target floor measure"""
        from src.measure.intervals import IntervalSet
        from src.measure.numbers import parse_exact
        from src.step_coboundary import build_finite_extension_coboundary

        result = build_finite_extension_coboundary(_mixed_example())
        assert result.base_pieces == [0, 2]
        assert result.alphas[0] == parse_exact("(4*√2-2)/7")
        assert result.skyscraper == IntervalSet([(0, parse_exact("√2-1"))])
        assert result.target_measure == parse_exact("(2*√2-1)/7")
        assert result.extension is not None and result.extension.is_total

    def test_measure_mismatch_reported(self):
        """Test a skyscraper of the wrong measure is reported, not certified"""
        from src.step_coboundary import build_finite_extension_coboundary

        result = build_finite_extension_coboundary(_mixed_example())
        assert result.torus is None
        assert any("differs" in note for note in result.notes)
        data = result.to_json()
        assert data["certificate"]["skyscraper_criterion"] == "evidence, not certificate"

    def test_f_beta_sweep(self):
        """Test the skyscraper sums do not show power growth"""
        from src.step_coboundary import build_finite_extension_coboundary

        result = build_finite_extension_coboundary(_mixed_example())
        assert result.f_beta.integral() == 0
        report = result.sweep_f_beta(40)
        assert report.verdict.kind != "growing"
        assert "evidence, not certificate" in report.notes

    def test_lifted_function_mean_zero(self):
        """Test the lifted function is centered on the extension"""
        from src.step_coboundary import build_finite_extension_coboundary

        result = build_finite_extension_coboundary(_mixed_example())
        assert result.lifted().integral() == 0

    def test_independent_delegates(self):
        """Test no relation means the torus construction"""
        from src.step_coboundary import build_finite_extension_coboundary

        result = build_finite_extension_coboundary(_torus_example())
        assert result.delegated
        assert result.torus.bound == 4

    def test_rational_rejected(self):
        """Test all-rational inputs belong to the odometer"""
        from src.core.errors import PreconditionError
        from src.step_coboundary import build_finite_extension_coboundary

        with pytest.raises(PreconditionError):
            build_finite_extension_coboundary(_step((F(1, 2), 1), (F(1, 2), -1)))

    def test_skyscraper_set_negative_coefficient(self):
        """Test frac(-x) < 1/4 on [0,1)"""
        from src.measure.intervals import IntervalSet
        from src.step_coboundary import skyscraper_set

        assert skyscraper_set(F(-1), F(1, 4)) == IntervalSet([(F(3, 4), 1)])
        assert skyscraper_set(F(2), F(1, 4)).measure == F(1, 4)


class TestMeasurePreservation:
    """Tests that every constructed map preserves measure"""

    @settings(max_examples=40, deadline=None)
    @given(_intervals())
    def test_transported_translation(self, points):
        """Test the transported simplex translation on random sets"""
        from src.step_coboundary import build_torus_coboundary

        t = build_torus_coboundary(_torus_example()).transported()
        s = _as_set(points)
        assert t.pushforward(s).measure == s.measure

    @settings(max_examples=40, deadline=None)
    @given(_intervals())
    def test_odometer_machine(self, points):
        """Test the odometer on random sets inside its defined region"""
        from src.step_coboundary import build_rational_coboundary

        machine = build_rational_coboundary(_step((F(1, 3), 2), (F(2, 3), -1)), stages=2).machine
        s = _as_set(points) & machine.domain
        assert machine.pushforward(s).measure == s.measure

    @settings(max_examples=40, deadline=None)
    @given(_intervals())
    def test_extension(self, points):
        """Test the two-floor extension on random sets"""
        from src.step_coboundary import build_finite_extension_coboundary

        ext = build_finite_extension_coboundary(_mixed_example()).extension
        s = _as_set(points)
        assert ext.pushforward(s).measure == s.measure
