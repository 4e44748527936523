"""Tests for Birkhoff sums, sweeps and transfer functions"""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

F = Fraction


def _half():
    from src.measure.intervals import IntervalSet
    from src.measure.step_functions import StepFunction

    return StepFunction.indicator(IntervalSet([(0, F(1, 2))]))


class TestBirkhoffSum:
    """Tests for exact orbit sums"""

    def test_trivial_cases(self):
        """Test the empty sum and the zero function"""
        from src.cocycle.birkhoff import birkhoff_sum
        from src.measure.step_functions import StepFunction
        from src.transforms.rotation import Rotation

        t = Rotation("√2-1")
        assert birkhoff_sum(t, _half(), 0, F(1, 3)) == 0
        assert birkhoff_sum(t, StepFunction.zero(), 7, F(1, 3)) == 0

    def test_direct_orbit(self):
        """Test against evaluating the five orbit points one at a time"""
        from src.cocycle.birkhoff import birkhoff_sum
        from src.measure.numbers import frac_part, parse_exact
        from src.transforms.rotation import Rotation

        alpha = parse_exact("√2-1")
        f = _half().shift_values(F(-1, 2))
        expected = sum((f.evaluate(frac_part(k * alpha)) for k in range(5)), F(0))
        assert birkhoff_sum(Rotation(alpha), f, 5, 0) == expected

    def test_partial_map_undefined(self):
        """Test orbits leaving the defined region of a machine"""
        from src.cocycle.birkhoff import birkhoff_sum
        from src.core.errors import UndefinedPointError
        from src.transforms.rank_one import RankOneMachine

        m = RankOneMachine.odometer(2, 2)
        with pytest.raises(UndefinedPointError):
            birkhoff_sum(m, _half(), 6, 0)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 8), st.integers(0, 8), st.fractions(0, 1, max_denominator=40))
    def test_cocycle_identity(self, n, m, x):
        """Test S_{n+m} f(x) = S_n f(x) + S_m f(tau^n x)"""
        from src.cocycle.birkhoff import birkhoff_sum
        from src.transforms.rotation import Rotation

        if x >= 1:
            return
        t = Rotation("√2-1")
        f = _half().shift_values(F(-1, 2))
        y = x
        for _ in range(n):
            y = t.apply(y)
        assert birkhoff_sum(t, f, n + m, x) == birkhoff_sum(t, f, n, x) + birkhoff_sum(t, f, m, y)

    def test_simplex_states(self):
        """Test sums along simplex orbits use the decrement index"""
        from src.cocycle.birkhoff import birkhoff_sum
        from src.transforms.simplex import SimplexTranslation

        t = SimplexTranslation(["√2-1", "√3-1", "3-√2-√3"])
        values = [1, 0, 0]
        state = t.origin()
        expected = 0
        for s in t.orbit(state, 12):
            expected += 1 if t.decrement_index(s) == 0 else 0
        assert birkhoff_sum(t, values, 12, state) == expected


class TestNormSweep:
    """Tests for cocycle_norm_sweep"""

    def test_telescoping_bounded(self):
        """Test that an exact coboundary stays below 2‖h‖_∞"""
        from src.cocycle.birkhoff import cocycle_norm_sweep
        from src.transforms.rotation import Rotation

        t = Rotation("√2-1")
        h = _half()
        f = h - h.compose(t.interval_map)
        report = cocycle_norm_sweep(t, f, "inf", 40, transfer_bound=2 * h.sup_norm())
        assert [e.n for e in report.entries] == list(range(1, 41))
        assert all(e.norm <= 2 for e in report.entries)
        assert report.verdict.kind == "bounded"
        assert str(report.verdict) == "bounded(2)"

    def test_constant_grows(self):
        """Test the growing verdict for S_n 1 = n"""
        from src.cocycle.birkhoff import cocycle_norm_sweep
        from src.measure.step_functions import StepFunction
        from src.transforms.rotation import Rotation

        report = cocycle_norm_sweep(Rotation("√2-1"), StepFunction.constant(1), 1, 20)
        assert [e.norm for e in report.entries] == list(range(1, 21))
        assert report.verdict.kind == "growing"
        assert report.verdict.slope == pytest.approx(1.0)

    def test_zero_is_inconclusive_without_transfer(self):
        """Test that zero norms give no growth fit"""
        from src.cocycle.birkhoff import cocycle_norm_sweep
        from src.measure.step_functions import StepFunction
        from src.transforms.rotation import Rotation

        report = cocycle_norm_sweep(Rotation(F(1, 3)), StepFunction.zero(), "inf", 5)
        assert report.verdict.kind == "inconclusive"
        assert report.max_norm() == 0

    def test_l2_norm_exact(self):
        """Test exact L2 norms for a rational rotation"""
        from src.cocycle.birkhoff import cocycle_norm_sweep
        from src.measure.intervals import IntervalSet
        from src.measure.step_functions import StepFunction
        from src.transforms.rotation import Rotation

        f = StepFunction.indicator(IntervalSet([(0, F(1, 3))])).shift_values(F(-1, 3))
        report = cocycle_norm_sweep(Rotation(F(1, 3)), f, 2, 3)
        assert report.entries[2].norm == 0
        assert report.entries[0].norm**2 == F(2, 9)

    def test_sampled_fallback(self):
        """Test the switch to a sample grid above the piece ceiling"""
        from src.cocycle.birkhoff import cocycle_norm_sweep
        from src.config.settings import Settings
        from src.transforms.rotation import Rotation

        t = Rotation("√2-1")
        h = _half()
        f = h - h.compose(t.interval_map)
        cfg = Settings(max_exact_pieces=1, sample_count=64)
        report = cocycle_norm_sweep(t, f, "inf", 12, transfer_bound=2, settings=cfg)
        assert report.sampled
        assert report.notes
        assert len(report.entries) == 12
        assert all(e.norm <= 2 for e in report.entries)

    def test_conjugation_invariance(self):
        """Test norm lists under an interval rearrangement"""
        from src.cocycle.birkhoff import cocycle_norm_sweep
        from src.measure.intervals import IntervalSet
        from src.measure.step_functions import StepFunction
        from src.transforms.base import ExplicitMap
        from src.transforms.interval_map import PiecewiseTranslation
        from src.transforms.rotation import Rotation

        t = Rotation("√2-1")
        f = StepFunction.indicator(IntervalSet([(0, F(1, 3))]), 3).shift_values(-1)
        swap = PiecewiseTranslation([(0, F(1, 2), F(1, 2)), (F(1, 2), 1, F(-1, 2))])
        conj = ExplicitMap(swap.compose(t.interval_map).compose(swap))
        g = f.compose(swap)
        a = cocycle_norm_sweep(t, f, 1, 10)
        b = cocycle_norm_sweep(conj, g, 1, 10)
        assert a.norms == b.norms

    def test_rows(self):
        """Test the CSV row layout"""
        from src.cocycle.birkhoff import cocycle_norm_sweep
        from src.measure.step_functions import StepFunction
        from src.transforms.rotation import Rotation

        report = cocycle_norm_sweep(Rotation(F(1, 3)), StepFunction.constant(1), "inf", 2)
        assert list(report.rows()[0]) == ["n", "norm", "witness"]

    def test_large_simplex_sampled(self):
        """Test sampled sweeps for three coordinates"""
        from src.cocycle.birkhoff import cocycle_norm_sweep
        from src.transforms.simplex import SimplexTranslation

        t = SimplexTranslation(["√2-1", "√3-1", "3-√2-√3"])
        values = [1 - x for x in t.alphas]
        report = cocycle_norm_sweep(t, values, "inf", 15, samples=20)
        assert report.sampled
        assert report.sample_count == 20


class TestTightness:
    """Tests for the distributional bounds A_n"""

    def test_zero(self):
        """Test A_n = 0 for f = 0"""
        from src.cocycle.birkhoff import schmidt_tightness
        from src.measure.step_functions import StepFunction
        from src.transforms.rotation import Rotation

        report = schmidt_tightness(Rotation("√2-1"), StepFunction.zero(), F(1, 10), 6)
        assert all(a == 0 for _, a in report.entries)
        assert report.tight_candidate

    def test_coboundary_tight(self):
        """Test A_n <= 2‖h‖_∞ for a coboundary, both directions"""
        from src.cocycle.birkhoff import schmidt_tightness
        from src.transforms.rotation import Rotation

        t = Rotation("√2-1")
        h = _half()
        f = h - h.compose(t.interval_map)
        report = schmidt_tightness(t, f, F(1, 8), 20, two_sided=True)
        assert all(a <= 2 for _, a in report.entries)
        assert all(a <= 2 for _, a in report.backward)
        assert len(report.backward) == 20
        assert report.tight_candidate

    def test_monotone_in_eps(self):
        """Test that smaller eps gives larger bounds"""
        from src.cocycle.birkhoff import schmidt_tightness
        from src.measure.step_functions import StepFunction
        from src.transforms.rotation import Rotation

        t = Rotation("√2-1")
        f = _half().shift_values(F(-1, 2))
        coarse = schmidt_tightness(t, f, F(1, 2), 12)
        fine = schmidt_tightness(t, f, F(1, 20), 12)
        for (_, a), (_, b) in zip(coarse.entries, fine.entries):
            assert a <= b

    def test_linear_growth_not_tight(self):
        """Test that S_n 1 = n is flagged"""
        from src.cocycle.birkhoff import schmidt_tightness
        from src.measure.step_functions import StepFunction
        from src.transforms.rotation import Rotation

        report = schmidt_tightness(Rotation(F(1, 3)), StepFunction.constant(1), F(1, 4), 8)
        assert [a for _, a in report.entries] == list(range(1, 9))
        assert not report.tight_candidate

    def test_eps_range(self):
        """Test rejection of eps outside (0,1)"""
        from src.cocycle.birkhoff import schmidt_tightness
        from src.core.errors import ConfigError
        from src.measure.step_functions import StepFunction
        from src.transforms.rotation import Rotation

        with pytest.raises(ConfigError):
            schmidt_tightness(Rotation(F(1, 3)), StepFunction.zero(), 1, 3)


class TestCesaroTransfer:
    """Tests for the Cesàro transfer identity"""

    def test_n_one(self):
        """Test that n = 1 forces h = 0"""
        from src.cocycle.transfer import cesaro_transfer
        from src.transforms.rotation import Rotation

        result = cesaro_transfer(Rotation("√2-1"), _half(), 1)
        assert not result.h
        lhs, rhs = result.sides(Rotation("√2-1"), _half())
        assert not lhs and not rhs

    def test_rational_rotation(self):
        """Test the identity for alpha = 1/3 against pointwise evaluation"""
        from src.cocycle.transfer import cesaro_transfer
        from src.measure.intervals import IntervalSet
        from src.measure.step_functions import StepFunction
        from src.transforms.rotation import Rotation
        from src.utils.helpers import sample_points

        t = Rotation(F(1, 3))
        f = StepFunction.indicator(IntervalSet([(0, F(1, 3))])).shift_values(F(-1, 3))
        result = cesaro_transfer(t, f, 3)
        lhs, rhs = result.sides(t, f)
        assert lhs == rhs
        assert not result.average
        for x in sample_points(IntervalSet.unit(), 1000, 7):
            assert f.evaluate(x) - result.average.evaluate(x) == result.h.evaluate(x) - result.h.evaluate(
                t.apply(x)
            )

    @settings(max_examples=15, deadline=None)
    @given(st.integers(1, 12), st.fractions(0, 1, max_denominator=12))
    def test_identity_exact(self, n, cut):
        """Test f - A_n f = h - h∘tau exactly for irrational rotations"""
        from src.cocycle.transfer import cesaro_transfer
        from src.measure.intervals import IntervalSet
        from src.measure.step_functions import StepFunction
        from src.transforms.rotation import Rotation

        t = Rotation("√2-1")
        f = StepFunction.indicator(IntervalSet([(0, cut)]))
        lhs, rhs = cesaro_transfer(t, f, n).sides(t, f)
        assert lhs == rhs

    def test_partial_machine(self):
        """Test the identity on the region where the machine is deep enough"""
        from src.cocycle.transfer import cesaro_transfer
        from src.transforms.rank_one import RankOneMachine

        m = RankOneMachine.chacon(3)
        f = _half()
        result = cesaro_transfer(m, f, 4)
        lhs, rhs = result.sides(m, f)
        assert lhs == rhs
        assert result.region.measure < 1


class TestAlgebraicRewrite:
    """Tests for power, commuting and conjugate rewrites"""

    def test_power_one(self):
        """Test that n = 1 returns h itself"""
        from src.cocycle.transfer import algebraic_rewrite
        from src.transforms.rotation import Rotation

        result = algebraic_rewrite("power", _half(), Rotation("√2-1"), 1)
        assert result.transfers["tau"] == _half()
        assert result.exact

    def test_power_odometer(self):
        """Test H = h + h∘tau = 1 on the dyadic odometer"""
        from src.cocycle.transfer import algebraic_rewrite
        from src.measure.step_functions import StepFunction
        from src.transforms.rank_one import RankOneMachine

        m = RankOneMachine.odometer(2, 3)
        result = algebraic_rewrite("power", _half(), m, 2)
        big_h = result.transfers["tau"]
        assert big_h.restrict(m.domain) == StepFunction.constant(1, m.domain)
        assert not result.f
        assert result.exact

    def test_commuting_rotations(self):
        """Test both transfers for rotations by √2-1 and √3-1"""
        from src.cocycle.transfer import algebraic_rewrite
        from src.measure.intervals import IntervalSet
        from src.transforms.rotation import Rotation
        from src.utils.helpers import sample_points

        tau, sigma = Rotation("√2-1"), Rotation("√3-1")
        result = algebraic_rewrite("commuting", _half(), tau, sigma)
        assert result.exact
        k, g = result.transfers["tau"], result.transfers["sigma"]
        for x in sample_points(IntervalSet.unit(), 1000, 3):
            fx = result.f.evaluate(x)
            assert fx == k.evaluate(x) - k.evaluate(tau.apply(x))
            assert fx == g.evaluate(x) - g.evaluate(sigma.apply(x))

    def test_conjugate_pair(self):
        """Test the three-term transfer for tau sigma = sigma tau^2"""
        from src.cocycle.transfer import algebraic_rewrite
        from src.measure.intervals import IntervalSet
        from src.measure.step_functions import StepFunction
        from src.transforms.base import ExplicitMap
        from src.transforms.interval_map import PiecewiseTranslation
        from src.transforms.rotation import Rotation

        tau = Rotation(F(1, 3))
        sigma = ExplicitMap(
            PiecewiseTranslation(
                [(0, F(1, 3), 0), (F(1, 3), F(2, 3), F(1, 3)), (F(2, 3), 1, F(-1, 3))]
            )
        )
        h = StepFunction.indicator(IntervalSet([(0, F(1, 4))]))
        result = algebraic_rewrite("conjugate", h, tau, sigma)
        assert result.exact
        assert result.region == IntervalSet.unit()

    def test_relation_fails(self):
        """Test the sample-point relation check"""
        from src.cocycle.transfer import algebraic_rewrite
        from src.core.errors import PreconditionError
        from src.transforms.rotation import Rotation

        with pytest.raises(PreconditionError) as exc:
            algebraic_rewrite("conjugate", _half(), Rotation(F(1, 3)), Rotation("√2-1"))
        assert "witness" in exc.value.details

    def test_unknown_mode(self):
        """Test mode validation"""
        from src.cocycle.transfer import algebraic_rewrite
        from src.core.errors import ConfigError
        from src.transforms.rotation import Rotation

        with pytest.raises(ConfigError):
            algebraic_rewrite("square", _half(), Rotation(F(1, 3)), 2)


class TestVerifyCoboundary:
    """Tests for coboundary verification reports"""

    def test_exact_pair(self):
        """Test zero residual and the sweep bound"""
        from src.cocycle.transfer import verify_coboundary
        from src.transforms.rotation import Rotation

        t = Rotation("√2-1")
        h = _half()
        f = h - h.compose(t.interval_map)
        check = verify_coboundary(t, f, h, samples=200, n_max=20)
        assert check.max_residual == 0
        assert check.exact
        assert check.bound == 2
        assert check.within_bound

    def test_perturbed(self):
        """Test that a perturbation of delta on one piece shows up as delta"""
        from src.cocycle.transfer import verify_coboundary
        from src.measure.intervals import IntervalSet
        from src.measure.step_functions import StepFunction
        from src.transforms.rotation import Rotation

        t = Rotation("√2-1")
        h = _half()
        delta = F(1, 100)
        f = h - h.compose(t.interval_map) + StepFunction.indicator(IntervalSet([(0, F(1, 4))]), delta)
        check = verify_coboundary(t, f, h, samples=500)
        assert check.max_residual == pytest.approx(0.01)
        assert not check.exact
        assert check.exact_difference == StepFunction.indicator(IntervalSet([(0, F(1, 4))]), delta)

    def test_callables(self):
        """Test callable observables"""
        from src.cocycle.transfer import verify_coboundary
        from src.transforms.rotation import Rotation

        t = Rotation(F(1, 4))
        check = verify_coboundary(t, lambda x: F(-1, 4), lambda x: x, samples=100, n_max=3)
        assert check.max_residual > 0
        assert check.exact_difference is None
        assert check.sweep_max == pytest.approx(0.75)
