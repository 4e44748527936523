"""Tests for transformations, rank-one machines, extensions and towers"""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

F = Fraction


class TestPiecewiseTranslation:
    """Tests for the interval-map layer"""

    def test_rotation_map(self):
        """Test the two-branch rotation map"""
        from src.transforms.interval_map import PiecewiseTranslation

        t = PiecewiseTranslation.from_rotation(F(1, 3))
        assert t.apply(0) == F(1, 3)
        assert t.apply(F(5, 6)) == F(1, 6)
        assert t.inverse().apply(F(1, 6)) == F(5, 6)

    def test_compose_and_power(self):
        """Test composition against repeated application"""
        from src.transforms.interval_map import PiecewiseTranslation

        t = PiecewiseTranslation.from_rotation(F(2, 7))
        assert t.power(7) == PiecewiseTranslation.identity()
        assert t.power(3).apply(F(1, 10)) == t.apply(t.apply(t.apply(F(1, 10))))

    def test_match_sets(self):
        """Test order-preserving matching"""
        from src.measure.intervals import IntervalSet
        from src.transforms.interval_map import PiecewiseTranslation

        src = IntervalSet([(0, F(1, 4)), (F(1, 2), F(3, 4))])
        dst = IntervalSet([(F(1, 4), F(3, 4))])
        t = PiecewiseTranslation.match_sets(src, dst)
        assert t.pushforward(src) == dst
        assert t.apply(F(1, 2)) == F(1, 2)

    def test_pushforward_outside_domain(self):
        """Test that pushing a set through the undefined region fails"""
        from src.core.errors import UndefinedPointError
        from src.measure.intervals import IntervalSet
        from src.transforms.interval_map import PiecewiseTranslation

        t = PiecewiseTranslation([(0, F(1, 2), F(1, 2))])
        with pytest.raises(UndefinedPointError):
            t.pushforward(IntervalSet([(F(1, 4), F(3, 4))]))
        with pytest.raises(UndefinedPointError):
            t.apply(F(3, 4))


class TestRotation:
    """Tests for circle rotations"""

    def test_apply_irrational(self):
        """Test x -> x + alpha mod 1"""
        from src.measure.numbers import parse_exact
        from src.transforms.rotation import Rotation

        t = Rotation("√2-1")
        assert t.apply(0) == parse_exact("√2-1")
        assert t.apply(F(3, 4)) == parse_exact("√2-1") + F(3, 4) - 1

    def test_pushforward(self):
        """Test set images"""
        from src.measure.intervals import IntervalSet
        from src.transforms.rotation import Rotation

        t = Rotation(F(1, 3))
        assert t.pushforward(IntervalSet([(0, F(1, 3))])) == IntervalSet([(F(1, 3), F(2, 3))])
        assert t.pushforward(IntervalSet.empty()) == IntervalSet.empty()

    @settings(max_examples=50, deadline=None)
    @given(st.fractions(0, 1, max_denominator=50), st.fractions(0, 1, max_denominator=50), st.fractions(0, 1, max_denominator=50))
    def test_measure_preserved(self, a, b, x):
        """Test measure(pushforward(s)) = measure(s) and inverse round trip"""
        from src.measure.intervals import IntervalSet
        from src.transforms.rotation import Rotation

        t = Rotation("√2-1")
        s = IntervalSet([(min(a, b), max(a, b))])
        assert t.pushforward(s).measure == s.measure
        if x < 1:
            assert t.apply_inverse(t.apply(x)) == x


class TestSimplexTranslation:
    """Tests for the minimum-index simplex translation"""

    def test_step_rule(self):
        """Test one step from the origin"""
        from src.measure.numbers import parse_exact
        from src.transforms.simplex import SimplexTranslation

        t = SimplexTranslation(["√2-1", "2-√2"])
        assert t.step((F(0), F(0))) == (parse_exact("√2-1"), parse_exact("1-√2"))

    def test_coordinate_sum_conserved(self):
        """Test conservation of the coordinate sum"""
        from src.transforms.simplex import SimplexTranslation

        t = SimplexTranslation(["√2-1", "√3-1", "3-√2-√3"])
        for state in t.orbit(t.origin(), 50):
            assert sum(state, F(0)) == 0

    def test_inverse(self):
        """Test step_inverse undoes step"""
        from src.transforms.simplex import SimplexTranslation

        t = SimplexTranslation(["√2-1", "√3-1", "3-√2-√3"])
        for state in t.orbit(t.origin(), 20):
            assert t.step_inverse(t.step(state)) == state

    def test_planar_conjugacy(self):
        """Test that the point coordinate follows the rotation"""
        from src.transforms.simplex import SimplexTranslation

        t = SimplexTranslation(["√2-1", "2-√2"])
        state = t.origin()
        for _ in range(30):
            nxt = t.step(state)
            assert t.to_point(nxt) == t.apply(t.to_point(state))
            state = nxt

    def test_dynamical_sets(self):
        """Test that B_j has measure alpha_j and matches decrements"""
        from src.transforms.simplex import SimplexTranslation

        t = SimplexTranslation(["√2-1", "2-√2"])
        b = t.dynamical_sets()
        assert [s.measure for s in b] == list(t.alphas)
        state = t.origin()
        for _ in range(20):
            j = t.decrement_index(state)
            assert t.to_point(state) in b[j]
            state = t.step(state)

    def test_rejects_bad_weights(self):
        """Test validation of translation weights"""
        from src.core.errors import PreconditionError
        from src.transforms.simplex import SimplexTranslation

        with pytest.raises(PreconditionError):
            SimplexTranslation([F(1, 2), F(1, 3)])
        with pytest.raises(PreconditionError):
            SimplexTranslation(["√2-1", "√3-1", "3-√2-√3"]).build_interval_map()


class TestRankOneMachine:
    """Tests for cutting and stacking"""

    def test_dyadic_odometer(self):
        """Test the first odometer step"""
        from src.measure.intervals import IntervalSet
        from src.transforms.rank_one import RankOneMachine

        m = RankOneMachine.initial().cut_and_stack(2)
        assert m.height == 2
        assert m.apply(F(1, 4)) == F(3, 4)
        assert m.pushforward(IntervalSet([(0, F(1, 2))])) == IntervalSet([(F(1, 2), 1)])

    def test_top_level_undefined(self):
        """Test that the top level is outside the domain"""
        from src.core.errors import UndefinedPointError
        from src.transforms.rank_one import RankOneMachine

        m = RankOneMachine.odometer(2, 3)
        assert m.undefined_region == m.top
        with pytest.raises(UndefinedPointError):
            m.apply(m.top.lower)

    def test_chacon_heights(self):
        """Test h -> 3h + 1 under the Chacon recipe"""
        from src.transforms.rank_one import RankOneMachine

        heights = [RankOneMachine.chacon(k).height for k in range(4)]
        assert heights == [1, 4, 13, 40]
        m = RankOneMachine.chacon(3)
        assert m.column.measure + m.residual.measure == 1

    def test_insufficient_residual(self):
        """Test spacer requests beyond the residual"""
        from src.core.errors import InsufficientResidualError
        from src.transforms.rank_one import RankOneMachine

        with pytest.raises(InsufficientResidualError):
            RankOneMachine.initial().cut_and_stack(2, None, (1, 0))

    def test_extension_is_consistent(self):
        """Test that stacking keeps the old map where it was defined"""
        from src.transforms.rank_one import RankOneMachine

        old = RankOneMachine.chacon(2)
        new = old.cut_and_stack(3, None, (0, 1, 0))
        for lo, hi, _ in old.interval_map.branches:
            x = (lo + hi) / 2
            assert new.apply(x) == old.apply(x)

    def test_replay(self):
        """Test recipe replay reproduces the levels"""
        from src.transforms.rank_one import RankOneMachine

        m = RankOneMachine.chacon(3).cut_and_stack(2, (1, 0), (0, 0))
        again = RankOneMachine.from_json(m.to_json())
        assert again.levels_json() == m.levels_json()

    def test_ternary_periodicity(self):
        """Test orbits of the 3-adic odometer return mod 3^k"""
        from src.transforms.rank_one import RankOneMachine

        m = RankOneMachine.odometer(3, 3)
        x = m.levels[0].lower
        point = x
        for _ in range(9):
            point = m.apply(point)
        assert m.level_of(point) == 9


class TestFiniteExtension:
    """Tests for two-floor extensions"""

    def test_floor_moves(self):
        """Test climbing onto the skyscraper and coming back down"""
        from src.measure.intervals import IntervalSet
        from src.transforms.extension import FiniteExtension
        from src.transforms.rotation import Rotation

        ext = FiniteExtension(Rotation(F(1, 3)), IntervalSet([(0, F(1, 2))]))
        assert ext.scale == F(2, 3)
        y = ext.lift(F(1, 4), 0)
        up = ext.apply(y)
        assert ext.project(up) == (F(1, 4), 1)
        down = ext.apply(up)
        assert ext.project(down) == (F(7, 12), 0)
        assert ext.project(ext.apply(ext.lift(F(3, 4), 0))) == (F(1, 12), 0)

    def test_total_and_measure_preserving(self):
        """Test the extension map tiles [0,1)"""
        from src.measure.intervals import IntervalSet
        from src.transforms.extension import FiniteExtension
        from src.transforms.rotation import Rotation

        ext = FiniteExtension(Rotation("√2-1"), IntervalSet([(0, "√2-1")]))
        assert ext.is_total
        assert ext.interval_map.image == IntervalSet.unit()


class TestRokhlinTower:
    """Tests for tower extraction"""

    def test_odometer_full_column(self):
        """Test the native column as a tower"""
        from src.transforms.rank_one import RankOneMachine
        from src.transforms.towers import rokhlin_tower

        m = RankOneMachine.odometer(2, 4)
        tower = rokhlin_tower(m, 16, 0)
        assert tower.coverage == 1
        assert tower.verify(m)

    def test_rotation_tower(self):
        """Test the first-return tower for alpha = √2 - 1"""
        from src.transforms.rotation import Rotation
        from src.transforms.towers import rokhlin_tower

        t = Rotation("√2-1")
        tower = rokhlin_tower(t, 5, F(1, 4))
        assert tower.return_height == 12
        assert tower.height == 5
        assert tower.coverage >= F(3, 4)
        assert tower.verify(t)

    def test_height_one(self):
        """Test the trivial tower"""
        from src.transforms.rotation import Rotation
        from src.transforms.towers import rokhlin_tower

        assert rokhlin_tower(Rotation("√2-1"), 1, F(1, 4)).coverage == 1

    def test_machine_too_shallow(self):
        """Test towers taller than the machine"""
        from src.core.errors import MachineTooShallowError
        from src.transforms.rank_one import RankOneMachine
        from src.transforms.towers import rokhlin_tower

        with pytest.raises(MachineTooShallowError):
            rokhlin_tower(RankOneMachine.odometer(2, 2), 8, F(1, 10))
