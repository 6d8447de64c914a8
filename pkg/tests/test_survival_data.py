"""Tests for risk tables, category windows and Type 2 stopping."""

import random

import numpy as np
import pytest

from survtest.core.base import Observation, RiskTable
from survtest.core.exceptions import (
    InvalidInputError,
    NoObservableCategoriesError,
    QuantileNotAttainedError,
)
from survtest.core.survival_data import build_risk_table, category_range, type2_stop

from .conftest import D1_ROWS, make_observations, make_table


class TestObservation:
    """Tests for the Observation record."""

    def test_category_zero(self):
        """Test that category 0 cannot be constructed."""
        with pytest.raises(InvalidInputError, match="category must be ≥ 1"):
            Observation(time=0, event=True, group=0)

    def test_negative_group(self):
        """Test that group indices are non-negative."""
        with pytest.raises(InvalidInputError):
            Observation(time=1, event=True, group=-1)


class TestBuildRiskTable:
    """Tests for build_risk_table."""

    def test_d1_counts(self, d1_table):
        """Test hand-counted D1 arrays."""
        np.testing.assert_array_equal(d1_table.at_risk[0], [4, 3, 2, 0])
        np.testing.assert_array_equal(d1_table.events[0], [1, 1, 1, 0])
        np.testing.assert_array_equal(d1_table.censored[0], [0, 0, 1, 0])
        np.testing.assert_array_equal(d1_table.at_risk[1], [4, 3, 1, 1])
        np.testing.assert_array_equal(d1_table.events[1], [0, 2, 0, 1])
        np.testing.assert_array_equal(d1_table.pooled_at_risk, [8, 6, 3, 1])
        np.testing.assert_array_equal(d1_table.pooled_events, [1, 3, 1, 1])
        assert d1_table.n == 8
        assert d1_table.group_labels == ("A", "B")

    def test_group_extent(self, d1_table):
        """Test per-group sizes and largest observed categories."""
        np.testing.assert_array_equal(d1_table.sizes, [4, 4])
        np.testing.assert_array_equal(d1_table.group_max_cat, [3, 4])

    def test_unit_counts(self):
        """Test two groups with one event each at category 1."""
        table = make_table([("A", 1, 1), ("B", 1, 1)])
        np.testing.assert_array_equal(table.at_risk, [[1], [1]])
        np.testing.assert_array_equal(table.events, [[1], [1]])

    def test_all_censored(self):
        """Test that an all-censored sample has no events."""
        table = make_table([("A", 1, 0), ("A", 2, 0), ("B", 3, 0)])
        assert table.events.sum() == 0
        np.testing.assert_array_equal(table.censored.sum(axis=1), [2, 1])

    def test_conservation(self, d1_table):
        """Test V(ℓ) − V(ℓ+1) = ΔR(ℓ) + ΔRc(ℓ)."""
        at_risk = np.pad(d1_table.at_risk, ((0, 0), (0, 1)))
        np.testing.assert_array_equal(
            at_risk[:, :-1] - at_risk[:, 1:], d1_table.events + d1_table.censored
        )

    def test_at_risk_matches_raw_count(self):
        """Test V_p(ℓ) against a direct count of X ≥ ℓ on random samples."""
        rng = random.Random(3)
        for _ in range(20):
            rows = [(rng.choice("ABC"), rng.randint(1, 6), rng.randint(0, 1)) for _ in range(15)]
            observations, labels = make_observations(rows)
            table = build_risk_table(observations, labels)
            for p in range(table.n_groups):
                for l in range(1, table.max_cat + 1):
                    expected = sum(1 for o in observations if o.group == p and o.time >= l)
                    assert table.at_risk[p, l - 1] == expected

    def test_arrays_read_only(self, d1_table):
        """Test that table arrays cannot be modified."""
        with pytest.raises(ValueError):
            d1_table.at_risk[0, 0] = 99

    def test_empty_rejected(self):
        """Test that an empty observation list is rejected."""
        with pytest.raises(InvalidInputError):
            build_risk_table([])

    def test_single_group_rejected(self):
        """Test that one group is rejected."""
        with pytest.raises(InvalidInputError, match="at least 2 groups"):
            build_risk_table([Observation(time=1, event=True, group=0)])

    def test_truncated(self, d1_table):
        """Test restricting the table to the first categories."""
        short = d1_table.truncated(2)
        assert short.max_cat == 2
        np.testing.assert_array_equal(short.events, d1_table.events[:, :2])

    def test_default_labels(self):
        """Test that unlabeled tables get index labels."""
        table = RiskTable(at_risk=[[1], [1]], events=[[1], [1]], censored=[[0], [0]])
        assert table.group_labels == ("0", "1")


class TestCategoryRange:
    """Tests for category_range."""

    def test_d1(self, d1_table):
        """Test the D1 window."""
        window = category_range(d1_table)
        assert (window.d_lo, window.d_hi) == (1, 3)
        assert window.observable == (1, 2, 3)

    def test_single_category(self):
        """Test two groups with a single event each at category 5."""
        window = category_range(make_table([("A", 5, 1), ("B", 5, 1)]))
        assert (window.d_lo, window.d_hi, window.observable) == (5, 5, (5,))

    def test_first_event_removed(self):
        """Test that removing A's category-1 event moves d_lo to 2."""
        rows = [("A", 1, 0) if row == ("A", 1, 1) else row for row in D1_ROWS]
        assert category_range(make_table(rows)).d_lo == 2

    def test_no_events(self):
        """Test that an all-censored sample has no window."""
        with pytest.raises(NoObservableCategoriesError, match="no observable categories"):
            category_range(make_table([("A", 1, 0), ("B", 2, 0)]))

    def test_events_after_risk_set_exhausted(self):
        """Test that events past d_hi leave the window empty."""
        with pytest.raises(NoObservableCategoriesError):
            category_range(make_table([("A", 1, 0), ("B", 1, 0), ("B", 3, 1)]))

    def test_row_order_invariance(self):
        """Test that shuffling rows leaves the window unchanged."""
        rows = list(D1_ROWS)
        expected = category_range(make_table(rows))
        rng = random.Random(1)
        for _ in range(5):
            rng.shuffle(rows)
            observations, _ = make_observations(rows)
            assert category_range(build_risk_table(observations)) == expected


class TestType2Stop:
    """Tests for type2_stop."""

    @pytest.mark.parametrize("beta,expected", [(0.5, 2), (0.125, 1), (0.6, 3), (0.75, 4)])
    def test_d1(self, d1_table, beta, expected):
        """Test hand-counted D1 stopping categories."""
        assert type2_stop(d1_table, beta) == expected

    def test_not_attained(self, d1_table):
        """Test that an unreachable fraction is an error."""
        with pytest.raises(QuantileNotAttainedError, match="beta-quantile not attained"):
            type2_stop(d1_table, 0.99)

    @pytest.mark.parametrize("beta", [0.0, 1.0, -0.1, 1.5])
    def test_beta_out_of_range(self, d1_table, beta):
        """Test that beta must lie strictly inside (0, 1)."""
        with pytest.raises(InvalidInputError):
            type2_stop(d1_table, beta)
