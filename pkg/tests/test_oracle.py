"""Library estimators against brute-force sums on small samples."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from survtest.core.base import Observation, WeightSpec
from survtest.core.cvm import cvm_statistic, glr_field, y0_matrix
from survtest.core.exceptions import DegenerateCovarianceError, NoObservableCategoriesError
from survtest.core.logrank import LogRankState, logrank_test
from survtest.core.survival_data import build_risk_table, category_range

from .oracle import Oracle

WEIGHTS = [
    (WeightSpec.unit(), ("unit",)),
    (WeightSpec.tarone_ware(0.5), ("tw", 0.5)),
    (WeightSpec.fleming_harrington(0, 1), ("fh", 0.0, 1.0)),
    (WeightSpec.fleming_harrington(1, 0.5), ("fh", 1.0, 0.5)),
]


def compare(records, n_groups, weight, oracle_weight):
    oracle = Oracle(records, n_groups, oracle_weight)
    table = build_risk_table(
        [Observation(time=t, event=bool(e), group=g) for g, t, e in records],
        tuple(str(q) for q in range(n_groups)),
    )
    state = LogRankState.build(table, weight)
    categories = range(1, table.max_cat + 1)
    pairs = list(itertools.product(range(n_groups), repeat=2))

    expected_lr = [[oracle.lr(q, j) for j in categories] for q in range(n_groups)]
    np.testing.assert_allclose(state.lr, expected_lr, rtol=1e-10, atol=1e-13)
    for l in categories:
        expected_q = [[oracle.Q(k, r, l) for r in range(n_groups)] for k in range(n_groups)]
        np.testing.assert_allclose(state.increments[l - 1], expected_q, rtol=1e-10, atol=1e-13)
    for k, r in pairs:
        expected_gamma = [oracle.Gamma(k, r, j) for j in categories]
        np.testing.assert_allclose(state.gamma[:, k, r], expected_gamma, rtol=1e-10, atol=1e-13)

    window = oracle.window()
    if window is None:
        with pytest.raises(NoObservableCategoriesError):
            category_range(table)
        return
    found = category_range(table)
    assert (found.d_lo, found.d_hi, list(found.observable)) == (window[0], window[1], window[2])

    assert cvm_statistic(glr_field(state, found)) == pytest.approx(
        oracle.cvm(window[2]), rel=1e-10, abs=1e-15
    )
    np.testing.assert_allclose(
        y0_matrix(state, found).values, oracle.y0(window[2]), rtol=1e-10, atol=1e-15
    )

    try:
        result = logrank_test(table, weight)
    except DegenerateCovarianceError:
        return
    if result.rcond > 1e-6:
        assert result.statistic == pytest.approx(
            oracle.chi_square(window[1]), rel=1e-8, abs=1e-12
        )


def samples(n_groups, max_size):
    record = st.tuples(st.integers(0, n_groups - 1), st.integers(1, 4), st.integers(0, 1))
    anchors = st.tuples(*[
        st.tuples(st.just(q), st.integers(1, 4), st.integers(0, 1)) for q in range(n_groups)
    ])
    return st.builds(lambda a, rest: list(a) + rest, anchors, st.lists(record, max_size=max_size))


class TestOracleAgreement:
    """Randomized agreement on small samples."""

    @settings(max_examples=80, deadline=None)
    @given(records=samples(2, 6), weight=st.sampled_from(WEIGHTS))
    def test_two_groups(self, records, weight):
        """Test J = 2 samples of up to eight records."""
        compare(records, 2, *weight)

    @settings(max_examples=80, deadline=None)
    @given(records=samples(3, 6), weight=st.sampled_from(WEIGHTS))
    def test_three_groups(self, records, weight):
        """Test J = 3 samples of up to nine records."""
        compare(records, 3, *weight)

    @pytest.mark.parametrize("weight", WEIGHTS, ids=lambda w: str(w[0]))
    def test_d1(self, weight):
        """Test the D1 sample under every weight family."""
        records = [(0, 1, 1), (0, 2, 1), (0, 3, 0), (0, 3, 1),
                   (1, 1, 0), (1, 2, 1), (1, 2, 1), (1, 4, 1)]
        compare(records, 2, *weight)


@pytest.mark.slow
class TestOracleExhaustive:
    """Every sample of up to six records over categories {1, 2, 3}."""

    @pytest.mark.parametrize("n_groups", [2, 3])
    def test_exhaustive(self, n_groups):
        """Test all multisets of records in which every group appears."""
        cells = list(itertools.product(range(n_groups), (1, 2, 3), (0, 1)))
        for size in range(n_groups, 7):
            for records in itertools.combinations_with_replacement(cells, size):
                if len({g for g, _, _ in records}) < n_groups:
                    continue
                compare(records, n_groups, *WEIGHTS[0])
