import numpy as np
import pytest
from scipy.integrate import trapezoid

from binclust.estimators import (
    EmptyTrace,
    PartitionNeverVisited,
    conditional_density,
    conditional_param_estimates,
    default_grid,
    mean_order_violations,
    mixing_weights,
    modal_partition,
    summarize_trace,
    visits,
)
from binclust.types import BinLayout, Partition, Trace


def make_trace(entries):
    """entries: list of (sizes, mu, lam)."""
    trace = Trace()
    for t, (sizes, mu, lam) in enumerate(entries, start=1):
        trace.iterations.append(t)
        trace.partitions.append(Partition(tuple(sizes)))
        trace.mu_draws.append(np.asarray(mu, float))
        trace.lam_draws.append(np.asarray(lam, float))
        trace.alpha_draws.append(1.0)
    return trace


class TestModalPartition:
    def test_most_frequent(self):
        trace = make_trace([((2, 1), [0, 1], [1, 1])] * 3 + [((3,), [0], [1])] * 2)
        assert modal_partition(trace).sizes == (2, 1)

    def test_tie_prefers_fewer_groups(self):
        trace = make_trace([((1, 2), [0, 1], [1, 1]), ((3,), [0], [1])])
        assert modal_partition(trace).sizes == (3,)

    def test_tie_then_lexicographic(self):
        trace = make_trace([((2, 1), [0, 1], [1, 1]), ((1, 2), [0, 1], [1, 1])])
        assert modal_partition(trace).sizes == (1, 2)

    def test_empty(self):
        with pytest.raises(EmptyTrace):
            modal_partition(Trace())


class TestConditionalEstimates:
    def test_average_over_matching_draws_only(self):
        trace = make_trace(
            [
                ((2, 1), [1.0, 5.0], [1.0, 4.0]),
                ((2, 1), [3.0, 7.0], [4.0, 1.0]),
                ((3,), [100.0], [0.01]),
            ]
        )
        est = conditional_param_estimates(trace, Partition((2, 1)))
        assert est[0] == pytest.approx((2.0, 0.75))
        assert est[1] == pytest.approx((6.0, 0.75))
        assert visits(trace, Partition((2, 1))) == 2

    def test_never_visited(self):
        trace = make_trace([((3,), [0.0], [1.0])])
        with pytest.raises(PartitionNeverVisited):
            conditional_param_estimates(trace, Partition((1, 2)))
        with pytest.raises(PartitionNeverVisited):
            conditional_density(trace, Partition((1, 2)), [0.0])

    def test_weights(self):
        w = mixing_weights(Partition((150, 92, 117, 141)), 500)
        assert w == pytest.approx([0.300, 0.184, 0.234, 0.282])
        assert sum(w) == pytest.approx(1.0)

    def test_order_violations(self):
        assert mean_order_violations([(1, 1), (2, 1), (1.5, 1), (3, 1)]) == [2]
        assert mean_order_violations([(1, 1)]) == []


class TestDensity:
    def test_integrates_to_one(self, rng):
        entries = [((30, 70), [rng.normal(10, 0.2), rng.normal(20, 0.2)], rng.gamma(5, 0.2, size=2)) for _ in range(40)]
        trace = make_trace(entries)
        grid = np.linspace(-20, 50, 20001)
        dens = conditional_density(trace, Partition((30, 70)), grid)
        assert np.all(dens >= 0)
        assert trapezoid(dens, grid) == pytest.approx(1.0, abs=1e-3)

    def test_single_draw_matches_mixture(self):
        trace = make_trace([((1, 3), [0.0, 2.0], [1.0, 0.25])])
        x = np.array([-1.0, 0.0, 2.5])
        expected = 0.25 * np.exp(-0.5 * x**2) / np.sqrt(2 * np.pi) + 0.75 * 0.5 * np.exp(
            -0.125 * (x - 2) ** 2
        ) / np.sqrt(2 * np.pi)
        np.testing.assert_allclose(conditional_density(trace, Partition((1, 3)), x), expected, rtol=1e-12)

    def test_default_grid(self):
        grid = default_grid(BinLayout((0.0, 5.0, 10.0)), 11)
        assert grid[0] == pytest.approx(-0.5) and grid[-1] == pytest.approx(10.5)
        assert len(grid) == 11


def test_summarize_trace():
    trace = make_trace([((2, 2), [1.0, 3.0], [1.0, 1.0])] * 3 + [((4,), [2.0], [1.0])])
    s = summarize_trace(trace, 4)
    assert s.k == 2 and s.visits == 3 and s.draws == 4
    assert [g.weight for g in s.groups] == [0.5, 0.5]
    assert [g.mean for g in s.groups] == [1.0, 3.0]
    assert s.order_violations == []
