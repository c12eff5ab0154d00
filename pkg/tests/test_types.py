import numpy as np
import pytest

from binclust.types import (
    BinLayout,
    BinnedDataset,
    CenterOutsideBin,
    ChainState,
    EmptyDataset,
    Hyperparams,
    InvalidPartition,
    NegativeFrequency,
    NonIncreasingEdges,
    Partition,
    ValidationError,
    validate_dataset,
)


def dataset(edges, freqs, centers=None):
    return BinnedDataset(BinLayout(tuple(edges), centers), tuple(freqs))


class TestValidateDataset:
    def test_well_formed(self):
        validate_dataset(dataset((0, 1, 2), (3, 4)))

    def test_repeated_edge(self):
        with pytest.raises(NonIncreasingEdges):
            validate_dataset(dataset((0, 1, 1), (1, 1)))

    def test_empty(self):
        with pytest.raises(EmptyDataset):
            validate_dataset(dataset((0, 1), (0,)))

    def test_negative_frequency(self):
        with pytest.raises(NegativeFrequency):
            validate_dataset(dataset((0, 1, 2), (3, -1)))

    def test_center_outside_bin(self):
        with pytest.raises(CenterOutsideBin):
            validate_dataset(dataset((0, 1, 2), (1, 1), centers=(0.5, 2.5)))

    def test_center_on_right_edge_is_inside(self):
        validate_dataset(dataset((0, 1, 2), (1, 1), centers=(1.0, 2.0)))

    def test_zero_frequency_bins_allowed(self):
        validate_dataset(dataset((0, 1, 2, 3), (0, 5, 0)))

    def test_frequency_count_mismatch(self):
        with pytest.raises(ValidationError):
            validate_dataset(dataset((0, 1, 2), (1,)))


class TestPartition:
    def test_sizes_and_offsets(self):
        p = Partition((3, 2, 4))
        assert p.k == 3 and p.n == 9
        assert p.offsets == (0, 3, 5, 9)
        assert p.labels().tolist() == [0, 0, 0, 1, 1, 2, 2, 2, 2]

    def test_token_round_trip(self):
        p = Partition((150, 92, 117, 141))
        assert p.token() == "150-92-117-141"
        assert Partition.from_token(p.token()) == p

    @pytest.mark.parametrize("sizes", [(), (0, 2), (2, -1)])
    def test_invalid(self, sizes):
        with pytest.raises(InvalidPartition):
            Partition(sizes)


def test_hyperparams_reject_nonpositive():
    with pytest.raises(ValidationError):
        Hyperparams(c=0.0)


class TestChainState:
    def make(self, y):
        return ChainState(np.asarray(y, float), np.array([0, 0, 1]), Partition((2, 1)), np.zeros(2), np.ones(2), 1.0)

    def test_check_accepts_right_edge(self):
        self.make([0.5, 1.0, 1.5]).check((0, 1, 2))

    def test_check_rejects_left_edge(self):
        with pytest.raises(ValidationError):
            self.make([0.0, 0.5, 1.5]).check((0, 1, 2))

    def test_block_stats(self):
        s = self.make([0.2, 0.9, 1.7])
        n, mean, ss = s.block_stats(0, 2)
        assert n == 2
        assert mean == pytest.approx(0.55)
        assert ss == pytest.approx(2 * 0.35**2)

    def test_evolve_keeps_prefix_sums_only_for_same_y(self):
        s = self.make([0.2, 0.9, 1.7])
        s.block_stats(0, 3)
        kept = s.evolve(alpha=2.0)
        assert kept.__dict__["_stats"] is s.__dict__["_stats"]
        moved = s.evolve(y=np.array([0.3, 0.9, 1.7]))
        assert "_stats" not in moved.__dict__
