import numpy as np
import pytest

from odrpo.exceptions import InputError
from odrpo.models import RewardScale, RolloutGroup
from odrpo.services.reward_core import bin_stats, decompose, group_moments, reconstruct_group


def _group(levels, rewards):
    return RolloutGroup.from_rewards(RewardScale(tuple(levels)), rewards)


def test_decompose_examples():
    matrix = decompose(_group((1, 2, 3), [1, 3, 3]))
    assert matrix.entries.tolist() == [[1, 0, 0], [1, 1, 1], [1, 1, 1]]

    row = decompose(_group(range(1, 11), [7, 1])).entries[0]
    assert row.tolist() == [1] * 7 + [0] * 3

    matrix = decompose(_group((2, 5, 9), [5, 2]))
    assert matrix.entries.tolist() == [[1, 1, 0], [1, 0, 0]]


def test_bin_stats_examples():
    stats = bin_stats(decompose(_group((1, 2, 3), [1, 3, 3])))
    np.testing.assert_allclose(stats.bin_means, [1.0, 2 / 3, 2 / 3])
    assert stats.degenerate_mask.tolist() == [True, False, False]

    stats = bin_stats(decompose(_group((1, 2, 3), [2, 2, 2])))
    assert stats.degenerate_mask.all()


def test_random_groups_match_counting_oracle():
    rng = np.random.default_rng(3)
    scale = RewardScale.from_k(10)
    for _ in range(200):
        indices = rng.integers(1, 11, size=8)
        group = RolloutGroup(scale, tuple(indices))
        matrix = decompose(group)
        stats = bin_stats(matrix)

        for k in range(1, 11):
            count = sum(1 for r in indices if r >= k)
            assert stats.bin_sizes[k - 1] == count
            assert stats.bin_means[k - 1] == pytest.approx(count / 8)
            assert stats.degenerate_mask[k - 1] == (count in (0, 8))
        # rows are non-increasing and sum to the level index
        assert np.all(np.diff(matrix.entries, axis=1) <= 0)
        assert matrix.entries.sum(axis=1).tolist() == indices.tolist()
        assert np.all(np.diff(stats.bin_means) <= 0)
        assert stats.bin_means[0] == 1.0


def test_spacing_weighted_indicators_reconstruct_rewards():
    scale = RewardScale((0.5, 2.0, 2.5, 4.0))
    group = RolloutGroup.from_rewards(scale, [4.0, 0.5, 2.5, 2.0])
    rebuilt = decompose(group).entries @ scale.bin_spacings()
    np.testing.assert_allclose(rebuilt, group.rewards)


def test_group_moments():
    assert group_moments(_group((1, 2), [1, 1, 2, 2])) == pytest.approx((1.5, 0.5))
    mean, std = group_moments(_group((3, 5), [5, 5, 5]))
    assert mean == 5.0 and std == 0.0

    rewards = [1, 4, 4, 7, 10]
    mean, std = group_moments(_group(range(1, 11), rewards))
    oracle_mean = sum(rewards) / len(rewards)
    oracle_var = sum((r - oracle_mean) ** 2 for r in rewards) / len(rewards)
    assert mean == pytest.approx(oracle_mean)
    assert std == pytest.approx(oracle_var ** 0.5)


def test_reconstruct_group_from_counts():
    scale = RewardScale.from_k(4)
    group = reconstruct_group(scale, (2, 0, 1, 1))
    assert group.level_indices == (1, 1, 3, 4)
    assert group.counts().tolist() == [2, 0, 1, 1]


def test_scale_and_group_validation():
    with pytest.raises(InputError):
        RewardScale((1, 1, 2))
    with pytest.raises(InputError):
        RewardScale.from_k(0)
    scale = RewardScale.from_k(3)
    with pytest.raises(InputError):
        RolloutGroup(scale, (1,))
    with pytest.raises(InputError):
        RolloutGroup(scale, (1, 4))
    with pytest.raises(InputError):
        RolloutGroup.from_rewards(scale, [1, 2.5])
    assert scale.spacing(2) == 1.0
    assert scale.shifted(10).levels == (11.0, 12.0, 13.0)
