"""
Reward Core Service
===================

Ordinal binary decomposition of a rollout group and its per-bin statistics.
"""

import numpy as np

from odrpo.models.reward import BinStats, OrdinalIndicatorMatrix, RolloutGroup


def decompose(group):
    """
    Decompose every reward into its ordinal success indicators.

    Args:
        group (RolloutGroup): rewards stored as level indices

    Returns:
        OrdinalIndicatorMatrix: entry (i, k) = 1 iff r_i >= R_k
    """
    thresholds = np.arange(1, group.scale.K + 1)
    entries = (group.indices[:, None] >= thresholds[None, :]).astype(np.int8)
    return OrdinalIndicatorMatrix(entries, group.scale)


def bin_stats(matrix):
    """Column means, success counts and degenerate (constant) columns."""
    entries = np.asarray(matrix.entries)
    sizes = entries.sum(axis=0).astype(int)
    means = sizes / entries.shape[0]
    degenerate = (sizes == 0) | (sizes == entries.shape[0])
    return BinStats(bin_means=means, bin_sizes=sizes, degenerate_mask=degenerate)


def group_moments(group):
    """Mean and population (divide-by-G) standard deviation of the raw rewards."""
    rewards = group.rewards
    mean = float(np.mean(rewards))
    return mean, float(np.sqrt(np.mean((rewards - mean) ** 2)))


def reconstruct_group(scale, counts):
    """Build the multiset group holding ``counts[k-1]`` rollouts at level k."""
    counts = np.asarray(counts, dtype=int)
    indices = np.repeat(np.arange(1, scale.K + 1), counts)
    return RolloutGroup(scale, tuple(indices))
