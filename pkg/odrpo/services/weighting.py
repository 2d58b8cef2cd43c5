"""
Weighting Service
=================

Variance-aware bin weights. Both schemes scale a Gini-impurity term
4 mu (1 - mu) by sqrt(k) over a 0.1 floor; the median variant decays the
impurity of bins below the group's median level index.
"""

import numpy as np
import pandas as pd

from odrpo.exceptions import InputError
from odrpo.models.advantage import WeightScheme, WeightVector
from odrpo.models.reward import RewardScale, RolloutGroup
from odrpo.services.reward_core import bin_stats, decompose

WEIGHT_FLOOR = 0.1

# Representative reward shapes on the 1..10 scale
REFERENCE_DISTRIBUTIONS = {
    'normal': (2, 4, 5, 5, 5, 6, 6, 6, 7, 9),
    'peak': (6, 7, 7, 7, 7, 7, 7, 7, 7, 8),
    'outliers': (1, 1, 5, 5, 5, 6, 6, 6, 10, 10),
    'uniform': tuple(range(1, 11)),
}


def _impurity(means):
    means = np.asarray(means, dtype=float)
    return 4.0 * means * (1.0 - means)


def _bin_roots(k):
    return np.sqrt(np.arange(1, k + 1, dtype=float))


def gini_weights(stats):
    """w_k = sqrt(k) * (0.1 + 4 mu_k (1 - mu_k))."""
    means = np.asarray(stats.bin_means, dtype=float)
    return WeightVector(_bin_roots(len(means)) * (WEIGHT_FLOOR + _impurity(means)))


def median_level_index(level_indices):
    """Lower median of level indices; an attained level for every group size."""
    ordered = np.sort(np.asarray(level_indices, dtype=int))
    if ordered.size == 0:
        raise InputError("median of an empty group is undefined")
    return int(ordered[(ordered.size - 1) // 2])


def group_median_bin(group):
    return median_level_index(group.level_indices)


def gini_median_weights(stats, median_bin):
    """w_k = sqrt(k) * (0.1 + 4 mu_k (1 - mu_k) * exp(-max(M_G - k, 0) / 2))."""
    means = np.asarray(stats.bin_means, dtype=float)
    k = len(means)
    if not 1 <= median_bin <= k:
        raise InputError(f"median bin must lie in 1..{k}, got {median_bin}")
    levels = np.arange(1, k + 1)
    decay = np.exp(-np.maximum(median_bin - levels, 0) / 2.0)
    return WeightVector(_bin_roots(k) * (WEIGHT_FLOOR + _impurity(means) * decay))


def compute_weights(scheme, stats, group=None):
    """
    Weight vector of a scheme for one group.

    Args:
        scheme: WeightScheme or its flag name
        stats (BinStats): full-group bin statistics
        group (RolloutGroup): needed for the median of the Gini-Median scheme

    Returns:
        WeightVector
    """
    scheme = WeightScheme.from_flag(scheme)
    if scheme is WeightScheme.UNIT:
        return WeightVector.unit(stats.K)
    if scheme is WeightScheme.GINI:
        return gini_weights(stats)
    if group is None:
        raise InputError("Gini-Median weights need the rollout group for its median bin")
    return gini_median_weights(stats, group_median_bin(group))


def weight_profile(group):
    """Per-bin table of mu with the Gini and Gini-Median weights of a group."""
    stats = bin_stats(decompose(group))
    return pd.DataFrame({
        'bin': np.arange(1, stats.K + 1),
        'mu': stats.bin_means,
        'gini': gini_weights(stats).weights,
        'gini_median': gini_median_weights(stats, group_median_bin(group)).weights,
    })


def reference_profiles():
    """
    Weight profiles of the representative reward shapes.

    Returns:
        pandas.DataFrame: columns distribution, median_bin, bin, mu, gini,
        gini_median; one row per (distribution, bin)
    """
    scale = RewardScale.from_k(10)
    frames = []
    for name, levels in REFERENCE_DISTRIBUTIONS.items():
        group = RolloutGroup(scale, levels)
        profile = weight_profile(group)
        profile.insert(0, 'median_bin', group_median_bin(group))
        profile.insert(0, 'distribution', name)
        frames.append(profile)
    return pd.concat(frames, ignore_index=True)
