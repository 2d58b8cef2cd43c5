"""
Advantage Estimators
====================

GRPO (z-score), MaxRL (mean normalization) and ODRPO (per-bin normalization
of ordinal success indicators, then weighted accumulation), plus the
finite-summation form of ODRPO for arbitrary real rewards and the batch
normalization applied after accumulation.

All estimators return pre-batch-normalization advantages.
"""

import numpy as np

from config import Config
from odrpo.exceptions import InputError, MeanTooSmall
from odrpo.models.advantage import AdvantageVector, NormalizationKind, WeightScheme
from odrpo.services.reward_core import bin_stats, decompose, group_moments
from odrpo.services.weighting import compute_weights

ESTIMATOR_NAMES = ('grpo', 'maxrl', 'odrpo', 'odrpo-continuous')


def grpo_advantage(group):
    """A_i = (r_i - mu) / sigma with population sigma; all zeros when sigma vanishes."""
    mean, std = group_moments(group)
    if std <= Config.EPSILON:
        return AdvantageVector(np.zeros(group.G))
    return AdvantageVector((group.rewards - mean) / std)


def maxrl_advantage(group):
    """A_i = (r_i - mu) / mu."""
    mean, _ = group_moments(group)
    if abs(mean) <= Config.EPSILON:
        raise MeanTooSmall(f"group mean {mean} is too small for mean normalization")
    return AdvantageVector((group.rewards - mean) / mean)


def odrpo_advantage(group, norm=NormalizationKind.STD_DEV, weights=WeightScheme.UNIT):
    """
    Ordinal-decomposition advantage with per-bin normalization.

    Bin k contributes w_k * Delta_k * (r_i^(k) - mu_k) / N_k for every
    non-degenerate bin and exactly 0 for bins whose indicator is constant.
    Delta_k is the scale spacing R_k - R_{k-1}, equal to 1 on {1..K}.

    Args:
        group (RolloutGroup): rewards on the scale
        norm (NormalizationKind): StdDev or Mean bin normalization
        weights (WeightScheme): unit, Gini or Gini-Median bin weights

    Returns:
        AdvantageVector: values with the G x K per-bin contributions
    """
    norm = NormalizationKind.from_flag(norm)
    matrix = decompose(group)
    stats = bin_stats(matrix)
    bin_weights = compute_weights(weights, stats, group).weights

    active = ~stats.degenerate_mask
    means = stats.bin_means[active]
    scale_factor = bin_weights[active] * group.scale.bin_spacings()[active]

    per_bin = np.zeros(matrix.entries.shape, dtype=float)
    centered = matrix.entries[:, active] - means
    per_bin[:, active] = scale_factor * centered / norm.normalizer(means)
    return AdvantageVector(per_bin.sum(axis=1), per_bin)


def odrpo_continuous(raw_rewards, norm=NormalizationKind.STD_DEV):
    """
    ODRPO for real-valued rewards, reduced to a finite sum over sorted gaps.

    With sorted rewards r_(1) <= ... <= r_(G), gaps Delta_k = r_(k+1) - r_(k)
    and mu_k = (G - k) / G, a rollout at sorted position p receives
    sum_{k < p} Delta_k (1 - mu_k) / N_k - sum_{k >= p} Delta_k mu_k / N_k.
    Zero gaps contribute nothing, so tied rewards get identical advantages.
    """
    norm = NormalizationKind.from_flag(norm)
    rewards = np.asarray(raw_rewards, dtype=float)
    if rewards.ndim != 1 or rewards.size < 2:
        raise InputError(f"continuous ODRPO needs G >= 2 rewards, got {rewards.size}")
    size = rewards.size

    order = np.argsort(rewards, kind='stable')
    gaps = np.diff(rewards[order])
    mu = (size - np.arange(1, size)) / size
    normalizer = norm.normalizer(mu)
    success = gaps * (1.0 - mu) / normalizer
    failure = gaps * mu / normalizer

    # position p (1-based) collects success terms k < p and failure terms k >= p
    success_prefix = np.concatenate(([0.0], np.cumsum(success)))
    failure_suffix = np.concatenate((np.cumsum(failure[::-1])[::-1], [0.0]))
    sorted_values = success_prefix - failure_suffix

    values = np.empty(size)
    values[order] = sorted_values
    return AdvantageVector(values)


def batch_normalize(advantages, epsilon=None):
    """Standardize advantages across a whole batch; all zeros when the batch is constant."""
    epsilon = Config.EPSILON if epsilon is None else epsilon
    values = np.asarray(advantages, dtype=float)
    if values.size < 2:
        raise InputError(f"batch normalization needs at least 2 values, got {values.size}")
    std = values.std()
    if std <= epsilon:
        return np.zeros_like(values)
    return (values - values.mean()) / max(std, epsilon)


def compute_advantages(group, estimator='odrpo', norm=NormalizationKind.STD_DEV,
                       weights=WeightScheme.UNIT):
    """Dispatch one group to an estimator by name."""
    name = str(estimator).strip().lower()
    if name == 'grpo':
        return grpo_advantage(group)
    if name == 'maxrl':
        return maxrl_advantage(group)
    if name == 'odrpo':
        return odrpo_advantage(group, norm, weights)
    if name == 'odrpo-continuous':
        if WeightScheme.from_flag(weights) is not WeightScheme.UNIT:
            raise InputError("the continuous extension supports unit weights only")
        return odrpo_continuous(group.rewards, norm)
    raise InputError(f"unknown estimator '{estimator}' (expected one of {', '.join(ESTIMATOR_NAMES)})")
