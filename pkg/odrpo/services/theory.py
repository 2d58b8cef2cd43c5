"""
Advantage Fields and Curl Checks
================================

Leave-one-out advantage functions f_k(s) for GRPO, MaxRL and ODRPO, the
curl residual an update field must zero to be the gradient of a scalar
objective, and mean-absolute-curl (MAC) scans over K and M.

Every field function accepts a single statistics vector (tuple, array or
LeaveOneOutStats) or a stack of them as an (n, K) array, and returns a float
or an (n,) array accordingly.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache

import numpy as np

from config import Config
from odrpo.exceptions import InputError, MeanTooSmall, TooLarge
from odrpo.models.advantage import NormalizationKind, WeightScheme
from odrpo.models.reward import RewardScale
from odrpo.models.theory import CurlReport, EstimatorField, EstimatorKind, LeaveOneOutStats
from odrpo.services.weighting import WEIGHT_FLOOR
from odrpo.utils.enumeration import enumerate_statistics, simplex_size
from odrpo.utils.log_utils import log_message


def _as_counts(s, k, total=None):
    if isinstance(s, LeaveOneOutStats):
        s = s.counts
    counts = np.asarray(s, dtype=float)
    if counts.shape[-1] != k:
        raise InputError(f"statistics vectors need {k} entries, got shape {counts.shape}")
    if total is not None and np.any(counts.sum(axis=-1) != total):
        raise InputError(f"statistics vectors must sum to {total}")
    return counts


def _full_group(s, k, scale, M):
    if not 1 <= k <= scale.K:
        raise InputError(f"level index must lie in 1..{scale.K}, got {k}")
    counts = _as_counts(s, scale.K, M - 1).copy()
    counts[..., k - 1] += 1
    return counts


def _finish(values, s):
    values = np.asarray(values, dtype=float)
    return float(values) if values.ndim == 0 else values


def _group_mean(counts, scale, M):
    return counts @ scale.values / M


def f_grpo(k, s, scale, M):
    """(R_k - mean) / std over the full group s + e_k; 0 when the group is constant."""
    counts = _full_group(s, k, scale, M)
    mean = _group_mean(counts, scale, M)
    deviations = scale.values - mean[..., None]
    std = np.sqrt((counts * deviations ** 2).sum(axis=-1) / M)
    safe_std = np.where(std > Config.EPSILON, std, 1.0)
    values = np.where(std > Config.EPSILON, (scale.levels[k - 1] - mean) / safe_std, 0.0)
    return _finish(values, s)


def f_maxrl(k, s, scale, M):
    """(R_k - mean) / mean over the full group s + e_k."""
    counts = _full_group(s, k, scale, M)
    mean = _group_mean(counts, scale, M)
    if np.any(np.abs(mean) <= Config.EPSILON):
        raise MeanTooSmall("group mean too small for mean normalization")
    return _finish((scale.levels[k - 1] - mean) / mean, s)


def success_term(c, M, norm=NormalizationKind.STD_DEV):
    """
    Bin advantage of a rollout that clears the threshold, given c other successes.

    StdDev: sqrt((M - c - 1) / (c + 1)); Mean: (M - c - 1) / (c + 1).
    """
    c = np.asarray(c, dtype=float)
    ratio = (M - c - 1.0) / (c + 1.0)
    if NormalizationKind.from_flag(norm) is NormalizationKind.STD_DEV:
        return np.sqrt(np.maximum(ratio, 0.0))
    return ratio


def failure_term(c, M, norm=NormalizationKind.STD_DEV):
    """
    Bin advantage of a rollout below the threshold, given c other successes.

    StdDev: -sqrt(c / (M - c)); Mean: -1, or 0 when no rollout succeeds.
    """
    c = np.asarray(c, dtype=float)
    if NormalizationKind.from_flag(norm) is NormalizationKind.STD_DEV:
        return -np.sqrt(c / (M - c))
    return np.where(c > 0, -1.0, 0.0)


def _odrpo_bin_weights(scheme, full_suffix, full_counts, M):
    """Weights of bins 2..K from full-group bin means, shape (..., K - 1)."""
    if scheme is WeightScheme.UNIT:
        return np.ones_like(full_suffix)
    k = full_suffix.shape[-1] + 1
    roots = np.sqrt(np.arange(2, k + 1, dtype=float))
    mu = full_suffix / M
    impurity = 4.0 * mu * (1.0 - mu)
    if scheme is WeightScheme.GINI:
        return roots * (WEIGHT_FLOOR + impurity)
    # lower median of the full group: first level whose cumulative count reaches rank (M - 1) // 2 + 1
    rank = (M - 1) // 2 + 1
    median = (np.cumsum(full_counts, axis=-1) < rank).sum(axis=-1) + 1
    levels = np.arange(2, k + 1)
    decay = np.exp(-np.maximum(median[..., None] - levels, 0) / 2.0)
    return roots * (WEIGHT_FLOOR + impurity * decay)


def f_odrpo(k, s, scale, M, norm=NormalizationKind.STD_DEV, weights=WeightScheme.UNIT):
    """
    ODRPO advantage of reward R_k given leave-one-out statistics s.

    f_k(s) = sum_{m=2..k} Delta_m w_m t(S_m(s)) + sum_{m=k+1..K} Delta_m w_m u(S_m(s)),
    with suffix sums S_m(s) = sum_{j >= m} s_j and weights computed from the
    full-group bin mean (S_m(s) + [m <= k]) / M.
    """
    norm = NormalizationKind.from_flag(norm)
    weights = WeightScheme.from_flag(weights)
    full_counts = _full_group(s, k, scale, M)
    counts = full_counts.copy()
    counts[..., k - 1] -= 1

    suffix = np.cumsum(counts[..., ::-1], axis=-1)[..., ::-1][..., 1:]
    levels = np.arange(2, scale.K + 1)
    success = levels <= k
    terms = np.where(success, success_term(suffix, M, norm), failure_term(suffix, M, norm))
    bin_weights = _odrpo_bin_weights(weights, suffix + success, full_counts, M)
    spacings = scale.bin_spacings()[1:]
    return _finish((spacings * bin_weights * terms).sum(axis=-1), s)


def evaluate_field(field, k, s):
    """f_k(s) for an EstimatorField."""
    if field.kind is EstimatorKind.GRPO:
        return f_grpo(k, s, field.scale, field.M)
    if field.kind is EstimatorKind.MAXRL:
        return f_maxrl(k, s, field.scale, field.M)
    return f_odrpo(k, s, field.scale, field.M, field.norm, field.weights)


@lru_cache(maxsize=128)
def field_table(field, n=None, limit=None):
    """
    Evaluate f_k on every statistics vector of S_n.

    Args:
        field (EstimatorField): the advantage function
        n (int): total count, defaults to M - 1
        limit (int): enumeration guard passed to enumerate_statistics

    Returns:
        tuple: (statistics array (|S_n|, K), values array (K, |S_n|))
    """
    n = field.M - 1 if n is None else n
    stats = enumerate_statistics(field.K, n, limit)
    values = np.vstack([np.atleast_1d(evaluate_field(field, k, stats)) for k in range(1, field.K + 1)])
    values.setflags(write=False)
    return stats, values


def _shift_field_table(field, stats):
    """T[a, b] = f_a(s + e_b) over a stack of s in S_{M-2}, shape (K, K, n)."""
    K = field.K
    table = np.empty((K, K, stats.shape[0]))
    for b in range(1, K + 1):
        shifted = stats.astype(float).copy()
        shifted[:, b - 1] += 1
        for a in range(1, K + 1):
            table[a - 1, b - 1] = np.atleast_1d(evaluate_field(field, a, shifted))
    return table


def curl_residual(field, i, j, s):
    """f_i(s+e_j) - f_i(s+e_K) + f_j(s+e_K) - f_j(s+e_i) + f_K(s+e_i) - f_K(s+e_j)."""
    K = field.K
    if not (1 <= i <= K and 1 <= j <= K):
        raise InputError(f"level indices must lie in 1..{K}, got ({i}, {j})")
    s = LeaveOneOutStats(s) if not isinstance(s, LeaveOneOutStats) else s
    if s.K != K or s.n != field.M - 2:
        raise InputError(f"curl statistics must have {K} entries summing to M - 2 = {field.M - 2}")
    return (field(i, s.plus(j)) - field(i, s.plus(K))
            + field(j, s.plus(K)) - field(j, s.plus(i))
            + field(K, s.plus(i)) - field(K, s.plus(j)))


def curl_report(field, limit=None):
    """
    Curl residuals of a field over all s in S_{M-2} and pairs 1 <= i < j < K.

    Pairs involving K vanish identically and are left out of the mean.

    Raises:
        TooLarge: when |S_{M-2}| * K^2 exceeds the limit
    """
    limit = Config.CURL_LIMIT if limit is None else limit
    K, M = field.K, field.M
    size = simplex_size(K, M - 2) * K * K
    if size > limit:
        raise TooLarge(f"curl scan at K={K}, M={M} needs {size} evaluations, limit is {limit}")

    stats = enumerate_statistics(K, M - 2)
    table = _shift_field_table(field, stats)
    last = K - 1
    residuals = []
    for i in range(K - 1):
        for j in range(i + 1, K - 1):
            residuals.append(table[i, j] - table[i, last] + table[j, last]
                             - table[j, i] + table[last, i] - table[last, j])
    residuals = np.concatenate(residuals) if residuals else np.zeros(0)
    magnitudes = np.abs(residuals)
    mac = math.fsum(magnitudes) / magnitudes.size if magnitudes.size else 0.0
    max_abs = float(magnitudes.max()) if magnitudes.size else 0.0
    return CurlReport(field.label, K, M, residuals, mac, max_abs)


def mac_scan(kind, k_range, m_range, scale_builder=RewardScale.from_k,
             norm=NormalizationKind.STD_DEV, weights=WeightScheme.UNIT, threads=1, limit=None):
    """
    Mean absolute curl over a grid of level counts K and group sizes M.

    Args:
        kind: EstimatorKind or its flag name
        k_range: iterable of K values (each >= 2)
        m_range: iterable of M values (each >= 2)
        scale_builder: callable K -> RewardScale
        norm, weights: ODRPO settings, ignored for GRPO and MaxRL
        threads (int): worker threads over independent (K, M) cells
        limit (int): per-cell enumeration guard

    Returns:
        list: CurlReport per cell, sorted by (K, M)
    """
    kind = EstimatorKind.from_flag(kind)
    cells = sorted({(int(K), int(M)) for K in k_range for M in m_range})
    bad = [(K, M) for K, M in cells if K < 2 or M < 2]
    if bad:
        raise InputError(f"curl scans need K >= 2 and M >= 2, got {bad}")

    def run_cell(cell):
        K, M = cell
        field = EstimatorField(kind, scale_builder(K), M, norm, weights)
        return curl_report(field, limit)

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            reports = list(pool.map(run_cell, cells))
    else:
        reports = [run_cell(cell) for cell in cells]

    log_message(f"Curl scan {kind.value}: {len(reports)} cells, "
                f"largest MAC {max((r.mac for r in reports), default=0.0):.6g}")
    return reports
