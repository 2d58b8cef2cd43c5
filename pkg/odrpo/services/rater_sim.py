"""
Rater Simulation
================

A synthetic stochastic judge, score-matrix sampling and the statistics used
to measure how much a judge disagrees with itself: Kendall's coefficient of
concordance across repeated calls, per-response distribution moments,
rank-flip rates and majority (mode) votes.

The many-datapoint study draws one latent-quality profile and one score
matrix per datapoint from seeds derived from the study seed and the
datapoint index, so results do not depend on thread scheduling.
"""

import math
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pandas as pd
from scipy.special import gammaincc
from scipy.stats import kurtosis, rankdata, skew

from config import Config
from odrpo.exceptions import DegenerateMatrix, InputError
from odrpo.models.rater import ConcordanceReport, JudgeModel, ScoreMatrix
from odrpo.utils.enumeration import derive_seed, derived_rng
from odrpo.utils.log_utils import log_message

TIE_BREAKS = ('smallest', 'largest', 'median', 'random')
DATAPOINT_COLUMNS = ['datapoint', 'W', 'chi2', 'p_value', 'flip_rate']
RESPONSE_COLUMNS = ['datapoint', 'response', 'mean', 'std', 'skew', 'kurtosis']


def sample_scores(judge, M, N, seed=None):
    """
    Score M responses N times each with a judge.

    Every entry is independent: with probability ``outlier_rate`` a uniform
    score in 1..K, otherwise round(q_i + noise_width * Logistic(0, 1))
    clamped to 1..K. All random arrays are drawn regardless of the
    parameters, so a seed yields the same stream for every judge setting.

    Returns:
        ScoreMatrix: M x N integer scores
    """
    if M < 2 or N < 1:
        raise InputError(f"score matrices need M >= 2 and N >= 1, got M={M}, N={N}")
    qualities = np.asarray(judge.latent_qualities, dtype=float)
    if qualities.size != M:
        raise InputError(f"judge carries {qualities.size} latent qualities, expected M={M}")

    rng = np.random.default_rng(Config.DEFAULT_SEED if seed is None else seed)
    noise = rng.logistic(size=(M, N))
    outliers = rng.random(size=(M, N)) < judge.outlier_rate
    uniform = rng.integers(1, judge.K + 1, size=(M, N))

    centred = np.clip(np.rint(qualities[:, None] + judge.noise_width * noise), 1, judge.K)
    scores = np.where(outliers, uniform, centred).astype(int)
    return ScoreMatrix(scores, judge.K)


def _tie_terms(column):
    _, counts = np.unique(column, return_counts=True)
    return float(np.sum(counts ** 3 - counts))


def kendalls_w(matrix):
    """
    Tie-corrected Kendall's W of M responses ranked by N raters.

    Ranks are mid-ranks within each rater's column.
    W = 12 S / (N^2 (M^3 - M) - N sum_j T_j), chi2 = N (M - 1) W on M - 1
    degrees of freedom, p-value from the regularized upper incomplete gamma.

    Raises:
        DegenerateMatrix: every rater gave every response the same score
    """
    scores = np.asarray(matrix.scores if isinstance(matrix, ScoreMatrix) else matrix, dtype=float)
    if scores.ndim != 2 or scores.shape[0] < 2 or scores.shape[1] < 2:
        raise InputError(f"Kendall's W needs at least 2 responses and 2 raters, got shape {scores.shape}")
    M, N = scores.shape

    ranks = rankdata(scores, axis=0)
    rank_sums = ranks.sum(axis=1)
    S = float(np.sum((rank_sums - rank_sums.mean()) ** 2))
    tie_correction = math.fsum(_tie_terms(scores[:, j]) for j in range(N))

    denominator = N ** 2 * (M ** 3 - M) - N * tie_correction
    if denominator <= 0:
        raise DegenerateMatrix("all raters gave constant scores; concordance is undefined")

    W = min(max(12.0 * S / denominator, 0.0), 1.0)
    dof = M - 1
    chi2 = N * dof * W
    p_value = float(gammaincc(dof / 2.0, chi2 / 2.0))
    return ConcordanceReport(W=W, chi2=chi2, dof=dof, p_value=p_value, tie_correction=tie_correction)


def row_stats(matrix):
    """
    Population mean, std, skewness and excess kurtosis of every response's scores.

    Rows with zero variance report NaN skewness and kurtosis.
    """
    scores = np.asarray(matrix.scores if isinstance(matrix, ScoreMatrix) else matrix, dtype=float)
    if scores.ndim != 2 or scores.shape[1] < 2:
        raise InputError(f"row statistics need at least 2 scores per response, got shape {scores.shape}")

    means = scores.mean(axis=1)
    stds = scores.std(axis=1)
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', RuntimeWarning)
        skews = skew(scores, axis=1, bias=True)
        kurts = kurtosis(scores, axis=1, fisher=True, bias=True)
    constant = stds == 0
    return pd.DataFrame({
        'response': np.arange(1, scores.shape[0] + 1),
        'mean': means,
        'std': stds,
        'skew': np.where(constant, np.nan, skews),
        'kurtosis': np.where(constant, np.nan, kurts),
    })


def mode_vote(scores, tie_break='smallest', rng=None):
    """
    Most frequent score among N votes.

    Args:
        scores: sequence of integer scores
        tie_break (str): 'smallest' (default), 'largest', 'median' (lower median
            of the tied values) or 'random'
        rng: numpy Generator, required for 'random'

    Returns:
        int
    """
    values = np.asarray(scores, dtype=int).ravel()
    if values.size == 0:
        raise InputError("mode vote needs at least one score")
    if tie_break not in TIE_BREAKS:
        raise InputError(f"unknown tie_break '{tie_break}' (expected one of {', '.join(TIE_BREAKS)})")

    levels, counts = np.unique(values, return_counts=True)
    tied = levels[counts == counts.max()]
    if tie_break == 'largest':
        return int(tied[-1])
    if tie_break == 'median':
        return int(tied[(tied.size - 1) // 2])
    if tie_break == 'random':
        if rng is None:
            raise InputError("tie_break='random' needs an rng")
        return int(rng.choice(tied))
    return int(tied[0])


def rank_flip_rate(matrix):
    """Fraction of (rater pair, response pair) combinations ordered strictly oppositely."""
    scores = np.asarray(matrix.scores if isinstance(matrix, ScoreMatrix) else matrix)
    if scores.ndim != 2 or scores.shape[0] < 2 or scores.shape[1] < 2:
        raise InputError(f"rank flips need at least 2 responses and 2 raters, got shape {scores.shape}")
    M, N = scores.shape

    first, second = np.triu_indices(M, k=1)
    signs = np.sign(scores[first] - scores[second])
    # a response pair flips once for every (higher, lower) rater combination
    flips = np.sum((signs > 0).sum(axis=1) * (signs < 0).sum(axis=1))
    return float(flips) / (first.size * N * (N - 1) / 2)


def draw_qualities(rng, M, K, spread):
    """Latent qualities banded around one prompt-level centre."""
    centre = rng.uniform(1.0, K)
    return np.clip(centre + rng.normal(0.0, spread, size=M), 1.0, K)


def _analyze_datapoint(index, M, N, K, noise_width, outlier_rate, spread, seed):
    qualities = draw_qualities(derived_rng(seed, index, 0), M, K, spread)
    judge = JudgeModel(K, tuple(qualities), noise_width, outlier_rate)
    matrix = sample_scores(judge, M, N, derive_seed(seed, index, 1))
    try:
        report = kendalls_w(matrix)
        W, chi2, p_value = report.W, report.chi2, report.p_value
    except DegenerateMatrix:
        W = chi2 = p_value = np.nan
    summary = {'datapoint': index, 'W': W, 'chi2': chi2, 'p_value': p_value,
               'flip_rate': rank_flip_rate(matrix)}
    responses = row_stats(matrix)
    responses.insert(0, 'datapoint', index)
    return summary, responses


def simulate_study(datapoints, M, N, K, noise_width=None, outlier_rate=None,
                   quality_spread=None, seed=None, threads=1):
    """
    Generate and analyze many independent score matrices.

    Args:
        datapoints (int): number of prompts
        M (int): responses per prompt
        N (int): judge calls per response
        K (int): score levels
        noise_width, outlier_rate, quality_spread: judge settings, Config defaults when None
        seed (int): study seed
        threads (int): worker threads over datapoints

    Returns:
        tuple: (per-datapoint DataFrame, per-response DataFrame), ordered by datapoint
    """
    if datapoints < 1:
        raise InputError(f"datapoints must be >= 1, got {datapoints}")
    if M < 2 or N < 2 or K < 2:
        raise InputError(f"studies need M >= 2, N >= 2 and K >= 2, got M={M}, N={N}, K={K}")
    noise_width = Config.JUDGE_NOISE_WIDTH if noise_width is None else noise_width
    outlier_rate = Config.JUDGE_OUTLIER_RATE if outlier_rate is None else outlier_rate
    spread = Config.JUDGE_QUALITY_SPREAD if quality_spread is None else quality_spread
    seed = Config.DEFAULT_SEED if seed is None else seed

    def run(index):
        return _analyze_datapoint(index, M, N, K, noise_width, outlier_rate, spread, seed)

    indices = range(1, datapoints + 1)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, indices))
    else:
        results = [run(index) for index in indices]

    per_datapoint = pd.DataFrame([summary for summary, _ in results], columns=DATAPOINT_COLUMNS)
    per_response = pd.concat([responses for _, responses in results], ignore_index=True)[RESPONSE_COLUMNS]
    log_message(f"Rater study: {datapoints} datapoints, M={M}, N={N}, K={K}, "
                f"median W {per_datapoint['W'].median():.4f}")
    return per_datapoint, per_response


def summarize_study(per_datapoint, per_response, threshold=None):
    """Median W, share of datapoints below the consistency threshold and median moments."""
    threshold = Config.CONSISTENCY_THRESHOLD if threshold is None else threshold
    W = per_datapoint['W'].dropna()
    return {
        'datapoints': int(len(per_datapoint)),
        'degenerate': int(per_datapoint['W'].isna().sum()),
        'median_W': float(W.median()) if len(W) else float('nan'),
        'fraction_below_threshold': float((W < threshold).mean()) if len(W) else float('nan'),
        'median_flip_rate': float(per_datapoint['flip_rate'].median()),
        'median_std': float(per_response['std'].median()),
        'median_kurtosis': float(per_response['kurtosis'].median()),
    }
