"""
Scalar Objective and Expected Updates
=====================================

Multinomial masses over the count simplex, the binomial expectations
beta(P) and alpha(P) of the per-bin success and failure terms, the arcsin
objective J(p) and the expected update field dh/dp_k, computed either by
exact enumeration or by Monte Carlo.

Update fields are reported on the scale of beta - alpha, which approaches
1 / sqrt(P (1 - P)) as M grows. That is pi times the derivative of
(2 / pi) arcsin(sqrt(P)), so gradient checks compare field differences
against FIELD_SCALE times finite differences of J.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln, xlogy
from scipy.stats import binom

from config import Config
from odrpo.exceptions import InputError
from odrpo.models.advantage import NormalizationKind, WeightScheme
from odrpo.models.theory import LeaveOneOutStats, SimplexPoint
from odrpo.services.estimators import compute_advantages
from odrpo.services.reward_core import reconstruct_group
from odrpo.services.theory import failure_term, field_table, success_term
from odrpo.services.weighting import WEIGHT_FLOOR
from odrpo.utils.enumeration import enumerate_statistics

FIELD_SCALE = math.pi
EXACT_FACTORIAL_LIMIT = 20


def _as_point(p):
    return p if isinstance(p, SimplexPoint) else SimplexPoint(p)


def multinomial_pmf(s, n, p):
    """
    B_s^n(p) = n! prod p_k^s_k / s_k!.

    Args:
        s: count vector (tuple, array or LeaveOneOutStats) summing to n
        n (int): number of draws
        p: SimplexPoint or probability vector

    Returns:
        float: the probability mass; exact factorials up to n = 20, log space above
    """
    point = _as_point(p)
    counts = np.asarray(s.counts if isinstance(s, LeaveOneOutStats) else s, dtype=int)
    if counts.shape != (point.K,):
        raise InputError(f"count vector needs {point.K} entries, got {counts.shape}")
    if np.any(counts < 0) or int(counts.sum()) != n:
        raise InputError(f"counts {tuple(counts)} must be non-negative and sum to {n}")
    probs = point.probs
    if np.any((counts > 0) & (probs == 0)):
        return 0.0

    if n <= EXACT_FACTORIAL_LIMIT:
        coefficient = math.factorial(n)
        for c in counts:
            coefficient //= math.factorial(int(c))
        return float(coefficient * math.prod(float(q) ** int(c) for q, c in zip(probs, counts)))

    log_mass = gammaln(n + 1) - gammaln(counts + 1).sum() + xlogy(counts, probs).sum()
    return float(np.exp(log_mass))


def multinomial_table(stats, p):
    """Masses of every row of a statistics array, in log space."""
    point = _as_point(p)
    stats = np.asarray(stats, dtype=float)
    n = stats.sum(axis=-1)
    log_mass = gammaln(n + 1) - gammaln(stats + 1).sum(axis=-1) + xlogy(stats, point.probs).sum(axis=-1)
    return np.exp(log_mass)


def _gini_bin_weights(x, M, bin_index, success):
    mu = (x + 1.0) / M if success else x / M
    return math.sqrt(bin_index) * (WEIGHT_FLOOR + 4.0 * mu * (1.0 - mu))


def beta_alpha(P, M, norm=NormalizationKind.STD_DEV, gini_bin=None):
    """
    Binomial expectations of the success and failure terms of one bin.

    beta(P) = E[t(x)] and alpha(P) = E[u(x)] with x ~ Bin(M - 1, P).

    Args:
        P (float): probability of clearing the bin threshold
        M (int): group size
        norm: bin normalization
        gini_bin (int): when given, weight the terms with the Gini weight of that bin

    Returns:
        tuple: (beta, alpha)
    """
    if not 0.0 <= P <= 1.0:
        raise InputError(f"P must lie in [0, 1], got {P}")
    if M < 2:
        raise InputError(f"group size M must be >= 2, got {M}")
    x = np.arange(M, dtype=float)
    mass = binom.pmf(x, M - 1, P)
    t = success_term(x, M, norm)
    u = failure_term(x, M, norm)
    if gini_bin is not None:
        t = t * _gini_bin_weights(x, M, gini_bin, success=True)
        u = u * _gini_bin_weights(x, M, gini_bin, success=False)
    return float(math.fsum(mass * t)), float(math.fsum(mass * u))


def arcsin_objective(p, scale):
    """J(p) = (2 / pi) sum_{m=2..K} Delta_m arcsin(sqrt(P_m))."""
    point = _as_point(p)
    if point.K != scale.K:
        raise InputError(f"simplex point has {point.K} levels, scale has {scale.K}")
    suffix = point.suffix_sums[1:]
    spacings = scale.bin_spacings()[1:]
    return float(2.0 / math.pi * np.sum(spacings * np.arcsin(np.sqrt(suffix))))


def arcsin_gradient(P):
    """d/dP of (2 / pi) arcsin(sqrt(P)); infinite at P = 0 and P = 1."""
    P = np.asarray(P, dtype=float)
    with np.errstate(divide='ignore'):
        grad = 1.0 / (math.pi * np.sqrt(P * (1.0 - P)))
    return float(grad) if grad.ndim == 0 else grad


class ObjectiveField(NamedTuple):
    values: np.ndarray
    c_alpha: float

    @property
    def relative(self):
        """The field without its constant, dh/dp_k - dh/dp_1."""
        return self.values - self.c_alpha


def objective_update_field(p, scale, M, norm=NormalizationKind.STD_DEV, weights=WeightScheme.UNIT):
    """
    dh/dp_k = sum_{m=2..k} Delta_m (beta(P_m) - alpha(P_m)) + C_alpha.

    C_alpha = sum_{m=2..K} Delta_m alpha(P_m) is shared by every k and drops
    out of the update because sum_k grad p_k = 0.

    Returns:
        ObjectiveField: (values over k, C_alpha)
    """
    point = _as_point(p)
    scheme = WeightScheme.from_flag(weights)
    if scheme is WeightScheme.GINI_MEDIAN:
        raise InputError("Gini-Median weights couple the bins; use expected_field instead")
    if point.K != scale.K:
        raise InputError(f"simplex point has {point.K} levels, scale has {scale.K}")

    spacings = scale.bin_spacings()
    differences = np.zeros(scale.K)
    alphas = np.zeros(scale.K)
    for m, P in enumerate(point.suffix_sums, start=1):
        if m == 1:
            continue
        gini_bin = m if scheme is WeightScheme.GINI else None
        beta, alpha = beta_alpha(float(P), M, norm, gini_bin)
        differences[m - 1] = spacings[m - 1] * (beta - alpha)
        alphas[m - 1] = spacings[m - 1] * alpha
    c_alpha = math.fsum(alphas)
    return ObjectiveField(np.cumsum(differences) + c_alpha, c_alpha)


def expected_field(field, p, limit=None):
    """
    E_{s ~ Multi(M - 1, p)}[f_k(s)] for every k by exact enumeration.

    Raises:
        TooLarge: when |S_{M-1}| exceeds the enumeration limit
    """
    point = _as_point(p)
    if point.K != field.K:
        raise InputError(f"simplex point has {point.K} levels, field has {field.K}")
    limit = Config.ENUMERATION_LIMIT if limit is None else limit
    stats, values = field_table(field, None, limit)
    mass = multinomial_table(stats, point)
    return np.array([math.fsum(mass * row) for row in values])


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: np.ndarray
    std_error: np.ndarray
    trials: int


def sampled_update_expectation(field, p, trials, seed=None, M=None, use_estimator=False):
    """
    Monte Carlo estimate of E[f_k(s)] with s ~ Multi(M - 1, p).

    Each trial draws the other M - 1 members of a group and scores a rollout
    at every level k against them. By default the score comes from the
    closed-form field; with use_estimator the group s + e_k is rebuilt and
    run through the group estimator, reading off the advantage of one
    rollout at level k. Both paths consume the same draws.

    Returns:
        MonteCarloEstimate: per-level means with their standard errors
    """
    point = _as_point(p)
    if M is not None and M != field.M:
        raise InputError(f"group size {M} does not match the field's M = {field.M}")
    if trials < 1:
        raise InputError(f"trials must be >= 1, got {trials}")
    rng = np.random.default_rng(Config.DEFAULT_SEED if seed is None else seed)
    draws = rng.multinomial(field.M - 1, point.probs, size=trials)

    means = np.empty(field.K)
    errors = np.zeros(field.K)
    for k in range(1, field.K + 1):
        if use_estimator:
            samples = _estimator_samples(field, k, draws)
        else:
            samples = np.atleast_1d(field(k, draws))
        means[k - 1] = samples.mean()
        if trials > 1:
            errors[k - 1] = samples.std(ddof=1) / math.sqrt(trials)
    return MonteCarloEstimate(means, errors, trials)


def _estimator_samples(field, k, draws):
    """Advantage of a level-k rollout in each group draws[t] + e_k."""
    samples = np.empty(len(draws))
    for t, counts in enumerate(draws):
        full = counts.copy()
        full[k - 1] += 1
        group = reconstruct_group(field.scale, full)
        advantages = compute_advantages(group, field.kind.value, field.norm, field.weights)
        samples[t] = advantages.values[group.level_indices.index(k)]
    return samples


def objective_gradient_check(p, scale, M, h=1e-6, norm=NormalizationKind.STD_DEV):
    """
    Compare field differences with finite differences of J along e_k - e_1.

    Returns:
        dict: 'finite_difference' (already multiplied by FIELD_SCALE),
        'field_difference' and 'relative_error', each over k = 2..K
    """
    point = _as_point(p)
    update = objective_update_field(point, scale, M, norm)
    finite = np.empty(scale.K - 1)
    for k in range(2, scale.K + 1):
        direction = np.zeros(scale.K)
        direction[k - 1], direction[0] = 1.0, -1.0
        forward = arcsin_objective(_perturbed(point.probs + h * direction), scale)
        backward = arcsin_objective(_perturbed(point.probs - h * direction), scale)
        finite[k - 2] = FIELD_SCALE * (forward - backward) / (2.0 * h)
    field_difference = update.relative[1:]
    return {
        'finite_difference': finite,
        'field_difference': field_difference,
        'relative_error': np.abs(field_difference - finite) / np.abs(finite),
    }


def _perturbed(probs):
    if np.any(probs < 0):
        raise InputError("finite-difference step leaves the simplex; move the point inward")
    return SimplexPoint(probs / probs.sum())


def objective_table(p_values, M, norm=NormalizationKind.STD_DEV):
    """Rows of P, beta, alpha, beta - alpha and the arcsin derivative."""
    rows = []
    for P in p_values:
        beta, alpha = beta_alpha(float(P), M, norm)
        rows.append({'P': float(P), 'beta': beta, 'alpha': alpha,
                     'beta_minus_alpha': beta - alpha, 'arcsin_grad': arcsin_gradient(P)})
    return rows


def enumerate_masses(k, n, p, limit=None):
    """Statistics of S_n with their multinomial masses."""
    stats = enumerate_statistics(k, n, Config.ENUMERATION_LIMIT if limit is None else limit)
    return stats, multinomial_table(stats, p)
