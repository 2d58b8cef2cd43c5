import math

import numpy as np
import pytest

from odrpo.exceptions import InputError, TooLarge
from odrpo.models import EstimatorField, NormalizationKind, RewardScale, SimplexPoint, WeightScheme
from odrpo.services.objective import (FIELD_SCALE, arcsin_gradient, arcsin_objective, beta_alpha,
                                      expected_field, multinomial_pmf, objective_gradient_check,
                                      objective_table, objective_update_field,
                                      sampled_update_expectation)
from odrpo.utils.enumeration import iter_simplex


def test_multinomial_pmf_examples():
    p = SimplexPoint([0.2, 0.3, 0.5])
    assert multinomial_pmf((0, 4, 0), 4, p) == pytest.approx(0.3 ** 4)
    assert multinomial_pmf((1, 1), 2, [0.5, 0.5]) == pytest.approx(0.5)
    assert multinomial_pmf((1, 0), 1, [0.0, 1.0]) == 0.0
    with pytest.raises(InputError):
        multinomial_pmf((1, 1), 3, [0.5, 0.5])


def test_multinomial_pmf_normalizes():
    rng = np.random.default_rng(4)
    for K in range(2, 6):
        for n in range(0, 9):
            p = rng.dirichlet(np.ones(K))
            total = math.fsum(multinomial_pmf(s, n, p) for s in iter_simplex(K, n))
            assert total == pytest.approx(1.0, abs=1e-12)


def test_multinomial_pmf_log_space_agrees_with_exact():
    p = [0.1, 0.6, 0.3]
    s = (5, 12, 8)
    exact = math.factorial(25) / (math.factorial(5) * math.factorial(12) * math.factorial(8))
    exact *= 0.1 ** 5 * 0.6 ** 12 * 0.3 ** 8
    assert multinomial_pmf(s, 25, p) == pytest.approx(exact, rel=1e-10)


def test_beta_alpha_two_member_group():
    for P in (0.0, 0.2, 0.5, 0.9, 1.0):
        beta, alpha = beta_alpha(P, 2)
        assert beta == pytest.approx(1 - P)
        assert alpha == pytest.approx(-P)
        assert beta - alpha == pytest.approx(1.0)


def test_beta_alpha_point_mass():
    beta, alpha = beta_alpha(0.0, 7)
    assert beta == pytest.approx(math.sqrt(6.0))
    assert alpha == 0.0


def test_beta_alpha_large_group_limit():
    P = 0.3
    beta, alpha = beta_alpha(P, 512)
    limit = 1.0 / math.sqrt(P * (1 - P))
    assert abs((beta - alpha) - limit) / limit < 0.05
    # the field runs on pi times the derivative of the (2/pi)-normalized objective
    assert FIELD_SCALE * arcsin_gradient(P) == pytest.approx(limit)


def test_beta_alpha_rejects_out_of_range():
    with pytest.raises(InputError):
        beta_alpha(1.5, 4)
    with pytest.raises(InputError):
        beta_alpha(0.5, 1)


def test_arcsin_objective_examples():
    scale = RewardScale.from_k(4)
    assert arcsin_objective(SimplexPoint.vertex(4, 4), scale) == pytest.approx(3.0)
    assert arcsin_objective(SimplexPoint.vertex(4, 1), scale) == 0.0
    value = arcsin_objective([0.2, 0.3, 0.5], RewardScale.from_k(3))
    assert value == pytest.approx(2 / math.pi * (math.asin(math.sqrt(0.8)) + math.asin(math.sqrt(0.5))))


def test_arcsin_gradient_endpoints_are_infinite():
    assert math.isinf(arcsin_gradient(0.0))
    assert math.isinf(arcsin_gradient(1.0))
    assert arcsin_gradient(0.5) == pytest.approx(2 / math.pi)


def test_update_field_constant_and_two_member_groups():
    scale = RewardScale.from_k(5)
    p = SimplexPoint([0.1, 0.2, 0.3, 0.25, 0.15])
    update = objective_update_field(p, scale, 6)
    assert update.values[0] == pytest.approx(update.c_alpha)
    np.testing.assert_allclose(objective_update_field(p, scale, 2).relative, [0, 1, 2, 3, 4], atol=1e-12)
    with pytest.raises(InputError):
        objective_update_field(p, scale, 6, weights='gini-median')


@pytest.mark.parametrize('norm', list(NormalizationKind))
@pytest.mark.parametrize('weights', [WeightScheme.UNIT, WeightScheme.GINI])
def test_update_field_matches_enumeration(norm, weights):
    rng = np.random.default_rng(17)
    for K in range(2, 5):
        scale = RewardScale(tuple(np.cumsum(rng.uniform(0.5, 2.0, size=K))))
        for M in range(2, 6):
            p = SimplexPoint(rng.dirichlet(np.ones(K)))
            field = EstimatorField('odrpo', scale, M, norm, weights)
            enumerated = expected_field(field, p)
            reduced = objective_update_field(p, scale, M, norm, weights).values
            np.testing.assert_allclose(enumerated, reduced, atol=1e-10)


def test_expected_field_at_a_vertex():
    scale = RewardScale.from_k(3)
    field = EstimatorField('grpo', scale, 5)
    values = expected_field(field, SimplexPoint.vertex(3, 2))
    for k in range(1, 4):
        assert values[k - 1] == pytest.approx(field(k, (0, 4, 0)), abs=1e-14)


def test_expected_field_guard():
    field = EstimatorField('odrpo', RewardScale.from_k(10), 30)
    with pytest.raises(TooLarge):
        expected_field(field, SimplexPoint(np.full(10, 0.1)))


def test_grpo_binary_field_follows_arcsin_derivative():
    scale = RewardScale.from_k(2)
    field = EstimatorField('grpo', scale, 64)
    for P in (0.3, 0.5, 0.7):
        values = expected_field(field, [1 - P, P])
        target = FIELD_SCALE * arcsin_gradient(P)
        assert abs((values[1] - values[0]) - target) / target <= 0.10


@pytest.mark.parametrize('M, tolerance, probs', [
    (512, 0.02, [0.3, 0.3, 0.4]),
    (512, 0.02, [0.2, 0.3, 0.3, 0.2]),
    (512, 0.02, [0.1, 0.2, 0.2, 0.2, 0.2, 0.1]),
    (64, 0.10, [0.3, 0.3, 0.4]),
    (64, 0.10, [0.25, 0.25, 0.25, 0.25]),
])
def test_finite_differences_of_objective_match_update_field(M, tolerance, probs):
    scale = RewardScale.from_k(len(probs))
    check = objective_gradient_check(SimplexPoint(probs), scale, M)
    assert np.all(check['relative_error'] <= tolerance)


def test_monte_carlo_agrees_with_enumeration():
    field = EstimatorField('odrpo', RewardScale.from_k(3), 4)
    p = SimplexPoint([0.5, 0.3, 0.2])
    exact = expected_field(field, p)
    estimate = sampled_update_expectation(field, p, trials=10 ** 6, seed=7)
    assert np.all(np.abs(estimate.mean - exact) <= 3 * estimate.std_error)


def test_monte_carlo_point_mass_and_error_scaling():
    field = EstimatorField('grpo', RewardScale.from_k(3), 4)
    estimate = sampled_update_expectation(field, SimplexPoint.vertex(3, 3), trials=50, seed=1)
    np.testing.assert_allclose(estimate.mean, expected_field(field, SimplexPoint.vertex(3, 3)), atol=1e-12)
    assert np.all(estimate.std_error == 0.0)

    p = SimplexPoint([0.4, 0.35, 0.25])
    small = sampled_update_expectation(field, p, trials=100_000, seed=2)
    large = sampled_update_expectation(field, p, trials=200_000, seed=3)
    ratios = small.std_error / large.std_error
    np.testing.assert_allclose(ratios, math.sqrt(2), rtol=0.1)


@pytest.mark.parametrize('kind, weights', [('odrpo', 'gini-med'), ('grpo', 'unit'), ('maxrl', 'unit')])
def test_monte_carlo_through_the_group_estimator(kind, weights):
    field = EstimatorField(kind, RewardScale.from_k(3), 4, weights=weights)
    p = SimplexPoint([0.5, 0.3, 0.2])
    closed_form = sampled_update_expectation(field, p, trials=2000, seed=5)
    estimated = sampled_update_expectation(field, p, trials=2000, seed=5, use_estimator=True)
    np.testing.assert_allclose(estimated.mean, closed_form.mean, atol=1e-10)
    np.testing.assert_allclose(estimated.std_error, closed_form.std_error, atol=1e-10)


def test_objective_table_rows():
    rows = objective_table([0.0, 0.5, 1.0], 2)
    assert [row['beta_minus_alpha'] for row in rows] == pytest.approx([1.0, 1.0, 1.0])
    assert rows[1]['arcsin_grad'] == pytest.approx(2 / math.pi)
