import numpy as np
import pytest

from odrpo.exceptions import InputError, MeanTooSmall, TooLarge
from odrpo.models import (EstimatorField, EstimatorKind, LeaveOneOutStats, NormalizationKind,
                          RewardScale, WeightScheme)
from odrpo.services.estimators import grpo_advantage, maxrl_advantage, odrpo_advantage
from odrpo.services.reward_core import reconstruct_group
from odrpo.services.theory import (curl_report, curl_residual, f_grpo, f_maxrl, f_odrpo,
                                   failure_term, mac_scan, success_term)
from odrpo.utils.enumeration import enumerate_statistics, iter_simplex, simplex_size

SCALE_3 = RewardScale((1, 2, 3))


def test_grpo_field_examples():
    assert f_grpo(1, (0, 1, 0), SCALE_3, 2) == pytest.approx(-1.0)
    assert f_grpo(2, (0, 3, 0), SCALE_3, 4) == 0.0


def test_maxrl_field_examples():
    assert f_maxrl(1, (0, 1, 0), SCALE_3, 2) == pytest.approx(-1 / 3)
    assert f_maxrl(3, (0, 0, 2), SCALE_3, 3) == 0.0
    with pytest.raises(MeanTooSmall):
        f_maxrl(1, (1, 0), RewardScale((0.0, 1.0)), 2)


def test_binary_odrpo_field_is_success_failure_pair():
    scale = RewardScale.from_k(2)
    for M in range(2, 7):
        for s in iter_simplex(2, M - 1):
            assert f_odrpo(2, s, scale, M) == pytest.approx(float(success_term(s[1], M)))
            assert f_odrpo(1, s, scale, M) == pytest.approx(float(failure_term(s[1], M)))


def test_fields_accept_stacks():
    stats = enumerate_statistics(3, 4)
    stacked = f_odrpo(2, stats, SCALE_3, 5, weights='gini')
    assert stacked.shape == (stats.shape[0],)
    for row, value in zip(stats, stacked):
        assert f_odrpo(2, tuple(row), SCALE_3, 5, weights='gini') == pytest.approx(value, abs=1e-15)


def test_field_rejects_wrong_totals():
    with pytest.raises(InputError):
        f_grpo(1, (1, 1, 1), SCALE_3, 2)


def _rollout_at(group, k):
    return group.level_indices.index(k)


@pytest.mark.parametrize('scale_factory', [RewardScale.from_k, lambda K: RewardScale(tuple(0.5 + 1.5 * np.arange(K) ** 1.5))])
def test_fields_match_estimators_on_reconstructed_groups(scale_factory):
    for K in range(2, 5):
        scale = scale_factory(K)
        for M in range(2, 6):
            for s in iter_simplex(K, M - 1):
                for k in range(1, K + 1):
                    counts = list(s)
                    counts[k - 1] += 1
                    group = reconstruct_group(scale, counts)
                    i = _rollout_at(group, k)
                    assert f_grpo(k, s, scale, M) == pytest.approx(grpo_advantage(group).values[i], abs=1e-12)
                    assert f_maxrl(k, s, scale, M) == pytest.approx(maxrl_advantage(group).values[i], abs=1e-12)
                    for norm in NormalizationKind:
                        for weights in WeightScheme:
                            expected = odrpo_advantage(group, norm, weights).values[i]
                            assert f_odrpo(k, s, scale, M, norm, weights) == pytest.approx(expected, abs=1e-12)


def test_curl_constants():
    zero = LeaveOneOutStats.zeros(3)
    grpo = EstimatorField(EstimatorKind.GRPO, SCALE_3, 2)
    maxrl = EstimatorField(EstimatorKind.MAXRL, SCALE_3, 2)
    odrpo = EstimatorField(EstimatorKind.ODRPO, SCALE_3, 2)
    assert curl_residual(grpo, 1, 2, zero) == pytest.approx(-2.0, abs=1e-9)
    assert curl_residual(maxrl, 1, 2, zero) == pytest.approx(-1 / 15, abs=1e-9)
    assert abs(curl_residual(odrpo, 1, 2, zero)) < 1e-12


def test_curl_symmetries():
    field = EstimatorField('grpo', RewardScale.from_k(4), 4)
    for s in iter_simplex(4, 2):
        for i in range(1, 5):
            assert abs(curl_residual(field, i, i, s)) < 1e-12
            assert abs(curl_residual(field, i, 4, s)) < 1e-12
            for j in range(1, 5):
                assert curl_residual(field, i, j, s) == pytest.approx(-curl_residual(field, j, i, s), abs=1e-12)
    with pytest.raises(InputError):
        curl_residual(field, 1, 2, (1, 1, 1, 1))


def test_curl_report_matches_pointwise_residuals():
    field = EstimatorField('maxrl', RewardScale.from_k(4), 4)
    report = curl_report(field)
    expected = [abs(curl_residual(field, i, j, s))
                for i in range(1, 4) for j in range(i + 1, 4) for s in iter_simplex(4, 2)]
    assert report.residuals.size == len(expected)
    assert report.mac == pytest.approx(np.mean(expected), abs=1e-12)
    assert report.max_abs == pytest.approx(max(expected), abs=1e-12)
    assert 0 <= report.mac <= report.max_abs


def test_mac_scan_grpo_hand_case():
    (report,) = mac_scan('grpo', [3], [2])
    assert report.mac == pytest.approx(2.0)
    (report,) = mac_scan('maxrl', [3], [2])
    assert report.mac == pytest.approx(1 / 15)
    (report,) = mac_scan('grpo', [2], [4])
    assert report.mac == 0.0 and report.residuals.size == 0


@pytest.mark.parametrize('norm', list(NormalizationKind))
@pytest.mark.parametrize('weights', [WeightScheme.UNIT, WeightScheme.GINI])
def test_odrpo_fields_are_curl_free(norm, weights):
    reports = mac_scan('odrpo', range(2, 6), range(2, 7), norm=norm, weights=weights)
    assert len(reports) == 20
    assert max(report.max_abs for report in reports) <= 1e-9


def test_gini_median_couples_bins():
    (report,) = mac_scan('odrpo', [3], [3], weights='gini-median')
    assert report.mac > 1e-6


def test_mac_shape_for_grpo_and_maxrl():
    grpo = {(r.K, r.M): r.mac for r in mac_scan('grpo', range(2, 6), range(2, 7))}
    maxrl = {(r.K, r.M): r.mac for r in mac_scan('maxrl', range(2, 6), range(2, 7))}
    for K in range(3, 6):
        for M in range(2, 7):
            assert grpo[K, M] > 0 and maxrl[K, M] > 0
            if M > 2:
                assert grpo[K, M] <= grpo[K, M - 1] + 1e-12
                assert maxrl[K, M] <= maxrl[K, M - 1] + 1e-12
    for key in grpo:
        assert grpo[key] >= maxrl[key]


def test_mac_scan_threads_agree_with_serial():
    serial = mac_scan('grpo', range(2, 5), range(2, 5))
    threaded = mac_scan('grpo', range(2, 5), range(2, 5), threads=4)
    assert [r.to_dict() for r in serial] == [r.to_dict() for r in threaded]


def test_mac_scan_guard():
    assert simplex_size(10, 28) * 100 > 10 ** 7
    with pytest.raises(TooLarge):
        mac_scan('grpo', [10], [30])
    with pytest.raises(InputError):
        mac_scan('grpo', [1], [3])
