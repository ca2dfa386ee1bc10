import math

import numpy as np
import pytest

from vistest import photostat as ps
from vistest import simkit as sk
from vistest.util import DomainError


def tables(v1=0.98, v2=0.56, energy=6.3, truncation=15):
    params = ps.DetectionParams(energy, 0.0, truncation)
    return (ps.joint_random_phase(params, v1),
            ps.joint_random_phase(params, v2))


class TestDatasetRng:
    def test_keyed_streams_are_independent_of_order(self):
        a_first = sk.dataset_rng(7, 1, 0).random(3)
        b = sk.dataset_rng(7, 1, 1).random(3)
        a_again = sk.dataset_rng(7, 1, 0).random(3)
        assert np.array_equal(a_first, a_again)
        assert not np.array_equal(a_first, b)

    def test_distinct_hypothesis_keys_differ(self):
        assert not np.array_equal(sk.dataset_rng(7, 1, 0).random(3),
                                  sk.dataset_rng(7, 2, 0).random(3))


class TestSampleDataset:
    def test_shape_and_range(self):
        rng = sk.dataset_rng(0, 0)
        data = sk.sample_dataset(rng, 6.3, 0.56, 15, 500)
        assert data.shape == (500, 2)
        assert data.min() >= 0
        assert data.max() <= 15

    def test_clamped_at_truncation(self):
        rng = sk.dataset_rng(0, 0)
        data = sk.sample_dataset(rng, 30.0, 0.0, 3, 200)
        assert data.max() == 3

    def test_zero_energy_all_vacuum(self):
        rng = sk.dataset_rng(0, 0)
        data = sk.sample_dataset(rng, 0.0, 0.5, 5, 50)
        assert not data.any()

    def test_sample_mean_matches_model(self):
        rng = sk.dataset_rng(42, 0)
        data = sk.sample_dataset(rng, 6.3, 0.56, 40, 200_000)
        # with effectively no clamping the total mean is the energy
        assert data.sum(axis=1).mean() == pytest.approx(6.3, abs=0.03)

    def test_empirical_distribution_matches_table(self):
        rng = sk.dataset_rng(3, 0)
        k = 8
        data = sk.sample_dataset(rng, 2.0, 0.9, k, 400_000)
        table = ps.joint_random_phase(ps.DetectionParams(2.0, 0.0, k), 0.9).probs
        freq = np.bincount(data[:, 0] * (k + 1) + data[:, 1],
                           minlength=(k + 1) ** 2).reshape(k + 1, k + 1) / len(data)
        tv = 0.5 * np.abs(freq - table).sum()
        assert tv < 0.005

    def test_negative_energy_rejected(self):
        with pytest.raises(DomainError):
            sk.sample_dataset(sk.dataset_rng(0, 0), -1.0, 0.5, 5, 10)


class TestSampleOutcome:
    def test_single_trial(self):
        outcome = sk.sample_outcome(sk.dataset_rng(1, 0), 6.3, 0.56, 15)
        assert isinstance(outcome, sk.TrialOutcome)
        assert 0 <= outcome.k_plus <= 15
        assert 0 <= outcome.k_minus <= 15


class TestLogLikelihoodRatio:
    def test_empty_dataset_is_zero(self):
        p1, p2 = tables()
        assert sk.log_likelihood_ratio([], p1, p2) == 0.0

    def test_additive_over_trials(self):
        p1, p2 = tables()
        single = sk.log_likelihood_ratio([(2, 3)], p1, p2)
        double = sk.log_likelihood_ratio([(2, 3), (2, 3)], p1, p2)
        assert double == pytest.approx(2.0 * single)

    def test_matches_direct_table_lookup(self):
        p1, p2 = tables()
        value = sk.log_likelihood_ratio([(0, 0), (5, 1)], p1, p2)
        expected = (math.log(p1.probs[0, 0]) - math.log(p2.probs[0, 0])
                    + math.log(p1.probs[5, 1]) - math.log(p2.probs[5, 1]))
        assert value == pytest.approx(expected, rel=1e-12)

    def test_out_of_range_outcome_rejected(self):
        p1, p2 = tables(truncation=4)
        with pytest.raises(DomainError):
            sk.log_likelihood_ratio([(5, 0)], p1, p2)

    def test_truncation_mismatch_rejected(self):
        p1, _ = tables(truncation=15)
        _, p2 = tables(truncation=8)
        with pytest.raises(DomainError):
            sk.log_likelihood_ratio([(0, 0)], p1, p2)


class TestNeymanPearson:
    def test_decides_for_likelier_hypothesis(self):
        p1, p2 = tables()
        # near-equal counts favor low visibility; lopsided counts favor high
        assert sk.neyman_pearson([(3, 3)], p1, p2) is sk.Decision.V2
        assert sk.neyman_pearson([(6, 0)], p1, p2) is sk.Decision.V1

    def test_tie_goes_to_v2(self):
        p1, p2 = tables()
        assert sk.neyman_pearson([], p1, p2) is sk.Decision.V2


class TestEstimateError:
    def test_reproducible(self):
        p1, p2 = tables()
        cfg1 = sk.ExperimentConfig(0.98, 6.3, 15, 5, 300, 11)
        cfg2 = sk.ExperimentConfig(0.56, 6.3, 15, 5, 300, 11)
        first = sk.estimate_error(cfg1, cfg2, p1, p2)
        second = sk.estimate_error(cfg1, cfg2, p1, p2)
        assert first == second

    def test_mean_is_average_of_conditionals(self):
        p1, p2 = tables()
        cfg1 = sk.ExperimentConfig(0.98, 6.3, 15, 3, 400, 5)
        cfg2 = sk.ExperimentConfig(0.56, 6.3, 15, 3, 400, 5)
        est = sk.estimate_error(cfg1, cfg2, p1, p2)
        assert est.error_mean == pytest.approx(
            (est.conditional_v1_given_v2 + est.conditional_v2_given_v1) / 2.0)
        assert est.error_std == pytest.approx(
            math.sqrt(est.error_mean * (1.0 - est.error_mean) / 400.0))

    def test_error_decreases_with_repetitions(self):
        p1, p2 = tables()
        means = []
        for n in (1, 5, 20):
            cfg1 = sk.ExperimentConfig(0.98, 6.3, 15, n, 2000, 77)
            cfg2 = sk.ExperimentConfig(0.56, 6.3, 15, n, 2000, 77)
            means.append(sk.estimate_error(cfg1, cfg2, p1, p2).error_mean)
        assert means[0] > means[1] > means[2]

    def test_identical_hypotheses_coin_flip(self):
        p1, _ = tables()
        cfg = sk.ExperimentConfig(0.98, 6.3, 15, 4, 4000, 9)
        est = sk.estimate_error(cfg, cfg, p1, p1)
        se = math.sqrt(0.25 / 4000.0)
        assert abs(est.error_mean - 0.5) <= 3.0 * se

    def test_mismatched_configs_rejected(self):
        p1, p2 = tables()
        cfg1 = sk.ExperimentConfig(0.98, 6.3, 15, 5, 300, 1)
        cfg2 = sk.ExperimentConfig(0.56, 6.3, 15, 6, 300, 1)
        with pytest.raises(DomainError):
            sk.estimate_error(cfg1, cfg2, p1, p2)


class TestWorstCaseSweep:
    def test_single_point_grid_matches_estimate(self):
        p1, p2 = tables()
        cfg = sk.ExperimentConfig(0.56, 6.3, 15, 4, 500, 13)
        band = sk.worst_case_sweep(0.98, [0.56], 0.56, cfg)
        cfg1 = sk.ExperimentConfig(0.98, 6.3, 15, 4, 500, 13)
        direct = sk.estimate_error(cfg1, cfg, p1, p2)
        assert band.estimates[0] == direct
        assert band.band_lo == band.band_hi == direct.error_mean

    def test_band_envelope(self):
        cfg = sk.ExperimentConfig(0.0, 6.3, 15, 4, 400, 21)
        band = sk.worst_case_sweep(0.98, [0.0, 0.28, 0.56], 0.56, cfg)
        means = [e.error_mean for e in band.estimates]
        assert band.band_lo == min(means)
        assert band.band_hi == max(means)
        assert len(band.estimates) == 3

    def test_lower_true_visibility_is_easier(self):
        # the designed test separates better when the truth is farther away
        cfg = sk.ExperimentConfig(0.0, 6.3, 15, 10, 2000, 31)
        band = sk.worst_case_sweep(0.98, [0.0, 0.56], 0.56, cfg)
        assert (band.estimates[0].conditional_v1_given_v2
                <= band.estimates[1].conditional_v1_given_v2)

    def test_designed_point_must_be_grid_maximum(self):
        cfg = sk.ExperimentConfig(0.0, 6.3, 15, 2, 50, 1)
        with pytest.raises(DomainError):
            sk.worst_case_sweep(0.98, [0.0, 0.28], 0.56, cfg)


class TestExperimentConfig:
    def test_validation(self):
        with pytest.raises(DomainError):
            sk.ExperimentConfig(1.5, 6.3, 15, 1, 1, 0)
        with pytest.raises(DomainError):
            sk.ExperimentConfig(0.5, 6.3, 15, 0, 1, 0)
