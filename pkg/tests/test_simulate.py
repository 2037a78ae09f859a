import math

import pytest

import doublespend.simulate as simulate_module
from doublespend import (
    AttackQuery,
    MiningPowerSplit,
    TrialConfig,
    TrialRecord,
    TrialStream,
    Variant,
    attack_success,
    catch_up_limited,
    empirical_catch_up,
    empirical_k_distribution,
    run_trials,
    simulate_trial,
)
from oracles import budgeted_race_law


def budgeted_model(q, z, surplus=35):
    return attack_success(AttackQuery(MiningPowerSplit(q), z, Variant.BUDGETED, surplus))


def three_sigma(p, n):
    return 3.0 * math.sqrt(p * (1.0 - p) / n)


class TestSingleTrial:
    def test_record_fields_are_consistent(self):
        config = TrialConfig(MiningPowerSplit(0.3), 3)
        for t in range(200):
            rec = simulate_trial(TrialStream(5, t), config)
            assert rec.k_during_wait >= 0
            assert rec.blocks_elapsed >= config.z
            assert not (rec.attacker_won and rec.capped)

    def test_replay_is_identical(self):
        config = TrialConfig(MiningPowerSplit(0.25), 4)
        first = [simulate_trial(TrialStream(11, t), config) for t in range(100)]
        second = [simulate_trial(TrialStream(11, t), config) for t in range(100)]
        assert first == second

    def test_zero_depth_skips_the_wait(self):
        config = TrialConfig(MiningPowerSplit(0.4), 0, budget_surplus=3)
        rec = simulate_trial(TrialStream(3, 0), config)
        assert rec.k_during_wait == 0
        assert rec.blocks_elapsed >= 1

    def test_tiny_cap_records_capped_trials(self):
        config = TrialConfig(MiningPowerSplit(0.5), 50, max_blocks=10)
        rec = simulate_trial(TrialStream(1, 0), config)
        assert rec.capped and not rec.attacker_won
        assert rec.blocks_elapsed == 10

    def test_record_rejects_capped_win(self):
        with pytest.raises(ValueError):
            TrialRecord(0, True, 5, True)


class TestRunTrials:
    def test_bit_identical_reruns(self):
        config = TrialConfig(MiningPowerSplit(0.3), 5)
        assert run_trials(config, 50_000, 42) == run_trials(config, 50_000, 42)

    def test_matches_scalar_engine_exactly(self):
        config = TrialConfig(MiningPowerSplit(0.3), 2, budget_surplus=5)
        wins = 0
        histogram: dict[int, int] = {}
        for t in range(3_000):
            rec = simulate_trial(TrialStream(99, t), config)
            wins += rec.attacker_won
            histogram[rec.k_during_wait] = histogram.get(rec.k_during_wait, 0) + 1
        agg = run_trials(config, 3_000, 99)
        assert agg.wins == wins
        assert agg.k_histogram == histogram
        assert agg.capped_count == 0

    def test_independent_of_batch_width(self, monkeypatch):
        config = TrialConfig(MiningPowerSplit(0.35), 3)
        whole = run_trials(config, 10_000, 7)
        monkeypatch.setattr(simulate_module, "_BATCH_TRIALS", 613)
        chunked = run_trials(config, 10_000, 7)
        assert whole == chunked

    def test_histogram_accounts_for_every_trial(self):
        result = run_trials(TrialConfig(MiningPowerSplit(0.2), 4), 25_000, 3)
        assert sum(result.k_histogram.values()) == result.trials
        assert result.capped_count == 0

    def test_hopeless_attacker_rarely_wins(self):
        result = run_trials(TrialConfig(MiningPowerSplit(0.001), 3), 10_000, 17)
        assert result.success_rate < 0.01

    def test_seed_changes_the_sample(self):
        config = TrialConfig(MiningPowerSplit(0.3), 3)
        assert run_trials(config, 20_000, 1) != run_trials(config, 20_000, 2)

    def test_win_rate_matches_race_law_q30_z5(self):
        # At (q=0.3, z=5, surplus=35) the budgeted *model* is 2.3 percentage
        # points below the race's true Bernoulli parameter (the Poisson
        # density is the culprit), so agreement is asserted against the exact
        # law, and the deviation from the model must carry the sign the
        # negative binomial predicts.
        config = TrialConfig(MiningPowerSplit(0.3), 5)
        result = run_trials(config, 100_000, 42)
        law = budgeted_race_law(0.3, 5)
        model = budgeted_model(0.3, 5)
        assert abs(result.success_rate - law) <= three_sigma(law, result.trials)
        assert abs(model - law) > three_sigma(law, result.trials)  # model bias is real
        assert (result.success_rate - model) * (law - model) > 0

    def test_win_rate_matches_budgeted_model_with_big_budget(self):
        # The model's Poisson bias at q=0.5, z=1 decays like 1/budget: 3.7e-3
        # at surplus 35 but 3.6e-4 (under one sigma at 2e4 trials) at 400, so
        # a direct 3-sigma check against the model is honest there.
        config = TrialConfig(MiningPowerSplit(0.5), 1, budget_surplus=400)
        result = run_trials(config, 20_000, 12)
        model = budgeted_model(0.5, 1, 400)
        assert result.capped_count == 0
        assert abs(result.success_rate - model) <= three_sigma(model, result.trials)

    def test_fair_race_small_sample_within_noise_of_model(self):
        config = TrialConfig(MiningPowerSplit(0.5), 1)
        result = run_trials(config, 3_000, 8)
        model = budgeted_model(0.5, 1)
        assert abs(result.success_rate - model) <= three_sigma(model, result.trials)

    @pytest.mark.parametrize("q", [0.1, 0.2, 0.3, 0.4])
    @pytest.mark.parametrize("z", [1, 3, 6])
    def test_grid_agreement_with_model_or_signed_exception(self, q, z):
        # Either the empirical rate sits within 3 sigma of the budgeted model,
        # or the Poisson approximation error dominates; then the deviation
        # must match the direction the exact negative-binomial law predicts.
        result = run_trials(TrialConfig(MiningPowerSplit(q), z), 100_000, 1234)
        model = budgeted_model(q, z)
        law = budgeted_race_law(q, z)
        band = three_sigma(max(model, 1e-12), result.trials)
        if abs(result.success_rate - model) > band:
            assert (result.success_rate - model) * (law - model) > 0
            assert abs(result.success_rate - law) <= three_sigma(law, result.trials)

    def test_mean_progress_matches_rate(self):
        result = run_trials(TrialConfig(MiningPowerSplit(0.25), 3), 100_000, 5)
        se = math.sqrt(result.k_variance / result.trials)
        assert abs(result.mean_k - 1.0) <= 3.0 * se

    def test_rejects_zero_trials(self):
        with pytest.raises(ValueError):
            run_trials(TrialConfig(MiningPowerSplit(0.3), 1), 0, 1)


class TestEmpiricalCatchUp:
    def test_single_block_deficit_matches_one_third(self):
        rate = empirical_catch_up(MiningPowerSplit(0.25), 1, 200, 100_000, 21)
        assert abs(rate - 1.0 / 3.0) <= three_sigma(1.0 / 3.0, 100_000)

    def test_zero_deficit_is_immediate_win(self):
        assert empirical_catch_up(MiningPowerSplit(0.25), 0, 50, 10, 0) == 1.0

    def test_matches_limited_catch_up_formula(self):
        power = MiningPowerSplit(0.4)
        expected = catch_up_limited(2, 50, power)
        rate = empirical_catch_up(power, 2, 50, 100_000, 33)
        assert abs(rate - expected) <= three_sigma(expected, 100_000)

    @pytest.mark.parametrize("q", [0.1, 0.2, 0.3, 0.4])
    @pytest.mark.parametrize("deficit", [1, 2, 3])
    def test_twelve_point_grid_within_three_sigma(self, q, deficit):
        power = MiningPowerSplit(q)
        expected = catch_up_limited(deficit, 35, power)
        rate = empirical_catch_up(power, deficit, 35, 50_000, 1009)
        assert abs(rate - expected) <= three_sigma(expected, 50_000)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            empirical_catch_up(MiningPowerSplit(0.3), -1, 10, 100, 0)
        with pytest.raises(ValueError):
            empirical_catch_up(MiningPowerSplit(0.3), 1, 0, 100, 0)


class TestEmpiricalKDistribution:
    def test_mean_tracks_the_rate(self):
        dist = empirical_k_distribution(MiningPowerSplit(0.25), 3, 1_000_000, 77)
        mean = sum(k * w for k, w in dist.items())
        assert abs(mean - 1.0) < 0.01

    def test_mass_at_zero_is_negative_binomial_not_poisson(self):
        dist = empirical_k_distribution(MiningPowerSplit(0.25), 3, 1_000_000, 78)
        expected = 0.75**3  # 0.421875
        assert abs(dist[0] - expected) <= three_sigma(expected, 1_000_000)
        assert abs(dist[0] - math.exp(-1.0)) > 10.0 * math.sqrt(
            expected * (1 - expected) / 1_000_000
        )

    def test_weights_normalize(self):
        dist = empirical_k_distribution(MiningPowerSplit(0.3), 4, 50_000, 5)
        assert math.fsum(dist.values()) == pytest.approx(1.0, abs=1e-12)

    def test_vanishing_attacker_concentrates_at_zero(self):
        dist = empirical_k_distribution(MiningPowerSplit(1e-4), 3, 20_000, 6)
        assert dist[0] > 0.999

    @pytest.mark.parametrize("q", [0.1, 0.25, 0.4])
    def test_overdispersed_relative_to_poisson(self, q):
        power = MiningPowerSplit(q)
        dist = empirical_k_distribution(power, 6, 100_000, 91)
        mean = sum(k * w for k, w in dist.items())
        var = sum(k * k * w for k, w in dist.items()) - mean * mean
        rate = 6 * q / (1 - q)
        assert var > rate

    def test_rejects_zero_depth(self):
        with pytest.raises(ValueError):
            empirical_k_distribution(MiningPowerSplit(0.3), 0, 100, 0)
