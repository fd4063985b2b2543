import random
import statistics

import pytest

from autoreview.core import NOT_PROVIDED, levenshtein, validate_call
from autoreview.simulator import (
    ConfigurationError,
    SimConfig,
    default_confusion_model,
    generate_corpus,
    generate_split,
    inject_noise,
    sample_live_call_value,
    solve_preclip_mean,
    _clipped_mean,
)


class TestConfig:
    def test_defaults_valid(self):
        SimConfig().validate()

    def test_bad_error_rate(self):
        with pytest.raises(ConfigurationError):
            SimConfig(error_rate={"AgentName": 1.5}).validate()

    def test_bad_n_alternatives(self):
        with pytest.raises(ConfigurationError):
            SimConfig(n_alternatives=11).validate()

    def test_zero_calls_gives_empty_corpus(self):
        corpus = generate_corpus(SimConfig(splits={"train": 0}))
        calls, records = corpus["train"]
        assert calls == [] and records == []


class TestInjectNoise:
    def test_zero_severity_identical_copies(self):
        model = default_confusion_model()
        hyps = inject_noise("my name is sabrina a", model, 5, 0.0, seed=3)
        assert hyps == ["my name is sabrina a"] * 5

    def test_hypothesis_count(self):
        model = default_confusion_model()
        assert len(inject_noise("group number 1 2 3", model, 7, 1.0, seed=3)) == 7

    def test_deterministic_per_seed(self):
        model = default_confusion_model()
        a = inject_noise("the group number is 1 2 3 4 5 6 0", model, 10, 1.5, seed=11)
        b = inject_noise("the group number is 1 2 3 4 5 6 0", model, 10, 1.5, seed=11)
        assert a == b

    def test_hypotheses_disagree_at_high_severity(self):
        model = default_confusion_model()
        hyps = inject_noise(
            "the group number is one two three four five six zero", model, 10, 4.0, seed=5
        )
        assert len(set(hyps)) > 1


class TestLiveValueSampling:
    def test_zero_error_rate_keeps_gold(self):
        cfg = SimConfig(error_rate={"GroupNumber": 0.0})
        rng = random.Random(1)
        assert sample_live_call_value("AD0156", "GroupNumber", cfg, rng) == "AD0156"

    def test_forced_corruption_hits_target_distance(self):
        cfg = SimConfig(error_rate={"GroupNumber": 1.0})
        rng = random.Random(2)
        changed = 0
        for _ in range(200):
            value = sample_live_call_value("AD0156", "GroupNumber", cfg, rng)
            if value != "AD0156":
                changed += 1
        assert changed == 200

    def test_clipped_mean_solver(self):
        for target, sigma, cap in ((3.23, 2.89, 12), (7.05, 6.43, 24), (3.76, 7.76, 16)):
            mu = solve_preclip_mean(target, sigma, cap)
            assert abs(_clipped_mean(mu, sigma, cap) - target) < 1e-6

    def test_corrupted_mean_tracks_target(self):
        cfg = SimConfig(error_rate={"ReferenceNumber": 1.0})
        rng = random.Random(3)
        distances = []
        for _ in range(4000):
            value = sample_live_call_value("Jaquaidia K 06012024", "ReferenceNumber", cfg, rng)
            distances.append(levenshtein(value, "Jaquaidia K 06012024"))
        assert abs(statistics.mean(distances) - 7.05) < 0.35

    def test_sentinel_gold_fabricates_value(self):
        cfg = SimConfig(error_rate={"AgentName": 1.0})
        rng = random.Random(4)
        value = sample_live_call_value(NOT_PROVIDED, "AgentName", cfg, rng)
        assert value != NOT_PROVIDED


class TestCorpusGeneration:
    def test_determinism(self):
        cfg = SimConfig(splits={"s": 15})
        a = generate_corpus(cfg)["s"]
        b = generate_corpus(cfg)["s"]
        assert a == b

    def test_different_seeds_differ(self):
        a = generate_split(SimConfig(seed=1), "s", 5)
        b = generate_split(SimConfig(seed=2), "s", 5)
        assert a != b

    def test_calls_are_valid(self):
        calls, _ = generate_split(SimConfig(), "s", 20)
        for call in calls:
            assert validate_call(call) == []

    def test_every_field_has_trigger_and_agent_answer(self, specs):
        from autoreview.core import Speaker
        from autoreview.isolation import isolate_field_utterances

        calls, records = generate_split(SimConfig(), "s", 20)
        by_key = {(r.call_id, r.field_id): r for r in records}
        for call in calls:
            for field_id, spec in specs.items():
                isolated = isolate_field_utterances(call, spec)
                assert isolated.utterance_indices, (call.call_id, field_id)
                assert all(
                    call.utterances[i].speaker == Speaker.AGENT
                    for i in isolated.utterance_indices
                )
                assert (call.call_id, field_id) in by_key

    def test_word_counts_near_configured_average(self):
        calls, _ = generate_split(SimConfig(), "s", 120)
        mean_words = statistics.mean(c.word_count for c in calls)
        assert 0.8 * 907 <= mean_words <= 1.2 * 907

    def test_zero_noise_zero_error_live_equals_gold(self, specs, clean_corpus):
        _, records = clean_corpus
        assert all(r.live_call_value == r.gold_value for r in records)

    def test_field_n_best_lists_have_configured_width(self):
        cfg = SimConfig(n_alternatives=4)
        calls, _ = generate_split(cfg, "s", 5)
        widths = {len(u.alternatives) for c in calls for u in c.utterances}
        assert 4 in widths
        assert max(widths) == 4

    def test_error_rates_converge(self, specs):
        # statistical calibration at modest scale; the acceptance suite
        # re-checks at 2,700 calls with the +-2 point tolerance
        calls, records = generate_split(SimConfig(), "cal2", 700)
        for field_id, target in (("AgentName", 0.108), ("ReferenceNumber", 0.129), ("GroupNumber", 0.098)):
            recs = [r for r in records if r.field_id == field_id]
            rate = sum(1 for r in recs if r.live_call_value != r.gold_value) / len(recs)
            assert abs(rate - target) <= 0.035, (field_id, rate)
