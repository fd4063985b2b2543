import pytest

from autoreview.core import (
    Criticality,
    NOT_PROVIDED,
    Strategy,
    Verdict,
)
from autoreview.corpus import index_records
from autoreview.evaluation import correct_call
from autoreview.pipeline import review_corpus, evaluate_decisions
from autoreview.review import (
    DEFAULT_POLICY,
    compute_verification_features,
    extract_direct,
    review_call,
    verify_direct,
)


@pytest.fixture(scope="module")
def corrected_test(small_corpus, small_models, specs):
    calls, records = small_corpus["test"]
    corrected = [correct_call(c, specs, small_models.channel) for c in calls]
    return corrected, records


class TestExtractDirect:
    def test_exact_match_approves(self, corrected_test, specs):
        calls, records = corrected_test
        indexed = index_records(records)
        approvals = flags = 0
        for call in calls[:40]:
            for field_id, spec in specs.items():
                record = indexed[(call.call_id, field_id)]
                decision = extract_direct(call, spec, record.live_call_value)
                if decision.verdict == Verdict.AUTO_APPROVE:
                    approvals += 1
                    assert decision.post_call_value is not None
                    assert decision.score == 1.0
                else:
                    flags += 1
        assert approvals > 0 and flags > 0

    def test_mismatch_flags(self, corrected_test, specs):
        calls, _ = corrected_test
        decision = extract_direct(calls[0], specs["GroupNumber"], "ZZZZZZ999")
        assert decision.verdict == Verdict.FLAG_FOR_HUMAN

    def test_sentinel_post_call_never_matches_value(self, specs):
        from autoreview.core import CallTranscript, Speaker, Utterance

        call = CallTranscript(
            call_id="empty", utterances=(Utterance(0, Speaker.AGENT, ("hello",)),)
        )
        decision = extract_direct(call, specs["GroupNumber"], "AD0156")
        assert decision.post_call_value == NOT_PROVIDED
        assert decision.verdict == Verdict.FLAG_FOR_HUMAN

    def test_approval_implies_exact_match_feature(
        self, corrected_test, specs, small_models
    ):
        calls, records = corrected_test
        indexed = index_records(records)
        for call in calls[:40]:
            for field_id, spec in specs.items():
                record = indexed[(call.call_id, field_id)]
                decision = extract_direct(call, spec, record.live_call_value)
                if decision.verdict == Verdict.AUTO_APPROVE:
                    features, _, _ = compute_verification_features(
                        call,
                        spec,
                        record.live_call_value,
                        small_models.detector,
                        small_models.verifier.length_stats,
                    )
                    assert features.ned_live_vs_candidate == 0.0


class TestVerifyDirect:
    def test_exact_live_value_approved_with_high_score(
        self, corrected_test, specs, small_models
    ):
        calls, records = corrected_test
        indexed = index_records(records)
        checked = 0
        for call in calls:
            for field_id, spec in specs.items():
                record = indexed[(call.call_id, field_id)]
                decision = extract_direct(call, spec, record.live_call_value)
                if decision.verdict != Verdict.AUTO_APPROVE:
                    continue
                verified = verify_direct(
                    call, spec, record.live_call_value, small_models.detector, small_models.verifier
                )
                assert verified.verdict == Verdict.AUTO_APPROVE
                checked += 1
            if checked > 60:
                break
        assert checked > 30

    def test_score_within_unit_interval(self, corrected_test, specs, small_models):
        calls, records = corrected_test
        indexed = index_records(records)
        for call in calls[:20]:
            for field_id, spec in specs.items():
                record = indexed[(call.call_id, field_id)]
                decision = verify_direct(
                    call, spec, record.live_call_value, small_models.detector, small_models.verifier
                )
                assert 0.0 <= decision.score <= 1.0
                if decision.verdict == Verdict.AUTO_APPROVE:
                    assert decision.score >= small_models.verifier.threshold


class TestStrategyTradeoff:
    def test_precision_recall_direction(self, small_corpus, small_models, specs):
        calls, records = small_corpus["test"]
        extract = review_corpus(
            calls, records, specs, small_models, Strategy.DIRECT_EXTRACTION
        )
        verify = review_corpus(
            calls, records, specs, small_models, Strategy.DIRECT_VERIFICATION
        )
        r_extract = evaluate_decisions(extract, records)
        r_verify = evaluate_decisions(verify, records)
        assert r_extract.average.precision >= r_verify.average.precision
        assert r_verify.average.recall >= r_extract.average.recall

    def test_determinism(self, small_corpus, small_models, specs):
        calls, records = small_corpus["test"]
        first = review_corpus(calls[:30], records, specs, small_models, Strategy.HYBRID)
        second = review_corpus(calls[:30], records, specs, small_models, Strategy.HYBRID)
        assert first == second


class TestReviewCall:
    def test_hybrid_routes_by_criticality(self, corrected_test, specs, small_models):
        calls, records = corrected_test
        indexed = index_records(records)
        decisions = review_call(
            calls[0], indexed, specs, small_models.detector, small_models.verifier,
            strategy=Strategy.HYBRID,
        )
        assert len(decisions) == len(specs)
        assert all(d.strategy == Strategy.HYBRID for d in decisions)

    def test_default_policy_covers_both_criticalities(self):
        assert DEFAULT_POLICY[Criticality.CRITICAL] == Strategy.DIRECT_EXTRACTION
        assert DEFAULT_POLICY[Criticality.NON_CRITICAL] == Strategy.DIRECT_VERIFICATION

    def test_single_strategy_applied_to_all_fields(self, corrected_test, specs, small_models):
        calls, records = corrected_test
        indexed = index_records(records)
        decisions = review_call(
            calls[0], indexed, specs, small_models.detector, small_models.verifier,
            strategy=Strategy.DIRECT_EXTRACTION,
        )
        assert all(d.strategy == Strategy.DIRECT_EXTRACTION for d in decisions)
