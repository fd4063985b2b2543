import pytest

from autoreview.core import Criticality, FieldSpec, NOT_PROVIDED
from autoreview.extraction import extract_value_from_text
from autoreview.fields import AGENT_NAME, GROUP_NUMBER, REFERENCE_NUMBER
from autoreview.pseudolabel import (
    AedExample,
    CorrectionFailure,
    PseudoLabelExample,
    audit_examples,
    correct_transcript,
    derive_aed_labels,
    generate_pseudo_labels,
    select_best_alternative,
)

DIGITS_SPEC = FieldSpec(
    field_id=GROUP_NUMBER,
    triggers=("x",),
    format_pattern=r"[A-Z0-9]{6,10}",
    criticality=Criticality.CRITICAL,
    normalization=("strip", "strip_separators", "upper"),
)


class TestSelectBestAlternative:
    def test_name_truncation_pair(self, specs):
        chosen = select_best_alternative(
            ["my name is rina a", "my name is sabrina a"], "Sabrina A", specs[AGENT_NAME]
        )
        assert chosen == 1

    def test_all_identical_ties_to_zero(self, specs):
        chosen = select_best_alternative(["a d 0 1 5 6"] * 4, "AD0156", specs[GROUP_NUMBER])
        assert chosen == 0

    def test_group_number_confusion_pair(self, specs):
        chosen = select_best_alternative(
            ["group number a d 0 1 5 6", "group number 8 d 0 1 5 6"],
            "AD0156",
            specs[GROUP_NUMBER],
        )
        assert chosen == 0

    def test_single_alternative_is_identity(self, specs):
        assert select_best_alternative(["whatever text"], "AD0156", specs[GROUP_NUMBER]) == 0

    def test_empty_alternatives_rejected(self, specs):
        with pytest.raises(ValueError):
            select_best_alternative([], "AD0156", specs[GROUP_NUMBER])


class TestCorrectTranscript:
    def test_name_splice(self, specs):
        corrected = correct_transcript("my name is rina a", "Sabrina A", specs[AGENT_NAME])
        assert corrected == "my name is sabrina a"

    def test_already_correct_unchanged(self, specs):
        text = "my name is sabrina a"
        assert correct_transcript(text, "Sabrina A", specs[AGENT_NAME]) == text

    def test_digit_splice(self):
        corrected = correct_transcript("reference is 10001234", "1001234", DIGITS_SPEC)
        assert corrected == "reference is 1001234"

    def test_surrounding_words_preserved(self, specs):
        corrected = correct_transcript(
            "okay so the group number is 8 d 0 1 5 6 thanks for waiting",
            "AD0156",
            specs[GROUP_NUMBER],
        )
        assert corrected.startswith("okay so the group number is")
        assert corrected.endswith("thanks for waiting")
        assert extract_value_from_text(corrected, specs[GROUP_NUMBER]) == "AD0156"

    def test_casing_of_untouched_text_preserved(self, specs):
        corrected = correct_transcript("my name is rina a", "Sabrina A", specs[AGENT_NAME])
        assert corrected.islower()

    def test_unlocatable_span_raises(self, specs):
        with pytest.raises(CorrectionFailure):
            correct_transcript("sure one moment please", "AD0156", specs[GROUP_NUMBER])

    def test_reextraction_postcondition_across_styles(self, specs):
        for text, gold, field_id in [
            ("the group number is 123 456 789", "987654321", GROUP_NUMBER),
            ("the group number is a as in alpha d 0 1 5 6", "XY0156", GROUP_NUMBER),
            ("the reference number is jaquaidia k 06012024", "Marisol B 11052024", REFERENCE_NUMBER),
            ("sure its sabrina a 0 6 0 1 2 0 2 4", "Sabrina A 06012024", REFERENCE_NUMBER),
            ("its jasmine thats j a s m i n last initial t", "Jasmin T", AGENT_NAME),
        ]:
            spec = specs[field_id]
            corrected = correct_transcript(text, gold, spec)
            assert extract_value_from_text(corrected, spec) == gold


class TestGeneratePseudoLabels:
    def test_corpus_examples_all_reextract(self, specs, small_corpus):
        calls, records = small_corpus["train"]
        examples, skipped = generate_pseudo_labels(calls, records, specs)
        assert examples
        assert skipped == 0
        assert audit_examples(examples, specs) == []

    def test_sentinel_gold_records_excluded(self, specs, small_corpus):
        calls, records = small_corpus["train"]
        examples, _ = generate_pseudo_labels(calls, records, specs)
        sentinel_keys = {
            (r.call_id, r.field_id) for r in records if r.gold_value == NOT_PROVIDED
        }
        assert all((e.call_id, e.field_id) not in sentinel_keys for e in examples)

    def test_chosen_index_in_range(self, specs, small_corpus):
        calls, records = small_corpus["train"]
        examples, _ = generate_pseudo_labels(calls, records, specs)
        assert all(0 <= e.chosen_index < len(e.alternatives) for e in examples)


def _example(alternatives, corrected, chosen=0, field_id=GROUP_NUMBER):
    return PseudoLabelExample(
        call_id="c",
        field_id=field_id,
        utterance_index=0,
        alternatives=tuple(alternatives),
        gold="AD0156",
        chosen_index=chosen,
        corrected_text=corrected,
    )


class TestAedLabels:
    # hand-built fixture: label is True exactly when alternatives[0]
    # differs from the pseudo-corrected transcript
    FIXTURE = [
        (_example(["a d 0 1 5 6"], "a d 0 1 5 6"), False),
        (_example(["8 d 0 1 5 6"], "a d 0 1 5 6"), True),
        (_example(["a d 0 1 5 6", "8 d 0 1 5 6"], "a d 0 1 5 6"), False),
        (_example(["a d 0 5 6", "a d 0 1 5 6"], "a d 0 1 5 6", chosen=1), True),
        (_example(["group is a d 0 1 5 6"], "group is a d 0 1 5 6"), False),
        (_example(["group is a d 0 0 1 5 6"], "group is a d 0 1 5 6"), True),
        (_example(["my name is rina a"], "my name is sabrina a", field_id=AGENT_NAME), True),
        (_example(["my name is sabrina a"], "my name is sabrina a", field_id=AGENT_NAME), False),
        (_example(["ref is 10001234"], "ref is 1001234", field_id=REFERENCE_NUMBER), True),
        (_example(["ref is 1001234"], "ref is 1001234", field_id=REFERENCE_NUMBER), False),
        (_example(["x y z 1 2 3"], "x y z 1 2 3"), False),
        (_example(["x y z 1 2"], "x y z 1 2 3"), True),
        (_example(["one two three"], "one two three"), False),
        (_example(["won two three"], "one two three"), True),
        (_example(["b for boy 9"], "b for boy 9"), False),
        (_example(["p for boy 9"], "b for boy 9"), True),
        (_example(["jane t"], "jane t", field_id=AGENT_NAME), False),
        (_example(["jane tea"], "jane t", field_id=AGENT_NAME), True),
        (_example(["0 0 7"], "0 0 7"), False),
        (_example(["0 7"], "0 0 7"), True),
    ]

    def test_fixture_is_twenty_examples(self):
        assert len(self.FIXTURE) == 20

    def test_rule_matches_fixture_exactly(self):
        examples = [e for e, _ in self.FIXTURE]
        expected = [label for _, label in self.FIXTURE]
        labeled = derive_aed_labels(examples)
        assert [a.label for a in labeled] == expected

    def test_chosen_mode_compares_chosen_alternative(self):
        example = _example(["a d 0 5 6", "a d 0 1 5 6"], "a d 0 1 5 6", chosen=1)
        assert derive_aed_labels([example], compare="first")[0].label is True
        assert derive_aed_labels([example], compare="chosen")[0].label is False

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValueError):
            derive_aed_labels([], compare="best")

    def test_empty_input_empty_output(self):
        assert derive_aed_labels([]) == []

    def test_zero_noise_base_rate_is_zero(self, specs, clean_corpus):
        calls, records = clean_corpus
        examples, skipped = generate_pseudo_labels(calls, records, specs)
        assert skipped == 0
        labels = derive_aed_labels(examples)
        assert sum(a.label for a in labels) == 0


class _SelectLast:
    def __init__(self):
        self.calls = 0

    def select(self, alternatives, gold):
        self.calls += 1
        return len(alternatives) - 1


class _EchoCorrection:
    """Remote stand-in that returns the text unchanged (fails the audit
    whenever the text does not already extract to gold)."""

    def __init__(self):
        self.calls = 0

    def correct(self, best_text, gold):
        self.calls += 1
        return best_text


class _BrokenCorrection:
    def correct(self, best_text, gold):
        return None


class TestRemoteBackends:
    def test_selection_backend_overrides_builtin_choice(self, specs, clean_corpus):
        calls, records = clean_corpus
        backend = _SelectLast()
        examples, _ = generate_pseudo_labels(
            calls[:20], records, specs, selection_backend=backend
        )
        assert backend.calls > 0
        # clean corpus: every alternative is identical, so the last index works
        assert all(e.chosen_index == len(e.alternatives) - 1 for e in examples)
        assert audit_examples(examples, specs) == []

    def test_remote_correction_failing_audit_is_discarded_and_counted(
        self, specs, small_corpus
    ):
        calls, records = small_corpus["train"]
        builtin_examples, builtin_skipped = generate_pseudo_labels(
            calls[:40], records, specs
        )
        echo = _EchoCorrection()
        examples, skipped = generate_pseudo_labels(
            calls[:40], records, specs, correction_backend=echo
        )
        assert echo.calls > 0
        # echoed texts pass only when already correct; the rest are discarded
        assert skipped > builtin_skipped
        assert len(examples) < len(builtin_examples)
        assert audit_examples(examples, specs) == []
        assert all(e.corrected_text == e.alternatives[e.chosen_index] for e in examples)

    def test_unreachable_remote_correction_falls_back_to_builtin(
        self, specs, clean_corpus
    ):
        calls, records = clean_corpus
        examples, skipped = generate_pseudo_labels(
            calls[:20], records, specs, correction_backend=_BrokenCorrection()
        )
        assert skipped == 0
        assert examples
        assert audit_examples(examples, specs) == []
