"""Turn (n-best list, gold field value) pairs into corrected-transcript
training data, without manually corrected transcripts.

Two steps per field-bearing utterance: pick the alternative whose
extracted value is closest to the gold value, then splice a spoken-form
rendering of the gold value over that alternative's value span. Every
retained example re-extracts to the gold value by construction; failures
are counted and excluded, never silently kept.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Protocol, Sequence

from .core import CallTranscript, FieldRecord, FieldSpec, NOT_PROVIDED, normalized_edit_distance
from .extraction import assemble_candidate, extract_value_from_text, normalize_lenient


class SelectionBackend(Protocol):
    def select(self, alternatives: Sequence[str], gold: str) -> Optional[int]: ...


class CorrectionBackend(Protocol):
    def correct(self, best_text: str, gold: str) -> Optional[str]: ...
from .fields import AGENT_NAME, NATO_TABLE, REFERENCE_NUMBER, standard_field_specs
from .isolation import isolate_field_utterances


class CorrectionFailure(ValueError):
    """The field-value span could not be located or repaired."""


@dataclass(frozen=True)
class PseudoLabelExample:
    call_id: str
    field_id: str
    utterance_index: int
    alternatives: tuple[str, ...]
    gold: str
    chosen_index: int
    corrected_text: str


@dataclass(frozen=True)
class AedExample:
    alternatives: tuple[str, ...]
    label: bool
    field_id: str = ""


def _value_distance(text: str, gold: str, spec: FieldSpec) -> float:
    extracted = extract_value_from_text(text, spec)
    if extracted == NOT_PROVIDED:
        return 1.0
    return normalized_edit_distance(extracted, normalize_lenient(gold, spec))


def select_best_alternative(
    alternatives: Sequence[str], gold: str, spec: FieldSpec
) -> int:
    """Index of the alternative whose extracted value is closest to gold.

    Ties break toward the lowest index, so the recognizer best wins when
    it is as good as any other hypothesis.
    """
    if not alternatives:
        raise ValueError("alternatives must be non-empty")
    if not gold:
        raise ValueError("gold must be non-empty")
    best_index = 0
    best_distance = _value_distance(alternatives[0], gold, spec)
    for i, alt in enumerate(alternatives[1:], start=1):
        distance = _value_distance(alt, gold, spec)
        if distance < best_distance:
            best_index, best_distance = i, distance
    return best_index


def _span_tokens(text: str, start: int, end: int) -> list[str]:
    return text[start:end].split()


def _render_gold(gold: str, spec: FieldSpec, span_tokens: list[str]) -> list[str]:
    """Spoken-form renderings of gold, most style-preserving first."""
    singles = sum(1 for t in span_tokens if len(t) == 1)
    spaced_style = span_tokens and singles / len(span_tokens) >= 0.6

    def spell_chars(chars: str) -> str:
        out = []
        for ch in chars:
            if ch.upper() == "O" and ch.isalpha():
                out.append(f"o as in {NATO_TABLE['O']}")
            else:
                out.append(ch.lower())
        return " ".join(out)

    if spec.field_id == AGENT_NAME:
        parts = gold.split(" ")
        first, initial = parts[0], parts[-1] if len(parts) > 1 else ""
        rendering = first.lower()
        if initial:
            rendering += " " + spell_chars(initial)
        return [rendering]
    if spec.field_id == REFERENCE_NUMBER:
        parts = gold.split(" ")
        if len(parts) == 3:
            first, initial, date = parts
            head = f"{first.lower()} {spell_chars(initial)}"
        else:
            head = " ".join(p.lower() for p in parts)
            date = ""
        had_compact_date = any(len(t) >= 4 and t.isdigit() for t in span_tokens)
        options = []
        if date:
            if had_compact_date:
                options.append(f"{head} {date}")
                options.append(f"{head} {' '.join(date)}")
            else:
                options.append(f"{head} {' '.join(date)}")
                options.append(f"{head} {date}")
        else:
            options.append(head)
        return options
    # group numbers and custom alphanumeric fields
    options = []
    if not spaced_style and gold.isdigit():
        options.append(gold)
        grouped = " ".join(gold[i : i + 3] for i in range(0, len(gold), 3))
        options.append(grouped)
    options.append(spell_chars(gold))
    return options


def correct_transcript(best_text: str, gold: str, spec: FieldSpec) -> str:
    """Splice a spoken rendering of gold over the value span of best_text.

    Surrounding words and their casing are preserved; the repaired text is
    verified to re-extract to gold before being returned.
    """
    if not gold:
        raise ValueError("gold must be non-empty")
    gold_canonical = normalize_lenient(gold, spec)
    if extract_value_from_text(best_text, spec) == gold_canonical:
        return best_text
    candidate = assemble_candidate(best_text, spec)
    if candidate is None:
        raise CorrectionFailure(
            f"no value span found in {best_text!r} for field {spec.field_id}"
        )
    span_tokens = _span_tokens(best_text, candidate.start, candidate.end)
    prefix = best_text[: candidate.start].rstrip()
    suffix = best_text[candidate.end :].lstrip()
    for rendering in _render_gold(gold, spec, span_tokens):
        corrected = " ".join(part for part in (prefix, rendering, suffix) if part)
        if extract_value_from_text(corrected, spec) == gold_canonical:
            return corrected
    raise CorrectionFailure(
        f"could not splice {gold!r} into {best_text!r} for field {spec.field_id}"
    )


def generate_pseudo_labels(
    calls: Iterable[CallTranscript],
    golds: Iterable[FieldRecord],
    specs: Optional[dict[str, FieldSpec]] = None,
    selection_backend: Optional[SelectionBackend] = None,
    correction_backend: Optional[CorrectionBackend] = None,
) -> tuple[list[PseudoLabelExample], int]:
    """One example per field-bearing utterance of every call with a gold value.

    Remote backends may handle selection and correction; a remote
    correction that fails the re-extraction audit is discarded and
    counted, never kept. The built-in splice guarantees the audit by
    construction.
    """
    specs = specs or standard_field_specs()
    gold_by_key: dict[tuple[str, str], str] = {}
    for record in golds:
        if record.gold_value and record.gold_value != NOT_PROVIDED:
            gold_by_key[(record.call_id, record.field_id)] = record.gold_value
    examples: list[PseudoLabelExample] = []
    skipped = 0
    for call in calls:
        for field_id, spec in specs.items():
            gold = gold_by_key.get((call.call_id, field_id))
            if gold is None:
                continue
            isolated = isolate_field_utterances(call, spec)
            gold_canonical = normalize_lenient(gold, spec)
            bearing: list[tuple[int, int, str]] = []
            for index in isolated.utterance_indices:
                utterance = call.utterances[index]
                chosen: Optional[int] = None
                if selection_backend is not None:
                    chosen = selection_backend.select(utterance.alternatives, gold)
                if chosen is None or not 0 <= chosen < len(utterance.alternatives):
                    chosen = select_best_alternative(utterance.alternatives, gold, spec)
                text = utterance.alternatives[chosen]
                # Lead-ins and acknowledgements have no value span and never
                # produce examples.
                if assemble_candidate(text, spec) is None:
                    continue
                bearing.append((index, chosen, text))
            for position, (index, chosen, text) in enumerate(bearing):
                # Only the utterance that determines the extracted value is
                # corrected toward gold; an earlier value the agent later
                # restated is a superseded statement, not the field value.
                is_determining = position == len(bearing) - 1
                if not is_determining and extract_value_from_text(text, spec) != gold_canonical:
                    continue
                corrected: Optional[str] = None
                if correction_backend is not None:
                    corrected = correction_backend.correct(text, gold)
                    if corrected is not None and (
                        extract_value_from_text(corrected, spec) != gold_canonical
                    ):
                        # remote output failing the audit is never kept
                        skipped += 1
                        continue
                if corrected is None:
                    try:
                        corrected = correct_transcript(text, gold, spec)
                    except CorrectionFailure:
                        skipped += 1
                        continue
                examples.append(
                    PseudoLabelExample(
                        call_id=call.call_id,
                        field_id=field_id,
                        utterance_index=index,
                        alternatives=tuple(call.utterances[index].alternatives),
                        gold=gold,
                        chosen_index=chosen,
                        corrected_text=corrected,
                    )
                )
    return examples, skipped


def derive_aed_labels(
    examples: Sequence[PseudoLabelExample], compare: str = "first"
) -> list[AedExample]:
    """Noise labels: True when the compared alternative differs from the
    pseudo-corrected transcript.

    ``compare="first"`` uses the recognizer best (alternatives[0]);
    ``compare="chosen"`` uses the alternative the correction was built on.
    """
    if compare not in ("first", "chosen"):
        raise ValueError(f"unknown compare mode {compare!r}")
    labeled = []
    for example in examples:
        reference = (
            example.alternatives[0]
            if compare == "first"
            else example.alternatives[example.chosen_index]
        )
        labeled.append(
            AedExample(
                alternatives=example.alternatives,
                label=reference != example.corrected_text,
                field_id=example.field_id,
            )
        )
    return labeled


def audit_examples(
    examples: Sequence[PseudoLabelExample],
    specs: Optional[dict[str, FieldSpec]] = None,
) -> list[PseudoLabelExample]:
    """Examples whose corrected text fails to re-extract to gold."""
    specs = specs or standard_field_specs()
    failures = []
    for example in examples:
        spec = specs[example.field_id]
        extracted = extract_value_from_text(example.corrected_text, spec)
        if extracted != normalize_lenient(example.gold, spec):
            failures.append(example)
    return failures
