"""Auto-review decision layer: approve a live-call value or flag it.

Direct verification scores documented features with a trained classifier
and approves above a calibrated threshold. Direct extraction re-extracts
the value and approves only on an exact normalized match. The hybrid
policy routes critical fields through extraction and the rest through
verification.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import (
    CallTranscript,
    Criticality,
    FieldRecord,
    FieldSpec,
    NOT_PROVIDED,
    ReviewDecision,
    Strategy,
    Verdict,
    normalized_edit_distance,
)
from .correction import NoiseDetector, TrainingError, detect_noise
from .extraction import BuiltinExtractionBackend, ExtractionBackend, assemble_candidate, normalize_lenient
from .isolation import isolate_field_utterances
from .learn import LogisticModel, choose_threshold_max_f1, fit_logistic


@dataclass(frozen=True)
class VerificationFeatures:
    format_match: bool
    ned_live_vs_candidate: float
    aed_flag: bool
    agreement: float
    length_z: float

    def vector(self) -> list[float]:
        return [
            1.0 if self.format_match else 0.0,
            self.ned_live_vs_candidate,
            1.0 if self.aed_flag else 0.0,
            self.agreement,
            abs(self.length_z),
        ]


@dataclass(frozen=True)
class FieldLengthStats:
    mean: float
    std: float

    def z(self, length: int) -> float:
        return (length - self.mean) / self.std if self.std > 1e-9 else 0.0


@dataclass(frozen=True)
class Verifier:
    model: LogisticModel
    threshold: float
    length_stats: dict[str, FieldLengthStats]

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "threshold": self.threshold,
            "length_stats": {
                fid: {"mean": s.mean, "std": s.std} for fid, s in sorted(self.length_stats.items())
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Verifier":
        return cls(
            model=LogisticModel.from_dict(data["model"]),
            threshold=data["threshold"],
            length_stats={
                fid: FieldLengthStats(mean=s["mean"], std=s["std"])
                for fid, s in data["length_stats"].items()
            },
        )


def length_stats_from_records(records: Sequence[FieldRecord]) -> dict[str, FieldLengthStats]:
    by_field: dict[str, list[int]] = {}
    for record in records:
        if record.live_call_value != NOT_PROVIDED:
            by_field.setdefault(record.field_id, []).append(len(record.live_call_value))
    stats = {}
    for fid, lengths in by_field.items():
        arr = np.array(lengths, dtype=float)
        stats[fid] = FieldLengthStats(mean=float(arr.mean()), std=float(arr.std()))
    return stats


def value_distance(a: str, b: str) -> float:
    """NED with sentinel handling: a sentinel matches only a sentinel."""
    if a == NOT_PROVIDED or b == NOT_PROVIDED:
        return 0.0 if a == b else 1.0
    return normalized_edit_distance(a, b)


def compute_verification_features(
    call: CallTranscript,
    spec: FieldSpec,
    live_value: str,
    detector: NoiseDetector,
    length_stats: dict[str, FieldLengthStats],
    backend: Optional[ExtractionBackend] = None,
) -> tuple[VerificationFeatures, str, tuple[int, ...]]:
    """Features plus the post-call candidate and evidence indices."""
    backend = backend or BuiltinExtractionBackend()
    isolated = isolate_field_utterances(call, spec)
    texts = [call.utterances[i].best for i in isolated.utterance_indices]
    candidate = backend.extract(texts, spec) if texts else NOT_PROVIDED

    bearing_index: Optional[int] = None
    for index in isolated.utterance_indices:
        if assemble_candidate(call.utterances[index].best, spec) is not None:
            bearing_index = index
    if bearing_index is None and isolated.utterance_indices:
        bearing_index = isolated.utterance_indices[-1]
    if bearing_index is not None:
        alternatives = call.utterances[bearing_index].alternatives
        aed_flag, _ = detect_noise(alternatives, detector, spec)
        agreement = sum(1 for alt in alternatives if alt == alternatives[0]) / len(alternatives)
    else:
        aed_flag, agreement = False, 1.0

    live_norm = normalize_lenient(live_value, spec)
    stats = length_stats.get(spec.field_id, FieldLengthStats(mean=0.0, std=0.0))
    # "not provided" is an acceptable answer, not a malformed value, and has
    # no meaningful length.
    is_sentinel = live_value == NOT_PROVIDED
    features = VerificationFeatures(
        format_match=True if is_sentinel else spec.matches_format(live_norm),
        ned_live_vs_candidate=value_distance(live_norm, candidate),
        aed_flag=aed_flag,
        agreement=agreement,
        length_z=0.0 if is_sentinel else stats.z(len(live_value)),
    )
    return features, candidate, isolated.utterance_indices


def train_verifier(
    corrected_calls: Sequence[CallTranscript],
    records: Sequence[FieldRecord],
    specs: dict[str, FieldSpec],
    detector: NoiseDetector,
    validation_calls: Sequence[CallTranscript] = (),
    validation_records: Sequence[FieldRecord] = (),
) -> Verifier:
    """Fit the feature classifier on (live == gold) labels.

    The threshold maximizing F1 comes from the validation split when one
    is provided, otherwise from the training features themselves.
    """
    length_stats = length_stats_from_records(records)

    def build(calls, recs):
        by_call = {c.call_id: c for c in calls}
        xs, ys = [], []
        for record in recs:
            if record.gold_value is None:
                continue
            call = by_call.get(record.call_id)
            if call is None:
                continue
            spec = specs[record.field_id]
            features, _, _ = compute_verification_features(
                call, spec, record.live_call_value, detector, length_stats
            )
            xs.append(features.vector())
            ys.append(1.0 if record.live_call_value == record.gold_value else 0.0)
        return np.array(xs, dtype=float), np.array(ys, dtype=float)

    train_x, train_y = build(corrected_calls, records)
    if len(train_x) == 0:
        raise TrainingError("verifier needs training records with gold values")
    try:
        model = fit_logistic(train_x, train_y, l2=1.0)
    except ValueError as err:
        raise TrainingError(str(err)) from err
    if validation_calls and validation_records:
        val_x, val_y = build(validation_calls, validation_records)
    else:
        val_x, val_y = train_x, train_y
    threshold = choose_threshold_max_f1(model.scores(val_x), val_y)
    return Verifier(model=model, threshold=threshold, length_stats=length_stats)


def verify_direct(
    corrected_call: CallTranscript,
    spec: FieldSpec,
    live_value: str,
    detector: NoiseDetector,
    verifier: Verifier,
) -> ReviewDecision:
    """Discriminative review: is the live value correct, yes or no."""
    features, candidate, evidence = compute_verification_features(
        corrected_call, spec, live_value, detector, verifier.length_stats
    )
    score = verifier.model.score_one(features.vector())
    verdict = Verdict.AUTO_APPROVE if score >= verifier.threshold else Verdict.FLAG_FOR_HUMAN
    return ReviewDecision(
        call_id=corrected_call.call_id,
        field_id=spec.field_id,
        verdict=verdict,
        strategy=Strategy.DIRECT_VERIFICATION,
        score=score,
        evidence=evidence,
        post_call_value=candidate,
    )


def extract_direct(
    corrected_call: CallTranscript,
    spec: FieldSpec,
    live_value: str,
    backend: Optional[ExtractionBackend] = None,
) -> ReviewDecision:
    """Generative review: approve only on exact normalized match."""
    backend = backend or BuiltinExtractionBackend()
    isolated = isolate_field_utterances(corrected_call, spec)
    texts = [corrected_call.utterances[i].best for i in isolated.utterance_indices]
    post_call = backend.extract(texts, spec) if texts else NOT_PROVIDED
    live_norm = normalize_lenient(live_value, spec)
    distance = value_distance(live_norm, post_call)
    match = post_call == live_norm
    return ReviewDecision(
        call_id=corrected_call.call_id,
        field_id=spec.field_id,
        verdict=Verdict.AUTO_APPROVE if match else Verdict.FLAG_FOR_HUMAN,
        strategy=Strategy.DIRECT_EXTRACTION,
        score=1.0 - distance,
        evidence=isolated.utterance_indices,
        post_call_value=post_call,
    )


DEFAULT_POLICY = {
    Criticality.CRITICAL: Strategy.DIRECT_EXTRACTION,
    Criticality.NON_CRITICAL: Strategy.DIRECT_VERIFICATION,
}


def review_call(
    corrected_call: CallTranscript,
    records: dict[tuple[str, str], FieldRecord],
    specs: dict[str, FieldSpec],
    detector: NoiseDetector,
    verifier: Verifier,
    strategy: Strategy = Strategy.HYBRID,
    policy: Optional[dict[Criticality, Strategy]] = None,
    extraction_backend: Optional[ExtractionBackend] = None,
) -> list[ReviewDecision]:
    """Per-field decisions for one call under the chosen strategy."""
    policy = policy or DEFAULT_POLICY
    decisions = []
    for field_id in sorted(specs):
        spec = specs[field_id]
        record = records.get((corrected_call.call_id, field_id))
        if record is None:
            continue
        chosen = strategy
        if strategy == Strategy.HYBRID:
            chosen = policy[spec.criticality]
        if chosen == Strategy.DIRECT_VERIFICATION:
            decision = verify_direct(
                corrected_call, spec, record.live_call_value, detector, verifier
            )
        else:
            decision = extract_direct(
                corrected_call, spec, record.live_call_value, backend=extraction_backend
            )
        if strategy == Strategy.HYBRID:
            decision = ReviewDecision(
                call_id=decision.call_id,
                field_id=decision.field_id,
                verdict=decision.verdict,
                strategy=Strategy.HYBRID,
                score=decision.score,
                evidence=decision.evidence,
                post_call_value=decision.post_call_value,
            )
        decisions.append(decision)
    return decisions
