"""End-to-end orchestration: train models, correct corpora, review, score.

All stages are deterministic given the corpus and seed; model files are
versioned structured text so a trained pipeline can be reloaded by the
CLI and the review service.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .core import CallTranscript, FieldRecord, FieldSpec, ReviewDecision, Strategy
from .correction import ChannelModel, NoiseDetector, train_channel_model, train_detector
from .corpus import index_records
from .evaluation import EvalReport, correct_call, score_reviews
from .fields import standard_field_specs
from .pseudolabel import derive_aed_labels, generate_pseudo_labels
from .review import Verifier, review_call, train_verifier

MODEL_FORMAT_VERSION = 1


@dataclass
class Models:
    channel: Optional[ChannelModel] = None
    detector: Optional[NoiseDetector] = None
    verifier: Optional[Verifier] = None

    def save(self, directory: Path) -> None:
        directory.mkdir(parents=True, exist_ok=True)
        payload = {
            "version": MODEL_FORMAT_VERSION,
            "channel": self.channel.to_dict() if self.channel else None,
            "detector": self.detector.to_dict() if self.detector else None,
            "verifier": self.verifier.to_dict() if self.verifier else None,
        }
        (directory / "models.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, directory: Path) -> "Models":
        payload = json.loads((directory / "models.json").read_text(encoding="utf-8"))
        if payload.get("version") != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model format version {payload.get('version')}")
        return cls(
            channel=ChannelModel.from_dict(payload["channel"]) if payload.get("channel") else None,
            detector=(
                NoiseDetector.from_dict(payload["detector"]) if payload.get("detector") else None
            ),
            verifier=Verifier.from_dict(payload["verifier"]) if payload.get("verifier") else None,
        )

    @classmethod
    def load_or_empty(cls, directory: Path) -> "Models":
        if (directory / "models.json").exists():
            return cls.load(directory)
        return cls()

    def require(self, *parts: str) -> None:
        for part in parts:
            if getattr(self, part) is None:
                raise ValueError(f"models directory is missing the trained {part} model")


@dataclass(frozen=True)
class TrainingSummary:
    pseudo_labels: int
    skipped: int
    aed_positive_rate: float


def train_models(
    train_calls: Sequence[CallTranscript],
    train_records: Sequence[FieldRecord],
    validation_calls: Sequence[CallTranscript] = (),
    validation_records: Sequence[FieldRecord] = (),
    specs: Optional[dict[str, FieldSpec]] = None,
) -> tuple[Models, TrainingSummary]:
    """Pseudo-labels -> channel model -> detector -> verifier."""
    specs = specs or standard_field_specs()
    examples, skipped = generate_pseudo_labels(train_calls, train_records, specs)
    channel = train_channel_model(examples)
    aed_examples = derive_aed_labels(examples)
    detector = train_detector(aed_examples, specs)
    corrected_train = [correct_call(call, specs, channel) for call in train_calls]
    corrected_val = [correct_call(call, specs, channel) for call in validation_calls]
    verifier = train_verifier(
        corrected_train,
        train_records,
        specs,
        detector,
        validation_calls=corrected_val,
        validation_records=validation_records,
    )
    summary = TrainingSummary(
        pseudo_labels=len(examples),
        skipped=skipped,
        aed_positive_rate=(
            sum(e.label for e in aed_examples) / len(aed_examples) if aed_examples else 0.0
        ),
    )
    return Models(channel=channel, detector=detector, verifier=verifier), summary


# Worker-pool state, populated once per forked worker.
_POOL_STATE: dict = {}


def _init_correct_worker(specs, channel) -> None:
    _POOL_STATE["specs"] = specs
    _POOL_STATE["channel"] = channel


def _correct_one(call: CallTranscript) -> CallTranscript:
    return correct_call(call, _POOL_STATE["specs"], _POOL_STATE["channel"])


def _pool_map(worker, initializer, initargs, items, workers: int) -> list:
    import multiprocessing

    chunksize = max(1, len(items) // (workers * 4))
    with multiprocessing.Pool(workers, initializer=initializer, initargs=initargs) as pool:
        return list(pool.imap(worker, items, chunksize=chunksize))


def correct_corpus(
    calls: Sequence[CallTranscript],
    specs: dict[str, FieldSpec],
    channel: ChannelModel,
    workers: int = 1,
) -> list[CallTranscript]:
    if workers > 1 and len(calls) > 1:
        return _pool_map(_correct_one, _init_correct_worker, (specs, channel), list(calls), workers)
    return [correct_call(call, specs, channel) for call in calls]


def _init_review_worker(records_index, specs, models, strategy, apply_correction, backend) -> None:
    _POOL_STATE.update(
        records_index=records_index,
        specs=specs,
        models=models,
        strategy=strategy,
        apply_correction=apply_correction,
        backend=backend,
    )


def _review_one(call: CallTranscript) -> list[ReviewDecision]:
    state = _POOL_STATE
    target = (
        correct_call(call, state["specs"], state["models"].channel)
        if state["apply_correction"]
        else call
    )
    return review_call(
        target,
        state["records_index"],
        state["specs"],
        state["models"].detector,
        state["models"].verifier,
        strategy=state["strategy"],
        extraction_backend=state["backend"],
    )


def review_corpus(
    calls: Sequence[CallTranscript],
    records: Sequence[FieldRecord],
    specs: dict[str, FieldSpec],
    models: Models,
    strategy: Strategy,
    apply_correction: bool = True,
    extraction_backend=None,
    workers: int = 1,
) -> list[ReviewDecision]:
    """Per-call reviews, optionally fanned out over a process pool.

    Worker results are collected in call order, so the output is
    byte-identical regardless of the worker count.
    """
    indexed = index_records(records)
    if workers > 1 and len(calls) > 1:
        batches = _pool_map(
            _review_one,
            _init_review_worker,
            (indexed, specs, models, strategy, apply_correction, extraction_backend),
            list(calls),
            workers,
        )
        return [decision for batch in batches for decision in batch]
    decisions: list[ReviewDecision] = []
    for call in calls:
        target = correct_call(call, specs, models.channel) if apply_correction else call
        decisions.extend(
            review_call(
                target,
                indexed,
                specs,
                models.detector,
                models.verifier,
                strategy=strategy,
                extraction_backend=extraction_backend,
            )
        )
    return decisions


def evaluate_decisions(
    decisions: Sequence[ReviewDecision], records: Sequence[FieldRecord]
) -> EvalReport:
    keyed = {(d.call_id, d.field_id) for d in decisions}
    relevant = [r for r in records if (r.call_id, r.field_id) in keyed]
    return score_reviews(decisions, relevant)
