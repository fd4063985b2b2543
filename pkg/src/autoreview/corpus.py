"""Line-delimited JSON corpus files.

One call per line in transcript files; field records live in a parallel
file keyed by (call_id, field_id). Writers emit keys in sorted order so
rerunning a stage with the same inputs yields byte-identical files.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Iterator

from .core import CallTranscript, FieldRecord, ReviewDecision, Speaker, Strategy, Utterance, Verdict


def call_to_dict(call: CallTranscript) -> dict:
    return {
        "call_id": call.call_id,
        "utterances": [
            {
                "index": u.index,
                "speaker": u.speaker.value,
                "alternatives": list(u.alternatives),
            }
            for u in call.utterances
        ],
        "word_count": call.word_count,
    }


def call_from_dict(data: dict) -> CallTranscript:
    utterances = tuple(
        Utterance(
            index=u["index"],
            speaker=Speaker(u["speaker"]),
            alternatives=tuple(u["alternatives"]),
        )
        for u in data["utterances"]
    )
    return CallTranscript(
        call_id=data["call_id"],
        utterances=utterances,
        word_count=data.get("word_count", -1),
    )


def record_to_dict(record: FieldRecord) -> dict:
    return {
        "call_id": record.call_id,
        "field_id": record.field_id,
        "live_call_value": record.live_call_value,
        "gold_value": record.gold_value,
        "post_call_value": record.post_call_value,
    }


def record_from_dict(data: dict) -> FieldRecord:
    return FieldRecord(
        call_id=data["call_id"],
        field_id=data["field_id"],
        live_call_value=data["live_call_value"],
        gold_value=data.get("gold_value"),
        post_call_value=data.get("post_call_value"),
    )


def decision_to_dict(decision: ReviewDecision) -> dict:
    return {
        "call_id": decision.call_id,
        "field_id": decision.field_id,
        "verdict": decision.verdict.value,
        "strategy": decision.strategy.value,
        "score": decision.score,
        "evidence": list(decision.evidence),
        "post_call_value": decision.post_call_value,
    }


def decision_from_dict(data: dict) -> ReviewDecision:
    return ReviewDecision(
        call_id=data["call_id"],
        field_id=data["field_id"],
        verdict=Verdict(data["verdict"]),
        strategy=Strategy(data["strategy"]),
        score=data["score"],
        evidence=tuple(data.get("evidence", ())),
        post_call_value=data.get("post_call_value"),
    )


def dump_line(data: dict) -> str:
    return json.dumps(data, sort_keys=True, ensure_ascii=False)


def write_jsonl(path: Path, rows: Iterable[dict]) -> int:
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(dump_line(row) + "\n")
            count += 1
    return count


def read_jsonl(path: Path) -> Iterator[dict]:
    with path.open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)


def write_calls(path: Path, calls: Iterable[CallTranscript]) -> int:
    return write_jsonl(path, (call_to_dict(c) for c in calls))


def read_calls(path: Path) -> list[CallTranscript]:
    return [call_from_dict(d) for d in read_jsonl(path)]


def write_records(path: Path, records: Iterable[FieldRecord]) -> int:
    return write_jsonl(path, (record_to_dict(r) for r in records))


def read_records(path: Path) -> list[FieldRecord]:
    return [record_from_dict(d) for d in read_jsonl(path)]


def write_decisions(path: Path, decisions: Iterable[ReviewDecision]) -> int:
    return write_jsonl(path, (decision_to_dict(d) for d in decisions))


def read_decisions(path: Path) -> list[ReviewDecision]:
    return [decision_from_dict(d) for d in read_jsonl(path)]


def record_key(record: FieldRecord) -> tuple[str, str]:
    return (record.call_id, record.field_id)


def index_records(records: Iterable[FieldRecord]) -> dict[tuple[str, str], FieldRecord]:
    indexed: dict[tuple[str, str], FieldRecord] = {}
    for record in records:
        indexed[record_key(record)] = record
    return indexed
