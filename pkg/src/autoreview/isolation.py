"""Isolate the agent utterances likely to carry a field's value.

A trigger phrase arms collection; while armed, agent utterances are
collected and an AI-model utterance disarms. Matching is a
case-insensitive substring test over the best hypothesis after
punctuation stripping.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .core import CallTranscript, FieldSpec, Speaker

_PUNCT = re.compile(r"[^\w\s']")


@dataclass(frozen=True)
class IsolationResult:
    field_id: str
    utterance_indices: tuple[int, ...]


def _clean(text: str) -> str:
    return _PUNCT.sub(" ", text.lower())


def isolate_field_utterances(
    call: CallTranscript,
    spec: FieldSpec,
    triggers_from_ai_only: bool = False,
) -> IsolationResult:
    """Collect agent utterances between a trigger phrase and the next AI turn.

    With ``triggers_from_ai_only`` a trigger only arms collection when it
    appears in an AI-model utterance; by default any speaker can arm.
    """
    triggers = [_clean(t).strip() for t in spec.triggers]
    collected: list[int] = []
    collecting = False
    for utt in call.utterances:
        text = _clean(utt.best)
        if not collecting and any(t in text for t in triggers):
            if not triggers_from_ai_only or utt.speaker == Speaker.AI_MODEL:
                collecting = True
        elif collecting:
            if utt.speaker == Speaker.AGENT:
                collected.append(utt.index)
            elif utt.speaker == Speaker.AI_MODEL:
                collecting = False
    return IsolationResult(field_id=spec.field_id, utterance_indices=tuple(collected))
