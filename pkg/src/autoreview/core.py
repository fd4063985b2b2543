"""Shared data types for calls, fields, and review decisions.

Every transcript is an ordered list of utterances, each carrying an n-best
list of hypothesis strings (position 0 is the recognizer's best guess).
All types are immutable values and safe to share across workers.
"""
from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from enum import Enum
from typing import Optional

# Upper bound on n-best list length unless a caller overrides it.
DEFAULT_N_MAX = 10

# Canonical sentinel for "the agent did not provide this information".
NOT_PROVIDED = "__NOT_PROVIDED__"


class Speaker(str, Enum):
    AGENT = "Agent"
    AI_MODEL = "AiModel"


class Criticality(str, Enum):
    CRITICAL = "Critical"
    NON_CRITICAL = "NonCritical"


class Verdict(str, Enum):
    AUTO_APPROVE = "AutoApprove"
    FLAG_FOR_HUMAN = "FlagForHuman"


class Strategy(str, Enum):
    DIRECT_VERIFICATION = "DirectVerification"
    DIRECT_EXTRACTION = "DirectExtraction"
    HYBRID = "Hybrid"


@dataclass(frozen=True)
class Utterance:
    """One speaker turn with its n-best transcript hypotheses."""

    index: int
    speaker: Speaker
    alternatives: tuple[str, ...]

    @property
    def best(self) -> str:
        # tolerate an empty list so validation can report it instead of crashing
        return self.alternatives[0] if self.alternatives else ""


@dataclass(frozen=True)
class CallTranscript:
    call_id: str
    utterances: tuple[Utterance, ...]
    word_count: int = -1

    def __post_init__(self) -> None:
        if self.word_count < 0:
            object.__setattr__(self, "word_count", count_words(self.utterances))


def count_words(utterances: tuple[Utterance, ...]) -> int:
    """Whitespace-delimited token count over best hypotheses."""
    return sum(len(u.best.split()) for u in utterances)


@dataclass(frozen=True)
class FieldSpec:
    """Per-field configuration: how to find it, what a valid value looks like."""

    field_id: str
    triggers: tuple[str, ...]
    format_pattern: str
    criticality: Criticality = Criticality.NON_CRITICAL
    normalization: tuple[str, ...] = ()

    def pattern(self) -> re.Pattern:
        return re.compile(self.format_pattern)

    def matches_format(self, value: str) -> bool:
        return self.pattern().fullmatch(value) is not None


@dataclass(frozen=True)
class FieldRecord:
    """The three views of one field of one call: live, gold, post-call."""

    call_id: str
    field_id: str
    live_call_value: str
    gold_value: Optional[str] = None
    post_call_value: Optional[str] = None


@dataclass(frozen=True)
class ReviewDecision:
    call_id: str
    field_id: str
    verdict: Verdict
    strategy: Strategy
    score: float
    evidence: tuple[int, ...] = ()
    post_call_value: Optional[str] = None


def validate_call(call: CallTranscript, n_max: int = DEFAULT_N_MAX) -> list[str]:
    """Check transcript invariants. Returns violation descriptions, never raises."""
    violations: list[str] = []
    if not call.call_id:
        violations.append("call_id is empty")
    for pos, utt in enumerate(call.utterances):
        if utt.index != pos:
            violations.append(
                f"utterance at position {pos} has index {utt.index}; "
                f"indices must be consecutive from 0"
            )
        if len(utt.alternatives) < 1:
            violations.append(f"utterance {utt.index} has an empty alternatives list")
        elif len(utt.alternatives) > n_max:
            violations.append(
                f"utterance {utt.index} has {len(utt.alternatives)} alternatives; "
                f"limit is {n_max}"
            )
    expected = count_words(call.utterances)
    if call.word_count != expected:
        violations.append(
            f"word_count is {call.word_count} but best hypotheses total {expected} words"
        )
    return violations


def validate_field_record(record: FieldRecord) -> list[str]:
    violations: list[str] = []
    if not record.live_call_value:
        violations.append(
            f"({record.call_id}, {record.field_id}): live_call_value is empty; "
            f"use the {NOT_PROVIDED} sentinel for absent values"
        )
    return violations


def normalized_edit_distance(a: str, b: str) -> float:
    """Levenshtein distance divided by the longer string's length, in [0, 1].

    Computed over Unicode scalar values after NFC normalization so the result
    is deterministic across platforms. Two empty strings are distance 0.
    """
    a = unicodedata.normalize("NFC", a)
    b = unicodedata.normalize("NFC", b)
    if not a and not b:
        return 0.0
    return levenshtein(a, b) / max(len(a), len(b))


def levenshtein(a: str, b: str) -> int:
    """Edit distance via banded dynamic programming.

    The band half-width doubles until the result is confirmed inside it,
    so similar strings cost O(d * n) instead of O(n * m).
    """
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(a) < len(b):
        a, b = b, a
    n, m = len(a), len(b)
    k = max(1, n - m)
    while True:
        distance = _banded_levenshtein(a, b, k)
        if distance <= k or k >= n:
            return distance
        k = min(k * 2, n)


_BIG = 1 << 30


def _banded_levenshtein(a: str, b: str, k: int) -> int:
    n, m = len(a), len(b)
    previous = {j: j for j in range(0, min(m, k) + 1)}
    for i in range(1, n + 1):
        lo = max(0, i - k)
        hi = min(m, i + k)
        current: dict[int, int] = {}
        for j in range(lo, hi + 1):
            if j == 0:
                current[j] = i
                continue
            cost = 0 if a[i - 1] == b[j - 1] else 1
            best = previous.get(j - 1, _BIG) + cost
            up = previous.get(j, _BIG) + 1
            if up < best:
                best = up
            left = current.get(j - 1, _BIG) + 1
            if left < best:
                best = left
            current[j] = best
        previous = current
    return previous.get(m, _BIG)


def edit_script(a: str, b: str) -> list[tuple[str, str, str]]:
    """Minimal character edit script from a to b.

    Returns (op, a_char, b_char) steps where op is one of
    "equal", "sub", "del", "ins"; unused side is "".
    """
    n, m = len(a), len(b)
    dp = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        dp[i][0] = i
    for j in range(m + 1):
        dp[0][j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            dp[i][j] = min(dp[i - 1][j] + 1, dp[i][j - 1] + 1, dp[i - 1][j - 1] + cost)
    steps: list[tuple[str, str, str]] = []
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and dp[i][j] == dp[i - 1][j - 1] and a[i - 1] == b[j - 1]:
            steps.append(("equal", a[i - 1], b[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and dp[i][j] == dp[i - 1][j - 1] + 1:
            steps.append(("sub", a[i - 1], b[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and dp[i][j] == dp[i - 1][j] + 1:
            steps.append(("del", a[i - 1], ""))
            i -= 1
        else:
            steps.append(("ins", "", b[j - 1]))
            j -= 1
    steps.reverse()
    return steps
