"""Deterministic parsers from spoken-form utterances to canonical field values.

The decoding layer turns agent speech like "c as in charlie 2 n as in
nancy" into canonical characters. Phonetic phrases always resolve to the
code word's initial: when the claimed letter and the code word disagree
("C like Tango"), the code word wins, because the claimed letter is the
part the recognizer most often gets wrong.

Field assembly then interprets the decoded stream per field kind:
alphanumeric concatenation for group numbers, name + initial for agent
names, name + initial + digit pool for reference numbers.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Protocol, Sequence

from .core import CallTranscript, FieldSpec, NOT_PROVIDED
from .fields import (
    AGENT_NAME,
    BOT_NAME,
    DIGIT_HOMOPHONES,
    DIGIT_WORDS,
    FILLER_WORDS,
    INITIAL_MARKERS,
    REFERENCE_NUMBER,
)
from .isolation import isolate_field_utterances


class FormatViolation(ValueError):
    """Normalized value does not match the field's format pattern."""

    def __init__(self, raw: str, attempted: str, pattern: str):
        super().__init__(f"{attempted!r} (from {raw!r}) does not match /{pattern}/")
        self.raw = raw
        self.attempted = attempted
        self.pattern = pattern


class TokenKind(str, Enum):
    DIGIT = "Digit"
    DIGIT_WORD = "DigitWord"
    LETTER = "Letter"
    NATO_CODED = "NatoCoded"
    SPELLED_LETTER = "SpelledLetter"
    WORD = "Word"
    NOISE = "Noise"
    MARKER = "Marker"
    BREAK = "Break"


# Words that start a corrected restatement ("sorry, that's actually ...").
CORRECTION_BREAKS = frozenset({"actually", "rather", "scratch", "instead", "sorry"})


@dataclass(frozen=True)
class SpokenToken:
    surface: str
    kind: TokenKind
    value: str = ""
    claimed: str = ""
    start: int = 0
    end: int = 0


@dataclass(frozen=True)
class ValueItem:
    """A decoded chunk ready for field assembly."""

    kind: str  # "spell" | "number" | "alnum" | "word" | "break"
    text: str
    nato_mask: tuple[bool, ...] = ()
    start: int = 0
    end: int = 0


_TOKEN_RE = re.compile(r"\S+")
_SINGLE_CHAR_RE = re.compile(r"[a-z0-9]")
_ALPHA_RE = re.compile(r"[a-z]+")


def _raw_tokens(text: str) -> list[tuple[str, int, int]]:
    tokens = []
    for match in _TOKEN_RE.finditer(text):
        surface = match.group()
        cleaned = re.sub(r"[^A-Za-z0-9]", "", surface).lower()
        if cleaned:
            tokens.append((cleaned, match.start(), match.end()))
    return tokens


def parse_spoken_tokens(text: str) -> list[SpokenToken]:
    """Tokenize and classify, grouping phonetic-alphabet phrases."""
    raw = _raw_tokens(text)
    tokens: list[SpokenToken] = []
    i = 0
    while i < len(raw):
        word, start, end = raw[i]
        group = _match_nato(raw, i)
        if group is not None:
            claimed, code, span = group
            tokens.append(
                SpokenToken(
                    surface=" ".join(t[0] for t in raw[i : i + span]),
                    kind=TokenKind.NATO_CODED,
                    value=code[0].upper(),
                    claimed=claimed.upper(),
                    start=start,
                    end=raw[i + span - 1][2],
                )
            )
            i += span
            continue
        tokens.append(_classify(word, start, end))
        i += 1
    _resolve_ambiguous(tokens)
    return tokens


def _match_nato(raw: list[tuple[str, int, int]], i: int) -> Optional[tuple[str, str, int]]:
    word = raw[i][0]
    if len(word) != 1 or not word.isalnum():
        return None
    # "<c> as in <word>" / "<c> is in <word>"
    if (
        i + 3 < len(raw)
        and raw[i + 1][0] in ("as", "is")
        and raw[i + 2][0] == "in"
        and _is_code_word(raw[i + 3][0])
    ):
        return word, raw[i + 3][0], 4
    # "<c> like <word>" / "<c> for <word>"
    if i + 2 < len(raw) and raw[i + 1][0] in ("like", "for") and _is_code_word(raw[i + 2][0]):
        return word, raw[i + 2][0], 3
    return None


def _is_code_word(word: str) -> bool:
    return len(word) >= 2 and word.isalpha() and word not in DIGIT_WORDS


def _classify(word: str, start: int, end: int) -> SpokenToken:
    if word.isdigit():
        return SpokenToken(word, TokenKind.DIGIT, value=word, start=start, end=end)
    if word in DIGIT_WORDS:
        return SpokenToken(word, TokenKind.DIGIT_WORD, value=DIGIT_WORDS[word], start=start, end=end)
    if word in INITIAL_MARKERS:
        return SpokenToken(word, TokenKind.MARKER, start=start, end=end)
    if word in CORRECTION_BREAKS:
        return SpokenToken(word, TokenKind.BREAK, start=start, end=end)
    if len(word) == 1 and word.isalpha():
        return SpokenToken(word, TokenKind.LETTER, value=word.upper(), start=start, end=end)
    if word == BOT_NAME or word in FILLER_WORDS:
        return SpokenToken(word, TokenKind.NOISE, start=start, end=end)
    if word.isalpha():
        return SpokenToken(word, TokenKind.WORD, value=word, start=start, end=end)
    # mixed alphanumeric chunk, e.g. "ad0156"
    return SpokenToken(word, TokenKind.WORD, value=word, start=start, end=end)


_SPELLISH = {
    TokenKind.DIGIT,
    TokenKind.DIGIT_WORD,
    TokenKind.LETTER,
    TokenKind.NATO_CODED,
    TokenKind.SPELLED_LETTER,
}


def _resolve_ambiguous(tokens: list[SpokenToken]) -> None:
    """Context passes: digit homophones, 'o' as zero, 'a'/'i' as articles."""

    def spellish(idx: int) -> bool:
        if 0 <= idx < len(tokens):
            t = tokens[idx]
            return t.kind in _SPELLISH and (t.kind != TokenKind.DIGIT or len(t.value) == 1)
        return False

    def digitish(idx: int) -> bool:
        if 0 <= idx < len(tokens):
            return tokens[idx].kind in (TokenKind.DIGIT, TokenKind.DIGIT_WORD)
        return False

    # Sound-alike digits only count as digits when beside spelled characters.
    for i, tok in enumerate(tokens):
        if tok.surface in DIGIT_HOMOPHONES and tok.kind in (
            TokenKind.NOISE,
            TokenKind.WORD,
            TokenKind.LETTER,
        ):
            if tok.surface in ("o", "oh"):
                if digitish(i - 1) or digitish(i + 1):
                    tokens[i] = SpokenToken(
                        tok.surface, TokenKind.DIGIT_WORD, value="0", start=tok.start, end=tok.end
                    )
            elif spellish(i - 1) or spellish(i + 1):
                tokens[i] = SpokenToken(
                    tok.surface,
                    TokenKind.DIGIT_WORD,
                    value=DIGIT_HOMOPHONES[tok.surface],
                    start=tok.start,
                    end=tok.end,
                )

    # "a" / "i" are articles or pronouns unless spelled out or utterance-final.
    # A word after them demotes them unless they sit inside a real spelling
    # run (two or more spelled characters before): "quentin l a second" has
    # an article, "s a b r i n a last initial k" has a spelled letter.
    for i, tok in enumerate(tokens):
        if tok.kind == TokenKind.LETTER and tok.surface in ("a", "i"):
            if spellish(i + 1):
                continue
            nxt = tokens[i + 1] if i + 1 < len(tokens) else None
            if nxt is not None and nxt.kind in (TokenKind.WORD, TokenKind.NOISE, TokenKind.MARKER):
                if not (spellish(i - 1) and spellish(i - 2)):
                    tokens[i] = SpokenToken(tok.surface, TokenKind.NOISE, start=tok.start, end=tok.end)

    # Letters inside spelled sequences get the dedicated kind.
    for i, tok in enumerate(tokens):
        if tok.kind == TokenKind.LETTER and (spellish(i - 1) or spellish(i + 1)):
            tokens[i] = SpokenToken(
                tok.surface, TokenKind.SPELLED_LETTER, value=tok.value, start=tok.start, end=tok.end
            )


def decode_items(text: str) -> list[ValueItem]:
    """Group classified tokens into value items, dropping filler."""
    tokens = parse_spoken_tokens(text)
    items: list[ValueItem] = []
    run_chars: list[str] = []
    run_nato: list[bool] = []
    run_start = run_end = 0

    def flush() -> None:
        nonlocal run_chars, run_nato
        if run_chars:
            items.append(
                ValueItem(
                    kind="spell",
                    text="".join(run_chars),
                    nato_mask=tuple(run_nato),
                    start=run_start,
                    end=run_end,
                )
            )
            run_chars, run_nato = [], []

    for tok in tokens:
        if tok.kind == TokenKind.NOISE:
            continue
        if tok.kind in (TokenKind.MARKER, TokenKind.BREAK):
            flush()
            if tok.kind == TokenKind.BREAK:
                items.append(ValueItem(kind="break", text="", start=tok.start, end=tok.end))
            continue
        if tok.kind in _SPELLISH and not (tok.kind == TokenKind.DIGIT and len(tok.value) > 1):
            if not run_chars:
                run_start = tok.start
            run_chars.append(tok.value.upper())
            run_nato.append(tok.kind == TokenKind.NATO_CODED)
            run_end = tok.end
            continue
        flush()
        if tok.kind == TokenKind.DIGIT:
            items.append(ValueItem(kind="number", text=tok.value, start=tok.start, end=tok.end))
        elif tok.kind == TokenKind.WORD:
            kind = "alnum" if any(c.isdigit() for c in tok.value) else "word"
            text_value = tok.value.upper() if kind == "alnum" else tok.value
            items.append(ValueItem(kind=kind, text=text_value, start=tok.start, end=tok.end))
    flush()
    return items


def decode_spoken_form(text: str) -> str:
    """Render the canonical decoded form of an utterance.

    Spelled characters (letters, phonetic phrases, digit words) concatenate
    into runs; words and multi-digit groups stay space-separated.
    """
    parts = []
    for item in decode_items(text):
        if item.kind == "break":
            continue
        parts.append(item.text)
    return " ".join(parts)


# ---------------------------------------------------------------------------
# Field assembly
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Candidate:
    value: str
    start: int
    end: int


@dataclass(frozen=True)
class _NameEvent:
    role: str  # "word" | "spell" | "initial"
    text: str
    start: int
    end: int


def _name_events(items: Sequence[ValueItem]) -> list[_NameEvent]:
    events: list[_NameEvent] = []
    for item in items:
        if item.kind == "word" and len(item.text) >= 2:
            events.append(_NameEvent("word", item.text, item.start, item.end))
        elif item.kind == "spell":
            chars = item.text
            if len(chars) == 1:
                events.append(_NameEvent("initial", chars, item.start, item.end))
            elif len(chars) >= 3 and item.nato_mask[-1] and not item.nato_mask[-2]:
                # spelled name ending in a phonetic letter: "t i a b for boy"
                events.append(_NameEvent("spell", chars[:-1], item.start, item.end))
                events.append(_NameEvent("initial", chars[-1], item.start, item.end))
            else:
                events.append(_NameEvent("spell", chars, item.start, item.end))
    return events


def _resolve_name(events: Sequence[_NameEvent]) -> Optional[Candidate]:
    spelled = [e for e in events if e.role == "spell"]
    worded = [e for e in events if e.role == "word"]
    initials = [e for e in events if e.role == "initial"]
    name = spelled[-1] if spelled else (worded[-1] if worded else None)
    if name is None:
        return None
    initial = initials[-1] if initials else None
    value = name.text.capitalize()
    spans = [name] + ([initial] if initial else [])
    if initial is not None:
        value = f"{value} {initial.text.upper()}"
    return Candidate(value, min(e.start for e in spans), max(e.end for e in spans))


def _assemble_agent_name(items: Sequence[ValueItem]) -> Optional[Candidate]:
    return _resolve_name(_name_events(items))


def _assemble_group_number(items: Sequence[ValueItem]) -> Optional[Candidate]:
    best: Optional[Candidate] = None
    chars: list[str] = []
    start = end = 0
    for item in list(items) + [ValueItem(kind="break", text="")]:
        if item.kind == "break":
            if len(chars) >= 3:
                best = Candidate("".join(chars), start, end)
            chars = []
            continue
        if item.kind in ("spell", "number", "alnum"):
            if not chars:
                start = item.start
            chars.extend(item.text.upper())
            end = item.end
    return best


def _assemble_reference_number(items: Sequence[ValueItem]) -> Optional[Candidate]:
    digits: list[str] = []
    events: list[_NameEvent] = []
    spans: list[tuple[int, int]] = []
    for item in items:
        if item.kind == "word":
            if len(item.text) >= 2:
                events.append(_NameEvent("word", item.text, item.start, item.end))
                spans.append((item.start, item.end))
        elif item.kind == "number":
            digits.extend(item.text)
            spans.append((item.start, item.end))
        elif item.kind == "alnum":
            digits.extend(c for c in item.text if c.isdigit())
            spans.append((item.start, item.end))
        elif item.kind == "spell":
            # split a mixed run into letter sub-runs and a digit pool
            alpha_run: list[str] = []
            nato_run: list[bool] = []
            for ch, nato in zip(item.text, item.nato_mask):
                if ch.isdigit():
                    if alpha_run:
                        events.extend(
                            _name_events(
                                [
                                    ValueItem(
                                        "spell",
                                        "".join(alpha_run),
                                        tuple(nato_run),
                                        item.start,
                                        item.end,
                                    )
                                ]
                            )
                        )
                        alpha_run, nato_run = [], []
                    digits.append(ch)
                else:
                    alpha_run.append(ch)
                    nato_run.append(nato)
            if alpha_run:
                events.extend(
                    _name_events(
                        [ValueItem("spell", "".join(alpha_run), tuple(nato_run), item.start, item.end)]
                    )
                )
            spans.append((item.start, item.end))
    name = _resolve_name(events)
    if name is None:
        return None
    has_initial = any(e.role == "initial" for e in events)
    if not has_initial and len(digits) < 4:
        return None
    date = "".join(digits)
    if len(date) > 8:
        date = date[-8:]
    value = f"{name.value} {date}" if date else name.value
    start = min([name.start] + [s for s, _ in spans])
    end = max([name.end] + [e for _, e in spans])
    return Candidate(value, start, end)


def assemble_candidate(text: str, spec: FieldSpec) -> Optional[Candidate]:
    """Best candidate value for one utterance, or None."""
    items = decode_items(text)
    if spec.field_id == AGENT_NAME:
        return _assemble_agent_name(items)
    if spec.field_id == REFERENCE_NUMBER:
        return _assemble_reference_number(items)
    # GroupNumber and custom alphanumeric fields share the concat assembly.
    return _assemble_group_number(items)


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------


def _rule_strip(value: str) -> str:
    return value.strip()


def _rule_collapse_ws(value: str) -> str:
    return re.sub(r"\s+", " ", value)


def _rule_upper(value: str) -> str:
    return value.upper()


def _rule_strip_separators(value: str) -> str:
    return re.sub(r"[ \-]", "", value)


def _rule_name_title(value: str) -> str:
    parts = []
    for token in value.split(" "):
        if token.isalpha():
            parts.append(token.upper() if len(token) == 1 else token.capitalize())
        else:
            parts.append(token)
    return " ".join(parts)


NORMALIZATION_RULES = {
    "strip": _rule_strip,
    "collapse_ws": _rule_collapse_ws,
    "upper": _rule_upper,
    "strip_separators": _rule_strip_separators,
    "name_title": _rule_name_title,
}


def normalize_field_value(raw: str, spec: FieldSpec) -> str:
    """Apply the field's normalization rules in order and enforce the format.

    Raises FormatViolation when the canonical form does not match the
    field's pattern; the exception carries both raw and attempted forms.
    """
    if raw == NOT_PROVIDED:
        return raw
    value = raw
    for rule in spec.normalization:
        value = NORMALIZATION_RULES[rule](value)
    if not spec.matches_format(value):
        raise FormatViolation(raw, value, spec.format_pattern)
    return value


def normalize_lenient(raw: str, spec: FieldSpec) -> str:
    """Normalization that keeps the attempted form on a format violation."""
    try:
        return normalize_field_value(raw, spec)
    except FormatViolation as violation:
        return violation.attempted


# ---------------------------------------------------------------------------
# Extraction backends
# ---------------------------------------------------------------------------


class ExtractionBackend(Protocol):
    def extract(self, texts: Sequence[str], spec: FieldSpec) -> str: ...


class BuiltinExtractionBackend:
    """Deterministic parser over isolated utterance texts."""

    def extract(self, texts: Sequence[str], spec: FieldSpec) -> str:
        if spec.field_id == AGENT_NAME:
            # Spelling beats a stated name within one utterance; across
            # utterances the latest restatement wins, and an initial given
            # in an earlier turn carries over ("jasmine t" ... "j a s m i n").
            name_text: Optional[str] = None
            initial_text: Optional[str] = None
            for text in texts:
                events = _name_events(decode_items(text))
                spelled = [e for e in events if e.role == "spell"]
                worded = [e for e in events if e.role == "word"]
                initials = [e for e in events if e.role == "initial"]
                if spelled:
                    name_text = spelled[-1].text
                elif worded:
                    name_text = worded[-1].text
                if initials:
                    initial_text = initials[-1].text
            if name_text is None:
                return NOT_PROVIDED
            value = name_text.capitalize()
            if initial_text is not None:
                value = f"{value} {initial_text.upper()}"
            return normalize_lenient(value, spec)
        candidate = None
        for text in texts:
            found = assemble_candidate(text, spec)
            if found is not None:
                candidate = found
        if candidate is None:
            return NOT_PROVIDED
        return normalize_lenient(candidate.value, spec)


def extract_value_from_text(text: str, spec: FieldSpec) -> str:
    """Canonical value carried by a single utterance, or the sentinel."""
    candidate = assemble_candidate(text, spec)
    if candidate is None:
        return NOT_PROVIDED
    return normalize_lenient(candidate.value, spec)


def extract_field(
    call: CallTranscript,
    spec: FieldSpec,
    backend: Optional[ExtractionBackend] = None,
) -> str:
    """Post-call value for one field: isolate, decode, normalize."""
    backend = backend or BuiltinExtractionBackend()
    isolated = isolate_field_utterances(call, spec)
    texts = [call.utterances[i].best for i in isolated.utterance_indices]
    if not texts:
        return NOT_PROVIDED
    return backend.extract(texts, spec)
