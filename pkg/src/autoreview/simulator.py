"""Synthetic benefit-verification calls with known gold values and ASR noise.

Every call follows the same skeleton: greeting, an agent-name exchange,
a group-number readout, benefit small talk up to a target word count, and
a reference-number readback. Field-bearing agent utterances get an n-best
list sharing a corruption core with independent per-hypothesis
perturbations, so voting across hypotheses is informative but not trivial.

Live-call values are corrupted independently of the transcript at the
configured per-field error rates; corrupted values land at an edit
distance drawn from a clipped normal whose pre-clip mean is solved
numerically so the post-clip mean hits the configured target.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .core import CallTranscript, FieldRecord, NOT_PROVIDED, Speaker, Utterance, levenshtein
from .fields import (
    AGENT_NAME,
    ALT_CODE_WORDS,
    BOT_NAME,
    DIGIT_WORDS,
    GROUP_NUMBER,
    NATO_TABLE,
    REFERENCE_NUMBER,
    first_names,
    standard_field_specs,
)


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionModel:
    """Weighted confusion tables driving transcript corruption."""

    char_sub: dict[tuple[str, str], float]
    char_ins: dict[str, float]
    char_del: dict[str, float]
    homophones: dict[str, tuple[str, ...]]
    nato_table: dict[str, str]
    digit_words: dict[str, str]


def default_confusion_model() -> ConfusionModel:
    # Phonetic confusions; both directions, digit/letter pairs included.
    pairs = {
        ("a", "8"): 3.0,
        ("8", "a"): 3.0,
        ("h", "8"): 2.0,
        ("8", "h"): 2.0,
        ("o", "0"): 2.0,
        ("0", "o"): 2.0,
        ("b", "d"): 1.5,
        ("d", "b"): 1.5,
        ("b", "p"): 1.0,
        ("p", "b"): 1.0,
        ("b", "v"): 1.0,
        ("v", "b"): 1.0,
        ("m", "n"): 2.0,
        ("n", "m"): 2.0,
        ("s", "f"): 1.5,
        ("f", "s"): 1.5,
        ("d", "t"): 1.5,
        ("t", "d"): 1.5,
        ("c", "z"): 1.0,
        ("z", "c"): 1.0,
        ("g", "j"): 1.0,
        ("j", "g"): 1.0,
        ("e", "i"): 1.0,
        ("i", "e"): 1.0,
        ("s", "5"): 1.5,
        ("5", "s"): 1.5,
        ("l", "1"): 1.0,
        ("1", "l"): 1.0,
        ("5", "9"): 1.0,
        ("9", "5"): 1.0,
        ("1", "7"): 0.5,
        ("7", "1"): 0.5,
    }
    return ConfusionModel(
        char_sub=pairs,
        char_ins={"0": 3.0, "1": 1.0, "s": 1.0, "e": 0.5},
        char_del={"0": 3.0, "1": 1.0, "h": 1.0, "e": 1.0, "r": 0.5},
        homophones={
            "0": ("oh", "o"),
            "4": ("for",),
            "2": ("to", "too"),
            "1": ("won",),
            "8": ("ate",),
            "for": ("4", "far"),
            "to": ("2",),
            "as": ("is", "has"),
            "in": ("an", "and"),
        },
        nato_table=dict(NATO_TABLE),
        digit_words=dict(DIGIT_WORDS),
    )


TABLE1_ERROR_RATES = {AGENT_NAME: 0.1080, REFERENCE_NUMBER: 0.1290, GROUP_NUMBER: 0.0980}
TABLE1_EDIT_MEAN = {AGENT_NAME: 3.23, REFERENCE_NUMBER: 7.05, GROUP_NUMBER: 3.76}
TABLE1_EDIT_STD = {AGENT_NAME: 2.89, REFERENCE_NUMBER: 6.43, GROUP_NUMBER: 7.76}
EDIT_DISTANCE_CAP = {AGENT_NAME: 12, REFERENCE_NUMBER: 24, GROUP_NUMBER: 16}

DEFAULT_SPLITS = {"train": 2000, "validation": 200, "test": 500}


@dataclass(frozen=True)
class SimConfig:
    splits: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_SPLITS))
    error_rate: dict[str, float] = field(default_factory=lambda: dict(TABLE1_ERROR_RATES))
    edit_mean: dict[str, float] = field(default_factory=lambda: dict(TABLE1_EDIT_MEAN))
    edit_std: dict[str, float] = field(default_factory=lambda: dict(TABLE1_EDIT_STD))
    edit_cap: dict[str, int] = field(default_factory=lambda: dict(EDIT_DISTANCE_CAP))
    n_alternatives: int = 10
    seed: int = 42
    avg_words: int = 907
    severity: float = 1.0
    not_provided_rate: float = 0.02
    correction_rate: float = 0.06
    n_max: int = 10

    def validate(self) -> None:
        for split, count in self.splits.items():
            if count < 0:
                raise ConfigurationError(f"split {split!r} has negative call count")
        for fid, rate in self.error_rate.items():
            if not 0.0 <= rate <= 1.0:
                raise ConfigurationError(f"error_rate for {fid} must be in [0, 1]")
        if not 1 <= self.n_alternatives <= self.n_max:
            raise ConfigurationError(
                f"n_alternatives must be in [1, {self.n_max}], got {self.n_alternatives}"
            )
        if self.severity < 0:
            raise ConfigurationError("severity must be >= 0")


def _mix_seed(seed: int, *salts: int) -> int:
    value = seed & 0xFFFFFFFFFFFFFFFF
    for salt in salts:
        value = (value * 6364136223846793005 + salt * 1442695040888963407 + 1) & 0xFFFFFFFFFFFFFFFF
    return value


# ---------------------------------------------------------------------------
# Edit-distance calibration
# ---------------------------------------------------------------------------


def _norm_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def _clipped_mean(mu: float, sigma: float, cap: int) -> float:
    """Mean of round(N(mu, sigma)) clipped to [1, cap]."""
    total = 1.0 * _norm_cdf((1.5 - mu) / sigma)
    for k in range(2, cap):
        p = _norm_cdf((k + 0.5 - mu) / sigma) - _norm_cdf((k - 0.5 - mu) / sigma)
        total += k * p
    total += cap * (1.0 - _norm_cdf((cap - 0.5 - mu) / sigma))
    return total


def solve_preclip_mean(target: float, sigma: float, cap: int) -> float:
    """Pre-clip normal mean whose clipped-and-rounded mean equals target."""
    lo, hi = -6.0 * sigma, float(cap) + 2.0 * sigma
    for _ in range(80):
        mid = (lo + hi) / 2.0
        if _clipped_mean(mid, sigma, cap) < target:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


_PRECLIP_CACHE: dict[tuple[float, float, int], float] = {}


def _draw_edit_distance(field_id: str, cfg: SimConfig, rng: random.Random) -> int:
    target = cfg.edit_mean[field_id]
    sigma = cfg.edit_std[field_id]
    cap = cfg.edit_cap[field_id]
    key = (target, sigma, cap)
    mu = _PRECLIP_CACHE.get(key)
    if mu is None:
        mu = solve_preclip_mean(target, sigma, cap)
        _PRECLIP_CACHE[key] = mu
    draw = round(rng.gauss(mu, sigma))
    return max(1, min(cap, draw))


_LETTERS = "abcdefghijklmnopqrstuvwxyz"
_DIGITS = "0123456789"
_UPPER = _LETTERS.upper()


def _same_class_char(ch: str, rng: random.Random) -> str:
    if ch.isdigit():
        pool = _DIGITS
    elif ch.isupper():
        pool = _UPPER
    elif ch.isalpha():
        pool = _LETTERS
    else:
        return rng.choice(_LETTERS)
    replacement = rng.choice(pool)
    while replacement == ch:
        replacement = rng.choice(pool)
    return replacement


def _one_edit(text: str, rng: random.Random) -> str:
    op = rng.choices(("sub", "ins", "del"), weights=(0.5, 0.3, 0.2))[0]
    chars = list(text)
    if not chars:
        op = "ins"
    if op == "sub":
        pos = rng.randrange(len(chars))
        if chars[pos] == " ":
            return text
        chars[pos] = _same_class_char(chars[pos], rng)
    elif op == "del":
        pos = rng.randrange(len(chars))
        if chars[pos] == " ":
            return text
        del chars[pos]
    else:
        pos = rng.randrange(len(chars) + 1)
        neighbor = chars[pos - 1] if pos > 0 and chars[pos - 1] != " " else "0"
        chars.insert(pos, _same_class_char(neighbor, rng))
    return "".join(chars)


def _apply_random_edits(value: str, distance: int, rng: random.Random) -> str:
    """Corrupt value to an exact edit distance from it.

    Random edits can compose to a smaller distance than the number of
    operations, so the distance is grown one verified step at a time:
    an edit is kept only when it moves the realized distance up by one.
    """
    current = value
    realized = 0
    for _ in range(60 * distance):
        if realized == distance:
            break
        candidate = _one_edit(current, rng)
        if candidate == current:
            continue
        d = levenshtein(value, candidate)
        if d == realized + 1:
            current = candidate
            realized = d
    return current


def _random_gold(field_id: str, rng: random.Random, names: tuple[str, ...]) -> str:
    if field_id == AGENT_NAME:
        return f"{rng.choice(names)} {rng.choice(_UPPER)}"
    if field_id == REFERENCE_NUMBER:
        date = f"{rng.randint(1, 12):02d}{rng.randint(1, 28):02d}2024"
        return f"{rng.choice(names)} {rng.choice(_UPPER)} {date}"
    length = rng.randint(6, 10)
    n_letters = rng.choice((0, 1, 2))
    letters = "".join(rng.choice(_UPPER) for _ in range(n_letters))
    digits = "".join(rng.choice(_DIGITS) for _ in range(length - n_letters))
    return letters + digits


def sample_live_call_value(
    gold: str, field_id: str, cfg: SimConfig, rng: random.Random
) -> str:
    """First-stage extraction result: gold, or a calibrated corruption."""
    if rng.random() >= cfg.error_rate.get(field_id, 0.0):
        return gold
    if gold == NOT_PROVIDED:
        return _random_gold(field_id, rng, first_names())
    distance = _draw_edit_distance(field_id, cfg, rng)
    corrupted = _apply_random_edits(gold, distance, rng)
    if corrupted == gold:
        corrupted = _apply_random_edits(gold, max(1, distance), rng)
    return corrupted


# ---------------------------------------------------------------------------
# Transcript noise
# ---------------------------------------------------------------------------

# Per-unit base rates at severity 1.0; the shared core pass runs at half
# intensity so most disagreement is per-hypothesis and voting can help.
_TOKEN_HOMOPHONE_RATE = 0.02
_TOKEN_TRUNCATE_RATE = 0.008
_CHAR_SUB_RATE = 0.012
_CHAR_DEL_RATE = 0.004
_CHAR_INS_RATE = 0.004
_CORE_FACTOR = 0.5


def _weighted_choice(table: dict, rng: random.Random):
    keys = list(table.keys())
    weights = [table[k] for k in keys]
    return rng.choices(keys, weights=weights)[0]


def _corrupt_text(text: str, model: ConfusionModel, intensity: float, rng: random.Random) -> str:
    if intensity <= 0:
        return text
    out_tokens: list[str] = []
    for token in text.split(" "):
        if not token:
            continue
        if token in model.homophones and rng.random() < _TOKEN_HOMOPHONE_RATE * intensity:
            out_tokens.append(rng.choice(model.homophones[token]))
            continue
        if len(token) >= 5 and rng.random() < _TOKEN_TRUNCATE_RATE * intensity:
            out_tokens.append(token[rng.randint(1, 3):])
            continue
        chars: list[str] = []
        for ch in token:
            roll = rng.random()
            if roll < _CHAR_SUB_RATE * intensity:
                subs = {c2: w for (c1, c2), w in model.char_sub.items() if c1 == ch.lower()}
                if subs:
                    chars.append(_weighted_choice(subs, rng))
                else:
                    chars.append(_same_class_char(ch, rng) if ch.isalnum() else ch)
            elif roll < (_CHAR_SUB_RATE + _CHAR_DEL_RATE) * intensity:
                continue
            else:
                chars.append(ch)
            if rng.random() < _CHAR_INS_RATE * intensity:
                chars.append(_weighted_choice(model.char_ins, rng))
        if chars:
            out_tokens.append("".join(chars))
    return " ".join(out_tokens) if out_tokens else text


def inject_noise(
    clean_utterance: str,
    model: ConfusionModel,
    n: int,
    severity: float,
    seed: int,
) -> list[str]:
    """Sample n transcript hypotheses for one utterance.

    Hypothesis 0 is the sampled recognizer best. All hypotheses share one
    core corruption pass plus independent per-hypothesis perturbations.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if severity <= 0:
        return [clean_utterance] * n
    rng = random.Random(_mix_seed(seed, 0x5EED))
    core = _corrupt_text(clean_utterance, model, severity * _CORE_FACTOR, rng)
    hypotheses = []
    for i in range(n):
        hyp_rng = random.Random(_mix_seed(seed, 0xA17, i))
        hypotheses.append(_corrupt_text(core, model, severity, hyp_rng))
    return hypotheses


# ---------------------------------------------------------------------------
# Dialogue generation
# ---------------------------------------------------------------------------

_INSURERS = ("meridian health", "blue summit", "cascade care", "harbor mutual", "pinnacle plans")

_LEAD_INS = (
    "sure one moment please",
    "okay let me check",
    "alright just a second",
    "yes one moment",
)

_REFUSALS = (
    "i am sorry i cannot share that",
    "we do not give that information out",
    "i do not have that available",
)

_FILLER_QA = (
    ("is the plan currently active", "yes the plan is active"),
    ("what is the effective date of the plan", "the plan is effective january first"),
    ("is this medication covered under the plan", "yes that medication is covered"),
    ("is prior authorization required", "yes prior authorization is required"),
    ("is there a deductible on this plan", "yes there is a deductible"),
    ("has the deductible been met", "no the deductible has not been met"),
    ("what is the copay amount", "the copay is twenty five dollars"),
    ("is the provider in network", "yes the provider is in network"),
    ("does the plan cover specialty pharmacy", "yes specialty pharmacy is covered"),
    ("is there an out of pocket maximum", "yes there is an out of pocket maximum"),
    ("does this plan require step therapy", "no step therapy is not required"),
    ("are office visits covered", "yes office visits are covered"),
    ("is a referral needed to see a specialist", "no a referral is not needed"),
    ("what is the coinsurance percentage", "the coinsurance is twenty percent"),
    ("is the member eligible for this benefit", "yes the member is eligible"),
)

_ACKS = ("thank you", "got it thank you", "okay thank you", "perfect thanks")


def _spell_name_chars(name: str) -> str:
    return " ".join(ch.lower() for ch in name)


def _nato_phrase(letter: str, rng: random.Random) -> str:
    options = (NATO_TABLE[letter.upper()],) + ALT_CODE_WORDS.get(letter.upper(), ())
    code = rng.choice(options)
    connector = rng.choices(("as in", "like", "for"), weights=(0.7, 0.15, 0.15))[0]
    return f"{letter.lower()} {connector} {code}"


# A bare spoken "o" is indistinguishable from zero next to digits, so agents
# always disambiguate it phonetically.
_AMBIGUOUS_LETTERS = frozenset("O")


def _speak_initial(letter: str, rng: random.Random) -> str:
    if letter.upper() in _AMBIGUOUS_LETTERS:
        return _nato_phrase(letter, rng)
    return letter.lower()


def _speak_agent_name(gold: str, rng: random.Random) -> str:
    first, initial = gold.split(" ")
    style = rng.choices(range(5), weights=(0.35, 0.15, 0.2, 0.15, 0.15))[0]
    if style == 0:
        return f"my name is {first.lower()} {_speak_initial(initial, rng)}"
    if style == 1:
        return f"this is {first.lower()} last initial {_speak_initial(initial, rng)}"
    if style == 2:
        return f"my name is {first.lower()} {_nato_phrase(initial, rng)}"
    if style == 3:
        return (
            f"its {first.lower()} thats {_spell_name_chars(first)} "
            f"last initial {_speak_initial(initial, rng)}"
        )
    return f"{first.lower()} {_nato_phrase(initial, rng)}"


def _speak_date(date: str, rng: random.Random) -> str:
    style = rng.choices(range(3), weights=(0.4, 0.3, 0.3))[0]
    if style == 0:
        return date
    if style == 1:
        return f"{date[0:2]} {date[2:4]} {date[4:8]}"
    return " ".join(date)


def _speak_reference_number(gold: str, rng: random.Random) -> str:
    first, initial, date = gold.split(" ")
    spoken_date = _speak_date(date, rng)
    style = rng.choices(range(4), weights=(0.35, 0.25, 0.2, 0.2))[0]
    if style == 0:
        return f"the reference number is {first.lower()} {_speak_initial(initial, rng)} {spoken_date}"
    if style == 1:
        return (
            f"sure the reference for this call is "
            f"{first.lower()} {_speak_initial(initial, rng)} {spoken_date}"
        )
    if style == 2:
        return f"its {first.lower()} {_nato_phrase(initial, rng)} {spoken_date}"
    return (
        f"reference number is {first.lower()} "
        f"last initial {_speak_initial(initial, rng)} {spoken_date}"
    )


def _speak_group_value(gold: str, rng: random.Random) -> str:
    if gold.isdigit() and rng.random() < 0.3:
        chunks = []
        i = 0
        while i < len(gold):
            size = 3 if len(gold) - i != 4 else 4
            size = min(size, len(gold) - i)
            chunks.append(gold[i : i + size])
            i += size
        return " ".join(chunks)
    digit_names = {v: k for k, v in DIGIT_WORDS.items()}
    parts = []
    for ch in gold:
        if ch.isalpha() and (ch.upper() in _AMBIGUOUS_LETTERS or rng.random() < 0.5):
            parts.append(_nato_phrase(ch, rng))
        elif ch.isdigit() and rng.random() < 0.2:
            parts.append(digit_names[ch])
        else:
            parts.append(ch.lower())
    return " ".join(parts)


def _speak_group_number(gold: str, rng: random.Random) -> str:
    frame = rng.choice(
        (
            "the group number is {v}",
            "group number is {v}",
            "sure its {v}",
            "that would be {v}",
        )
    )
    return frame.format(v=_speak_group_value(gold, rng))


def _speak_value(field_id: str, gold: str, rng: random.Random) -> str:
    if field_id == AGENT_NAME:
        return _speak_agent_name(gold, rng)
    if field_id == REFERENCE_NUMBER:
        return _speak_reference_number(gold, rng)
    return _speak_group_number(gold, rng)


@dataclass
class _CallBuilder:
    cfg: SimConfig
    model: ConfusionModel
    rng: random.Random
    seed: int
    utterances: list[Utterance] = field(default_factory=list)

    def add(self, speaker: Speaker, text: str, n_best: bool = False) -> None:
        index = len(self.utterances)
        if speaker == Speaker.AI_MODEL or self.cfg.severity <= 0:
            # The AI model's own turns come from its dialogue manager, not ASR.
            alternatives: tuple[str, ...] = (
                tuple([text] * self.cfg.n_alternatives) if n_best else (text,)
            )
        elif n_best:
            alternatives = tuple(
                inject_noise(
                    text,
                    self.model,
                    self.cfg.n_alternatives,
                    self.cfg.severity,
                    _mix_seed(self.seed, index),
                )
            )
        else:
            light_rng = random.Random(_mix_seed(self.seed, index, 0xF1))
            alternatives = (
                _corrupt_text(text, self.model, self.cfg.severity * 0.3, light_rng),
            )
        self.utterances.append(Utterance(index=index, speaker=speaker, alternatives=alternatives))

    def words(self) -> int:
        return sum(len(u.best.split()) for u in self.utterances)


def generate_call(
    cfg: SimConfig, call_id: str, seed: int, names: tuple[str, ...]
) -> tuple[CallTranscript, list[FieldRecord]]:
    rng = random.Random(_mix_seed(seed, 0xD1A))
    model = default_confusion_model()
    specs = standard_field_specs()
    builder = _CallBuilder(cfg=cfg, model=model, rng=rng, seed=seed)

    agent_first = rng.choice(names)
    agent_initial = rng.choice(_UPPER)
    golds: dict[str, str] = {}
    for fid in (AGENT_NAME, REFERENCE_NUMBER, GROUP_NUMBER):
        if rng.random() < cfg.not_provided_rate:
            golds[fid] = NOT_PROVIDED
        elif fid == AGENT_NAME:
            golds[fid] = f"{agent_first} {agent_initial}"
        elif fid == REFERENCE_NUMBER:
            date = f"{rng.randint(1, 12):02d}{rng.randint(1, 28):02d}2024"
            golds[fid] = f"{agent_first} {agent_initial} {date}"
        else:
            golds[fid] = _random_gold(GROUP_NUMBER, rng, names)

    insurer = rng.choice(_INSURERS)
    builder.add(
        Speaker.AGENT,
        f"thank you for calling {insurer} benefits this is {agent_first.lower()} speaking",
    )
    builder.add(
        Speaker.AI_MODEL,
        f"hi this is {BOT_NAME} a digital assistant calling to verify benefits for a member",
    )
    builder.add(Speaker.AGENT, "sure i can help with that")

    def field_block(fid: str) -> None:
        spec = specs[fid]
        trigger = rng.choice(spec.triggers)
        builder.add(Speaker.AI_MODEL, trigger)
        gold = golds[fid]
        if gold == NOT_PROVIDED:
            builder.add(Speaker.AGENT, rng.choice(_REFUSALS), n_best=True)
        else:
            if rng.random() < 0.15:
                builder.add(Speaker.AGENT, rng.choice(_LEAD_INS), n_best=True)
            if rng.random() < cfg.correction_rate:
                wrong = _random_gold(fid, rng, names)
                while wrong == gold:
                    wrong = _random_gold(fid, rng, names)
                builder.add(Speaker.AGENT, _speak_value(fid, wrong, rng), n_best=True)
                builder.add(
                    Speaker.AGENT,
                    f"sorry that is actually {_speak_value_bare(fid, gold, rng)}",
                    n_best=True,
                )
            else:
                builder.add(Speaker.AGENT, _speak_value(fid, gold, rng), n_best=True)
        builder.add(Speaker.AI_MODEL, rng.choice(_ACKS))

    def filler_block(count: int) -> None:
        for _ in range(count):
            question, answer = rng.choice(_FILLER_QA)
            builder.add(Speaker.AI_MODEL, question)
            builder.add(Speaker.AGENT, answer)

    field_block(AGENT_NAME)
    filler_block(2)
    field_block(GROUP_NUMBER)

    word_target = max(
        builder.words() + 60,
        int(rng.gauss(cfg.avg_words, cfg.avg_words * 0.33)),
    )
    while builder.words() < word_target - 30:
        filler_block(1)

    field_block(REFERENCE_NUMBER)
    builder.add(Speaker.AI_MODEL, "that is everything i needed thank you for your help")
    builder.add(Speaker.AGENT, "you are welcome have a great day")

    call = CallTranscript(call_id=call_id, utterances=tuple(builder.utterances))
    records = []
    for field_salt, fid in enumerate((AGENT_NAME, REFERENCE_NUMBER, GROUP_NUMBER)):
        live_rng = random.Random(_mix_seed(seed, field_salt, 0x11FE))
        live = sample_live_call_value(golds[fid], fid, cfg, live_rng)
        records.append(
            FieldRecord(
                call_id=call_id,
                field_id=fid,
                live_call_value=live,
                gold_value=golds[fid],
            )
        )
    return call, records


def _speak_value_bare(field_id: str, gold: str, rng: random.Random) -> str:
    """Value rendering without a frame, for correction restatements."""
    if field_id == AGENT_NAME:
        first, initial = gold.split(" ")
        return f"{first.lower()} {_speak_initial(initial, rng)}"
    if field_id == REFERENCE_NUMBER:
        first, initial, date = gold.split(" ")
        return f"{first.lower()} {_speak_initial(initial, rng)} {_speak_date(date, rng)}"
    return _speak_group_value(gold, rng)


def generate_split(
    cfg: SimConfig, split: str, n_calls: int
) -> tuple[list[CallTranscript], list[FieldRecord]]:
    names = first_names()
    split_salt = sum(ord(c) for c in split)
    calls: list[CallTranscript] = []
    records: list[FieldRecord] = []
    for i in range(n_calls):
        call_seed = _mix_seed(cfg.seed, split_salt, i)
        call, recs = generate_call(cfg, f"{split}-{i:05d}", call_seed, names)
        calls.append(call)
        records.extend(recs)
    return calls, records


def generate_corpus(cfg: SimConfig) -> dict[str, tuple[list[CallTranscript], list[FieldRecord]]]:
    """All configured splits; deterministic for a fixed (cfg, seed)."""
    cfg.validate()
    return {split: generate_split(cfg, split, count) for split, count in cfg.splits.items()}
