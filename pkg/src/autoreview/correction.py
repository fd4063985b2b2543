"""Transcript error correction and noise detection built on n-best lists.

The corrector aligns all hypotheses token-wise against the recognizer
best, votes per column, and breaks ties with a noisy-channel model
trained from pseudo-label alignments. A final pass may swap low-margin
columns to make the extracted value satisfy the field's format pattern.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import (
    CallTranscript,
    FieldSpec,
    NOT_PROVIDED,
    Utterance,
    edit_script,
    normalized_edit_distance,
)
from .extraction import extract_value_from_text
from .learn import LogisticModel, choose_threshold_max_f1, fit_logistic
from .pseudolabel import AedExample, PseudoLabelExample

_ALPHABET_SIZE = 40.0


class TrainingError(ValueError):
    pass


@dataclass
class ChannelModel:
    """Smoothed counts of how the recognizer distorts true text.

    Keys are (true, observed) for substitutions; insertion counts are
    spurious observed characters, deletion counts are dropped true ones.
    """

    sub_counts: dict[tuple[str, str], float] = field(default_factory=dict)
    ins_counts: dict[str, float] = field(default_factory=dict)
    del_counts: dict[str, float] = field(default_factory=dict)
    match_counts: dict[str, float] = field(default_factory=dict)
    token_rewrites: dict[tuple[str, str], float] = field(default_factory=dict)
    smoothing: float = 0.5

    # Models never mutate after training, so per-instance caches are safe.
    def __post_init__(self) -> None:
        self._denom_cache: dict[str, float] = {}
        self._likelihood_cache: dict[tuple[str, str], float] = {}
        self._ins_total: Optional[float] = None

    def _denominator(self, true_char: str) -> float:
        cached = self._denom_cache.get(true_char)
        if cached is None:
            subs = sum(w for (t, _), w in self.sub_counts.items() if t == true_char)
            cached = (
                self.match_counts.get(true_char, 0.0)
                + subs
                + self.del_counts.get(true_char, 0.0)
                + self.smoothing * _ALPHABET_SIZE
            )
            self._denom_cache[true_char] = cached
        return cached

    def log_sub(self, true_char: str, observed: str) -> float:
        if true_char == observed:
            count = self.match_counts.get(true_char, 0.0) + self.smoothing * 8.0
        else:
            count = self.sub_counts.get((true_char, observed), 0.0) + self.smoothing
        return math.log(count / self._denominator(true_char))

    def log_del(self, true_char: str) -> float:
        count = self.del_counts.get(true_char, 0.0) + self.smoothing
        return math.log(count / self._denominator(true_char))

    def log_ins(self, observed: str) -> float:
        if self._ins_total is None:
            self._ins_total = sum(self.ins_counts.values()) + sum(self.match_counts.values())
        count = self.ins_counts.get(observed, 0.0) + self.smoothing
        return math.log(count / (self._ins_total + self.smoothing * _ALPHABET_SIZE))

    def substitution_weight(self, true_char: str, observed: str) -> float:
        return self.sub_counts.get((true_char.lower(), observed.lower()), 0.0)

    def log_likelihood(self, observed: str, true: str) -> float:
        """log P(observed token | true token) by weighted alignment."""
        observed = observed.lower()
        true = true.lower()
        cached = self._likelihood_cache.get((true, observed))
        if cached is not None:
            return cached
        n, m = len(true), len(observed)
        neg = float("-inf")
        dp = [[neg] * (m + 1) for _ in range(n + 1)]
        dp[0][0] = 0.0
        for i in range(n + 1):
            for j in range(m + 1):
                here = dp[i][j]
                if here == neg:
                    continue
                if i < n and j < m:
                    step = dp[i][j] + self.log_sub(true[i], observed[j])
                    if step > dp[i + 1][j + 1]:
                        dp[i + 1][j + 1] = step
                if i < n:
                    step = dp[i][j] + self.log_del(true[i])
                    if step > dp[i + 1][j]:
                        dp[i + 1][j] = step
                if j < m:
                    step = dp[i][j] + self.log_ins(observed[j])
                    if step > dp[i][j + 1]:
                        dp[i][j + 1] = step
        self._likelihood_cache[(true, observed)] = dp[n][m]
        return dp[n][m]

    def to_dict(self) -> dict:
        return {
            "sub_counts": {f"{t}\t{o}": w for (t, o), w in sorted(self.sub_counts.items())},
            "ins_counts": dict(sorted(self.ins_counts.items())),
            "del_counts": dict(sorted(self.del_counts.items())),
            "match_counts": dict(sorted(self.match_counts.items())),
            "token_rewrites": {f"{a}\t{b}": w for (a, b), w in sorted(self.token_rewrites.items())},
            "smoothing": self.smoothing,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ChannelModel":
        return cls(
            sub_counts={tuple(k.split("\t")): v for k, v in data["sub_counts"].items()},
            ins_counts=dict(data["ins_counts"]),
            del_counts=dict(data["del_counts"]),
            match_counts=dict(data["match_counts"]),
            token_rewrites={tuple(k.split("\t")): v for k, v in data["token_rewrites"].items()},
            smoothing=data.get("smoothing", 0.5),
        )


def _align_tokens(a: Sequence[str], b: Sequence[str]) -> list[tuple[int, int]]:
    """Unit-cost token alignment; pairs of indices, -1 for gaps."""
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
    pairs: list[tuple[int, int]] = []
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and dp[i][j] == dp[i - 1][j - 1] + (0 if a[i - 1] == b[j - 1] else 1):
            pairs.append((i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and dp[i][j] == dp[i - 1][j] + 1:
            pairs.append((i - 1, -1))
            i -= 1
        else:
            pairs.append((-1, j - 1))
            j -= 1
    pairs.reverse()
    return pairs


def train_channel_model(examples: Sequence[PseudoLabelExample]) -> ChannelModel:
    """Accumulate character-operation counts from noisy/corrected pairs."""
    if not examples:
        raise TrainingError("channel model needs at least one example")
    model = ChannelModel()
    for example in examples:
        noisy = example.alternatives[example.chosen_index].lower()
        true = example.corrected_text.lower()
        for op, noisy_char, true_char in edit_script(noisy, true):
            if op == "equal":
                model.match_counts[true_char] = model.match_counts.get(true_char, 0.0) + 1.0
            elif op == "sub":
                key = (true_char, noisy_char)
                model.sub_counts[key] = model.sub_counts.get(key, 0.0) + 1.0
            elif op == "del":  # noisy has an extra character
                model.ins_counts[noisy_char] = model.ins_counts.get(noisy_char, 0.0) + 1.0
            else:  # true character the recognizer dropped
                model.del_counts[true_char] = model.del_counts.get(true_char, 0.0) + 1.0
        noisy_tokens = noisy.split()
        true_tokens = true.split()
        for ni, ti in _align_tokens(noisy_tokens, true_tokens):
            if ni >= 0 and ti >= 0 and noisy_tokens[ni] != true_tokens[ti]:
                key = (noisy_tokens[ni], true_tokens[ti])
                model.token_rewrites[key] = model.token_rewrites.get(key, 0.0) + 1.0
    return model


# ---------------------------------------------------------------------------
# Fusion
# ---------------------------------------------------------------------------

_GAP = None
_GAP_DISCOUNT = 0.95


def _build_grid(token_lists: list[list[str]]) -> list[list[Optional[str]]]:
    """Progressive alignment of every hypothesis against the first."""
    reference = list(token_lists[0])
    columns: list[list[Optional[str]]] = [[tok] for tok in reference]
    for depth, tokens in enumerate(token_lists[1:], start=1):
        pairs = _align_tokens(reference, tokens)
        new_reference: list[str] = []
        new_columns: list[list[Optional[str]]] = []
        for ref_idx, tok_idx in pairs:
            if ref_idx >= 0:
                column = list(columns[ref_idx])
                column.append(tokens[tok_idx] if tok_idx >= 0 else _GAP)
                new_columns.append(column)
                new_reference.append(reference[ref_idx])
            else:
                column = [_GAP] * depth + [tokens[tok_idx]]
                new_columns.append(column)
                new_reference.append(tokens[tok_idx])
        columns = new_columns
        reference = new_reference
    return columns


@dataclass(frozen=True)
class _ColumnChoice:
    winner: Optional[str]
    runner_up: Optional[str]
    margin: float


def _score_column(
    column: list[Optional[str]], anchor_token: Optional[str], model: ChannelModel
) -> _ColumnChoice:
    counts = Counter(column)
    if len(counts) == 1:
        winner = next(iter(counts))
        return _ColumnChoice(winner=winner, runner_up=None, margin=float(len(column)))
    vote_order = sorted(
        counts.items(),
        key=lambda kv: (
            -(kv[1] * (_GAP_DISCOUNT if kv[0] is _GAP else 1.0)),
            kv[0] if kv[0] is not None else "",
        ),
    )
    top_votes = vote_order[0][1] * (_GAP_DISCOUNT if vote_order[0][0] is _GAP else 1.0)
    second_votes = vote_order[1][1] * (_GAP_DISCOUNT if vote_order[1][0] is _GAP else 1.0)
    if top_votes >= second_votes + 2.0:
        # clear majority: channel scoring cannot change the outcome
        return _ColumnChoice(
            winner=vote_order[0][0],
            runner_up=vote_order[1][0],
            margin=top_votes - second_votes,
        )
    observed = [tok for tok in column if tok is not _GAP]
    scored: list[tuple[float, float, int, str, Optional[str]]] = []
    for candidate, count in counts.items():
        votes = count * (_GAP_DISCOUNT if candidate is _GAP else 1.0)
        if candidate is _GAP:
            channel = sum(model.log_ins(c) for tok in observed for c in tok)
        else:
            channel = sum(model.log_likelihood(tok, candidate) for tok in observed)
        anchor_bonus = 1 if candidate == anchor_token else 0
        sort_key = candidate if candidate is not None else ""
        scored.append((votes, channel, anchor_bonus, sort_key, candidate))
    scored.sort(key=lambda item: (-item[0], -item[1], -item[2], item[3]))
    winner = scored[0][4]
    runner_up = scored[1][4] if len(scored) > 1 else None
    margin = scored[0][0] - (scored[1][0] if len(scored) > 1 else 0.0)
    return _ColumnChoice(winner=winner, runner_up=runner_up, margin=margin)


def _join(tokens: list[Optional[str]]) -> str:
    return " ".join(tok for tok in tokens if tok is not _GAP and tok != "")


def _format_valid(text: str, spec: FieldSpec) -> bool:
    value = extract_value_from_text(text, spec)
    return value != NOT_PROVIDED and spec.matches_format(value)


def _rescore_single(text: str, model: ChannelModel, spec: FieldSpec) -> str:
    """Channel-guided repair of a lone hypothesis that fails the format."""
    if _format_valid(text, spec):
        return text
    tokens = text.split()
    rewrites = sorted(model.token_rewrites.items(), key=lambda kv: (-kv[1], kv[0]))
    variants: list[str] = []
    for (observed, true), _ in rewrites[:20]:
        for i, tok in enumerate(tokens):
            if tok == observed:
                variants.append(" ".join(tokens[:i] + [true] + tokens[i + 1 :]))
    subs = sorted(model.sub_counts.items(), key=lambda kv: (-kv[1], kv[0]))
    for (true_char, observed_char), _ in subs[:10]:
        if observed_char in text:
            variants.append(text.replace(observed_char, true_char, 1))
    for variant in variants[:40]:
        if _format_valid(variant, spec):
            return variant
    return text


def fuse_and_correct(
    alternatives: Sequence[str], model: ChannelModel, spec: FieldSpec
) -> str:
    """Single corrected utterance text fused from the n-best list."""
    if not alternatives:
        raise ValueError("alternatives must be non-empty")
    if len(set(alternatives)) == 1:
        return _rescore_single(alternatives[0], model, spec)
    if len(alternatives) == 1:
        return _rescore_single(alternatives[0], model, spec)
    token_lists = [alt.split() for alt in alternatives]
    grid = _build_grid(token_lists)
    anchor_tokens = token_lists[0]
    choices: list[_ColumnChoice] = []
    anchor_positions: list[Optional[str]] = []
    for column in grid:
        anchor_positions.append(column[0])
    for column, anchor_tok in zip(grid, anchor_positions):
        choices.append(_score_column(column, anchor_tok, model))
    fused_tokens = [choice.winner for choice in choices]
    fused = _join(fused_tokens)
    if _format_valid(fused, spec):
        return fused
    # try swapping the least certain columns toward a format-valid value
    swap_order = sorted(
        (i for i, c in enumerate(choices) if c.runner_up is not None or c.winner is not _GAP),
        key=lambda i: (choices[i].margin, i),
    )
    swappable = [i for i in swap_order if choices[i].runner_up is not None][:5]
    best_fallback = fused
    for mask in range(1, 1 << len(swappable)):
        candidate_tokens = list(fused_tokens)
        for bit, column_index in enumerate(swappable):
            if mask & (1 << bit):
                candidate_tokens[column_index] = choices[column_index].runner_up
        candidate = _join(candidate_tokens)
        if _format_valid(candidate, spec):
            return candidate
    return best_fallback


def reinsert(call: CallTranscript, corrections: dict[int, str]) -> CallTranscript:
    """New transcript with corrected text as the best hypothesis at the
    given indices; other alternatives and all other utterances unchanged."""
    for index in corrections:
        if not 0 <= index < len(call.utterances):
            raise IndexError(f"utterance index {index} out of range for {call.call_id}")
    if not corrections:
        return call
    utterances = []
    for utt in call.utterances:
        if utt.index in corrections:
            alternatives = (corrections[utt.index],) + tuple(utt.alternatives[1:])
            utterances.append(
                Utterance(index=utt.index, speaker=utt.speaker, alternatives=alternatives)
            )
        else:
            utterances.append(utt)
    return CallTranscript(call_id=call.call_id, utterances=tuple(utterances))


# ---------------------------------------------------------------------------
# Noise detection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NoiseDetector:
    model: LogisticModel
    threshold: float

    def to_dict(self) -> dict:
        return {"model": self.model.to_dict(), "threshold": self.threshold}

    @classmethod
    def from_dict(cls, data: dict) -> "NoiseDetector":
        return cls(model=LogisticModel.from_dict(data["model"]), threshold=data["threshold"])


def _mean_pairwise_ned(alternatives: Sequence[str]) -> float:
    n = len(alternatives)
    if n < 2:
        return 0.0
    distinct = Counter(alternatives)
    keys = list(distinct.keys())
    total = 0.0
    pairs = 0
    for i in range(len(keys)):
        for j in range(i, len(keys)):
            if i == j:
                count = distinct[keys[i]] * (distinct[keys[i]] - 1) // 2
                pairs += count
            else:
                count = distinct[keys[i]] * distinct[keys[j]]
                total += count * normalized_edit_distance(keys[i][:80], keys[j][:80])
                pairs += count
    return total / pairs if pairs else 0.0


def _run_length_variance(text: str) -> float:
    runs: list[int] = []
    current_class = ""
    current_len = 0
    for ch in text:
        if ch.isdigit():
            cls = "d"
        elif ch.isalpha():
            cls = "a"
        else:
            cls = ""
        if cls and cls == current_class:
            current_len += 1
        else:
            if current_class and current_len:
                runs.append(current_len)
            current_class = cls
            current_len = 1 if cls else 0
    if current_class and current_len:
        runs.append(current_len)
    if len(runs) < 2:
        return 0.0
    mean = sum(runs) / len(runs)
    return sum((r - mean) ** 2 for r in runs) / len(runs)


def noise_features(alternatives: Sequence[str], spec: FieldSpec) -> list[float]:
    best = alternatives[0]
    agreement = sum(1 for alt in alternatives if alt == best) / len(alternatives)
    value = extract_value_from_text(best, spec)
    format_ok = 1.0 if (value != NOT_PROVIDED and spec.matches_format(value)) else 0.0
    # value-level consensus: how far the best hypothesis' value sits from
    # the most common extracted value across the list
    extracted = [extract_value_from_text(alt, spec) for alt in alternatives]
    majority_value = Counter(extracted).most_common(1)[0][0]
    value_agreement = sum(1 for v in extracted if v == extracted[0]) / len(extracted)
    if value == majority_value:
        value_drift = 0.0
    elif value == NOT_PROVIDED or majority_value == NOT_PROVIDED:
        value_drift = 1.0
    else:
        value_drift = normalized_edit_distance(value, majority_value)
    return [
        _mean_pairwise_ned(alternatives),
        agreement,
        _run_length_variance(best),
        format_ok,
        value_agreement,
        value_drift,
    ]


def train_detector(
    examples: Sequence[AedExample],
    specs: dict[str, FieldSpec],
) -> NoiseDetector:
    """Fit the documented noise features; threshold maximizes F1 held out."""
    if not examples:
        raise TrainingError("detector needs examples")
    labels = np.array([e.label for e in examples], dtype=float)
    if labels.min() == labels.max():
        raise TrainingError("detector needs both noisy and clean examples")
    features = np.array(
        [noise_features(e.alternatives, specs[e.field_id]) for e in examples], dtype=float
    )
    holdout = np.arange(len(examples)) % 5 == 0
    train_x, train_y = features[~holdout], labels[~holdout]
    if train_y.min() == train_y.max():
        train_x, train_y = features, labels
    try:
        model = fit_logistic(train_x, train_y, l2=1.0)
    except ValueError as err:
        raise TrainingError(str(err)) from err
    held_x = features[holdout] if holdout.any() else features
    held_y = labels[holdout] if holdout.any() else labels
    if held_y.min() == held_y.max():
        held_x, held_y = features, labels
    threshold = choose_threshold_max_f1(model.scores(held_x), held_y)
    return NoiseDetector(model=model, threshold=threshold)


def detect_noise(
    alternatives: Sequence[str], detector: NoiseDetector, spec: FieldSpec
) -> tuple[bool, float]:
    score = detector.model.score_one(noise_features(alternatives, spec))
    return score >= detector.threshold, score
