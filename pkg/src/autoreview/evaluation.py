"""Corpus-level scoring of review decisions.

The positive class is auto-approval everywhere: precision is the share
of approvals that were safe, recall the share of safe values that got
approved. Exact match and edit distance are reported for the extracted
post-call values against gold.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .core import (
    FieldRecord,
    FieldSpec,
    ReviewDecision,
    Verdict,
)
from .corpus import index_records
from .correction import ChannelModel, fuse_and_correct, reinsert
from .extraction import assemble_candidate
from .isolation import isolate_field_utterances
from .review import extract_direct, value_distance


@dataclass(frozen=True)
class FieldMetrics:
    precision: float
    recall: float
    f1: float
    accuracy: float
    mean_ned: float
    tp: int
    fp: int
    fn: int
    tn: int

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "accuracy": self.accuracy,
            "mean_ned": self.mean_ned,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "tn": self.tn,
        }


@dataclass(frozen=True)
class EvalReport:
    per_field: dict[str, FieldMetrics]
    average: FieldMetrics

    def to_dict(self) -> dict:
        return {
            "per_field": {fid: m.to_dict() for fid, m in sorted(self.per_field.items())},
            "average": self.average.to_dict(),
        }

    def table(self) -> str:
        """Plain-text table: one row per field plus the average row."""
        header = f"{'Field':<18}{'Precision':>10}{'Recall':>10}{'F1':>10}{'Accuracy':>10}{'NED':>8}"
        lines = [header, "-" * len(header)]
        for fid in sorted(self.per_field):
            m = self.per_field[fid]
            lines.append(
                f"{fid:<18}{m.precision:>10.4f}{m.recall:>10.4f}{m.f1:>10.4f}"
                f"{m.accuracy:>10.4f}{m.mean_ned:>8.4f}"
            )
        m = self.average
        lines.append(
            f"{'Average':<18}{m.precision:>10.4f}{m.recall:>10.4f}{m.f1:>10.4f}"
            f"{m.accuracy:>10.4f}{m.mean_ned:>8.4f}"
        )
        return "\n".join(lines)


class KeyMismatch(ValueError):
    pass


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def score_reviews(
    decisions: Sequence[ReviewDecision], golds: Sequence[FieldRecord]
) -> EvalReport:
    """Score decisions against gold records keyed by (call_id, field_id)."""
    gold_index = index_records(golds)
    decision_keys = {(d.call_id, d.field_id) for d in decisions}
    missing = sorted(decision_keys - set(gold_index))
    if missing:
        raise KeyMismatch(f"decisions without gold records: {missing[:10]}")

    counts: dict[str, dict[str, float]] = {}
    for decision in decisions:
        record = gold_index[(decision.call_id, decision.field_id)]
        if record.gold_value is None:
            raise KeyMismatch(
                f"record ({record.call_id}, {record.field_id}) has no gold value"
            )
        stats = counts.setdefault(
            decision.field_id,
            {"tp": 0, "fp": 0, "fn": 0, "tn": 0, "exact": 0, "ned": 0.0, "scored": 0},
        )
        live_correct = record.live_call_value == record.gold_value
        approved = decision.verdict == Verdict.AUTO_APPROVE
        if approved and live_correct:
            stats["tp"] += 1
        elif approved:
            stats["fp"] += 1
        elif live_correct:
            stats["fn"] += 1
        else:
            stats["tn"] += 1
        if decision.post_call_value is not None:
            stats["scored"] += 1
            if decision.post_call_value == record.gold_value:
                stats["exact"] += 1
            stats["ned"] += value_distance(decision.post_call_value, record.gold_value)

    per_field = {}
    for fid, s in counts.items():
        precision, recall, f1 = _prf(int(s["tp"]), int(s["fp"]), int(s["fn"]))
        per_field[fid] = FieldMetrics(
            precision=precision,
            recall=recall,
            f1=f1,
            accuracy=s["exact"] / s["scored"] if s["scored"] else 0.0,
            mean_ned=s["ned"] / s["scored"] if s["scored"] else 0.0,
            tp=int(s["tp"]),
            fp=int(s["fp"]),
            fn=int(s["fn"]),
            tn=int(s["tn"]),
        )
    if not per_field:
        empty = FieldMetrics(0.0, 0.0, 0.0, 0.0, 0.0, 0, 0, 0, 0)
        return EvalReport(per_field={}, average=empty)
    n = len(per_field)
    average = FieldMetrics(
        precision=sum(m.precision for m in per_field.values()) / n,
        recall=sum(m.recall for m in per_field.values()) / n,
        f1=sum(m.f1 for m in per_field.values()) / n,
        accuracy=sum(m.accuracy for m in per_field.values()) / n,
        mean_ned=sum(m.mean_ned for m in per_field.values()) / n,
        tp=sum(m.tp for m in per_field.values()),
        fp=sum(m.fp for m in per_field.values()),
        fn=sum(m.fn for m in per_field.values()),
        tn=sum(m.tn for m in per_field.values()),
    )
    return EvalReport(per_field=per_field, average=average)


# ---------------------------------------------------------------------------
# McNemar's test
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class McNemarResult:
    b: int
    c: int
    statistic: float
    p_value: float


def _gamma_series(a: float, x: float) -> float:
    """Lower regularized gamma P(a, x) by series expansion (x < a + 1)."""
    term = 1.0 / a
    total = term
    denom = a
    for _ in range(1000):
        denom += 1.0
        term *= x / denom
        total += term
        if abs(term) < abs(total) * 1e-16:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cont_fraction(a: float, x: float) -> float:
    """Upper regularized gamma Q(a, x) by continued fraction (x >= a + 1)."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 1000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def regularized_gamma_p(a: float, x: float) -> float:
    """Lower regularized incomplete gamma function P(a, x)."""
    if a <= 0 or x < 0:
        raise ValueError("requires a > 0 and x >= 0")
    if x == 0:
        return 0.0
    if x < a + 1.0:
        return _gamma_series(a, x)
    return 1.0 - _gamma_cont_fraction(a, x)


def chi_square_sf(statistic: float, df: int = 1) -> float:
    """Survival function of the chi-square distribution."""
    if statistic <= 0:
        return 1.0
    return 1.0 - regularized_gamma_p(df / 2.0, statistic / 2.0)


def mcnemar(paired_outcomes: Sequence[tuple[bool, bool]]) -> McNemarResult:
    """Paired significance test over discordant outcomes.

    The statistic always carries the continuity correction; the p-value
    uses the chi-square approximation for b + c >= 25 and the exact
    two-sided binomial tail otherwise. b + c = 0 degenerates to p = 1.
    """
    if not paired_outcomes:
        raise ValueError("needs at least one outcome pair")
    b = sum(1 for base, cand in paired_outcomes if base and not cand)
    c = sum(1 for base, cand in paired_outcomes if not base and cand)
    n = b + c
    if n == 0:
        return McNemarResult(b=b, c=c, statistic=0.0, p_value=1.0)
    statistic = max(abs(b - c) - 1.0, 0.0) ** 2 / n
    if n >= 25:
        p_value = chi_square_sf(statistic, df=1)
    else:
        k = max(b, c)
        tail = sum(math.comb(n, i) for i in range(k, n + 1)) / 2.0**n
        p_value = min(1.0, 2.0 * tail)
    return McNemarResult(b=b, c=c, statistic=statistic, p_value=p_value)


# ---------------------------------------------------------------------------
# n-alternatives ablation
# ---------------------------------------------------------------------------


def truncate_alternatives(calls: Sequence, n: int) -> list:
    from .core import CallTranscript, Utterance

    truncated = []
    for call in calls:
        utterances = tuple(
            Utterance(index=u.index, speaker=u.speaker, alternatives=u.alternatives[:n])
            for u in call.utterances
        )
        truncated.append(CallTranscript(call_id=call.call_id, utterances=utterances))
    return truncated


def correct_call(
    call, specs: dict[str, FieldSpec], channel: ChannelModel
):
    """Fuse every isolated field utterance and reinsert the corrections."""
    corrections: dict[int, str] = {}
    for field_id in sorted(specs):
        spec = specs[field_id]
        isolated = isolate_field_utterances(call, spec)
        for index in isolated.utterance_indices:
            utterance = call.utterances[index]
            if not any(assemble_candidate(alt, spec) is not None for alt in utterance.alternatives):
                continue
            corrections[index] = fuse_and_correct(utterance.alternatives, channel, spec)
    return reinsert(call, corrections)


def ablate_n_alternatives(
    calls: Sequence,
    golds: Sequence[FieldRecord],
    ns: Sequence[int],
    specs: dict[str, FieldSpec],
    channel: ChannelModel,
) -> dict[tuple[str, int], float]:
    """F1 of the direct-extraction pipeline per (field, n) truncation."""
    records = index_records(golds)
    results: dict[tuple[str, int], float] = {}
    for n in ns:
        truncated = truncate_alternatives(calls, n)
        decisions = []
        for call in truncated:
            corrected = correct_call(call, specs, channel)
            for field_id in sorted(specs):
                record = records.get((call.call_id, field_id))
                if record is None:
                    continue
                decisions.append(
                    extract_direct(corrected, specs[field_id], record.live_call_value)
                )
        report = score_reviews(decisions, golds)
        for field_id, metrics in report.per_field.items():
            results[(field_id, n)] = metrics.f1
    return results
