"""Regularized logistic fitting for the small feature-based classifiers.

Newton iterations on standardized features; deterministic for fixed
inputs. Model weights serialize to plain dicts so trained models persist
as structured text.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LogisticModel:
    means: tuple[float, ...]
    stds: tuple[float, ...]
    weights: tuple[float, ...]  # bias last

    def scores(self, features: np.ndarray) -> np.ndarray:
        x = (np.asarray(features, dtype=float) - np.array(self.means)) / np.array(self.stds)
        # clip to the standardized training range so far-out-of-distribution
        # inputs cannot extrapolate through mildly collinear weights
        x = np.clip(x, -4.0, 4.0)
        z = x @ np.array(self.weights[:-1]) + self.weights[-1]
        return 1.0 / (1.0 + np.exp(-np.clip(z, -35, 35)))

    def score_one(self, features) -> float:
        return float(self.scores(np.asarray(features, dtype=float)[None, :])[0])

    def to_dict(self) -> dict:
        return {
            "means": list(self.means),
            "stds": list(self.stds),
            "weights": list(self.weights),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LogisticModel":
        return cls(
            means=tuple(data["means"]),
            stds=tuple(data["stds"]),
            weights=tuple(data["weights"]),
        )


def fit_logistic(
    features: np.ndarray,
    labels: np.ndarray,
    l2: float = 1.0,
    iterations: int = 30,
) -> LogisticModel:
    """L2-regularized logistic regression via Newton's method.

    Raises ValueError when labels are single-class; callers treat that as
    a training error.
    """
    x = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=float)
    if x.ndim != 2 or len(x) != len(y):
        raise ValueError("features must be 2-d and aligned with labels")
    if len(np.unique(y)) < 2:
        raise ValueError("training needs both classes present")
    means = x.mean(axis=0)
    stds = x.std(axis=0)
    stds[stds < 1e-9] = 1.0
    xs = np.clip((x - means) / stds, -4.0, 4.0)
    design = np.hstack([xs, np.ones((len(xs), 1))])
    n, d = design.shape
    w = np.zeros(d)
    reg = l2 * np.eye(d)
    reg[-1, -1] = 0.0  # bias unregularized
    for _ in range(iterations):
        z = np.clip(design @ w, -35, 35)
        p = 1.0 / (1.0 + np.exp(-z))
        grad = design.T @ (p - y) + reg @ w
        hess = design.T @ (design * (p * (1 - p))[:, None]) + reg + 1e-9 * np.eye(d)
        step = np.linalg.solve(hess, grad)
        w = w - step
        if np.max(np.abs(step)) < 1e-10:
            break
    return LogisticModel(means=tuple(means), stds=tuple(stds), weights=tuple(w))


def choose_threshold_max_f1(scores: np.ndarray, labels: np.ndarray) -> float:
    """Threshold maximizing F1 of the positive class; deterministic."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=bool)
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    total_pos = int(sorted_labels.sum())
    best_f1 = -1.0
    best_threshold = 0.5
    tp = 0
    for i in range(len(sorted_scores)):
        tp += int(sorted_labels[i])
        # thresholds between distinct scores only
        if i + 1 < len(sorted_scores) and sorted_scores[i + 1] == sorted_scores[i]:
            continue
        predicted_pos = i + 1
        precision = tp / predicted_pos
        recall = tp / total_pos if total_pos else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        if f1 > best_f1:
            best_f1 = f1
            nxt = sorted_scores[i + 1] if i + 1 < len(sorted_scores) else sorted_scores[i] - 1e-6
            best_threshold = (sorted_scores[i] + nxt) / 2.0
    return float(min(max(best_threshold, 1e-6), 1 - 1e-6))


def auc_score(scores: np.ndarray, labels: np.ndarray) -> float:
    """Area under the ROC curve via the rank statistic."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=bool)
    pos = scores[labels]
    neg = scores[~labels]
    if len(pos) == 0 or len(neg) == 0:
        return float("nan")
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(len(scores), dtype=float)
    sorted_scores = scores[order]
    i = 0
    while i < len(sorted_scores):
        j = i
        while j + 1 < len(sorted_scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    pos_ranks = ranks[labels]
    u = pos_ranks.sum() - len(pos) * (len(pos) + 1) / 2.0
    return float(u / (len(pos) * len(neg)))
