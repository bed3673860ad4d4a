"""Frequency-weighted cross-entropy and class weighting."""

from __future__ import annotations

import numpy as np

#: Probabilities are clamped here before any logarithm.
EPS = 1e-12


def softmax(logits: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = logits - logits.max(axis=axis, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=axis, keepdims=True)


def class_weights(counts) -> np.ndarray:
    """Inverse-frequency class weights.

    ``w[i] = total / (n_classes * counts[i])``, so expected loss scaling is
    preserved: ``sum(counts * w) == sum(counts)``.
    """
    counts = np.asarray(counts, dtype=np.float64)
    if counts.ndim != 1 or counts.size == 0:
        raise ValueError("counts must be a non-empty vector")
    if np.any(counts <= 0):
        bad = int(np.argmin(counts))
        raise ValueError(f"class {bad} has non-positive count {counts[bad]}")
    return counts.sum() / (counts.size * counts)


def weighted_ce(probs, true_class: int, weights) -> float:
    """Single-example loss: ``-w[y] * log(p[y])`` with the true-class
    probability clamped to EPS."""
    probs = np.asarray(probs, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    p = max(float(probs[true_class]), EPS)
    return -float(weights[true_class]) * float(np.log(p))


def weighted_ce_batch(
    logits: np.ndarray, labels: np.ndarray, weights: np.ndarray
) -> tuple[float, np.ndarray]:
    """Mean weighted cross-entropy over a batch, straight from logits,
    together with its gradient with respect to the logits."""
    n = logits.shape[0]
    probs = softmax(logits)
    w = weights[labels].astype(logits.dtype)
    p_true = np.clip(probs[np.arange(n), labels], EPS, None)
    loss = float(np.mean(-w * np.log(p_true)))
    dlogits = probs * w[:, None]
    dlogits[np.arange(n), labels] -= w
    dlogits /= n
    return loss, dlogits.astype(logits.dtype)
