"""Interpolated modified Kneser-Ney n-gram language model.

Scores are base-10 logarithms of sentence probabilities including the
end-of-sentence event. Discounts are estimated per order from
count-of-counts, falling back to a fixed 0.75 when those are degenerate.
Lower orders use continuation (type) counts, and the recursion terminates
in a uniform distribution over the output vocabulary, so every conditional
distribution sums to one and every score is finite.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

BOS = "<s>"
EOS = "</s>"
UNK_WORD = "<unk>"

#: Fixed discount used when count-of-counts cannot support estimation.
FALLBACK_DISCOUNT = 0.75

MIN_ORDER, MAX_ORDER = 2, 5

_LN10 = math.log(10.0)


def _estimate_discounts(counts: Iterable[int]) -> tuple[float, float, float]:
    """Count-of-count discount triple (D1, D2, D3+) for one order."""
    n = [0, 0, 0, 0]
    for c in counts:
        if 1 <= c <= 4:
            n[c - 1] += 1
    n1, n2, n3, n4 = n
    if min(n1, n2, n3, n4) == 0:
        return (FALLBACK_DISCOUNT,) * 3
    y = n1 / (n1 + 2.0 * n2)
    d1 = 1.0 - 2.0 * y * (n2 / n1)
    d2 = 2.0 - 3.0 * y * (n3 / n2)
    d3 = 3.0 - 4.0 * y * (n4 / n3)
    if not (0.0 < d1 <= 1.0 and 0.0 < d2 <= 2.0 and 0.0 < d3 <= 3.0):
        return (FALLBACK_DISCOUNT,) * 3
    return (d1, d2, d3)


class NGramModel:
    """A trained model; build one with :func:`train_lm` or :meth:`load`."""

    def __init__(
        self,
        order: int,
        vocab: Sequence[str],
        counts: list[dict[tuple[str, ...], int]],
        discounts: list[tuple[float, float, float]],
    ):
        self.order = order
        self.vocab: tuple[str, ...] = tuple(vocab)
        self._vocab_set = set(self.vocab)
        self.counts = counts
        self.discounts = discounts
        # Per-context total mass and discount-class sizes, per order.
        self._ctx: list[dict[tuple[str, ...], tuple[int, int, int, int]]] = []
        for table in counts:
            stats: dict[tuple[str, ...], list[int]] = {}
            for gram, c in table.items():
                entry = stats.setdefault(gram[:-1], [0, 0, 0, 0])
                entry[0] += c
                if c == 1:
                    entry[1] += 1
                elif c == 2:
                    entry[2] += 1
                else:
                    entry[3] += 1
            self._ctx.append({k: tuple(v) for k, v in stats.items()})

    # -- scoring -----------------------------------------------------------

    def _normalize(self, token: str) -> str:
        if token == BOS or token in self._vocab_set:
            return token
        return UNK_WORD

    def prob(self, word: str, context: Sequence[str]) -> float:
        """P(word | context); unknown tokens map to the unknown symbol."""
        word = self._normalize(word)
        ctx = tuple(self._normalize(t) for t in context)
        return self._prob(self.order, ctx, word)

    def _prob(self, level: int, context: tuple[str, ...], word: str) -> float:
        if level == 0:
            return 1.0 / len(self.vocab)
        ctx = context[-(level - 1) :] if level > 1 else ()
        stats = self._ctx[level - 1].get(ctx)
        if stats is None or stats[0] == 0:
            return self._prob(level - 1, context, word)
        total, n1, n2, n3p = stats
        d1, d2, d3 = self.discounts[level - 1]
        c = self.counts[level - 1].get(ctx + (word,), 0)
        if c == 0:
            discounted = 0.0
        elif c == 1:
            discounted = max(c - d1, 0.0)
        elif c == 2:
            discounted = max(c - d2, 0.0)
        else:
            discounted = max(c - d3, 0.0)
        gamma = (d1 * n1 + d2 * n2 + d3 * n3p) / total
        return discounted / total + gamma * self._prob(level - 1, context, word)

    def log_prob(self, tokens: Sequence[str]) -> float:
        """log10 probability of the token sequence as one sentence,
        including the end-of-sentence event."""
        history = [BOS] * (self.order - 1) + [self._normalize(t) for t in tokens]
        total = 0.0
        for i, word in enumerate(list(tokens) + [EOS]):
            context = tuple(history[i : i + self.order - 1])
            total += math.log(self.prob(word, context)) / _LN10
        return total

    def conditional(self, context: Sequence[str]) -> np.ndarray:
        """The full distribution P(. | context) over :attr:`vocab`."""
        return np.array([self.prob(w, context) for w in self.vocab])

    # -- persistence ---------------------------------------------------------

    def save(self, path: str | Path) -> None:
        payload = {
            "format": "screl-ngram-lm",
            "version": 1,
            "order": self.order,
            "vocab": list(self.vocab),
            "discounts": [list(d) for d in self.discounts],
            "counts": [
                [[*gram, c] for gram, c in sorted(table.items())]
                for table in self.counts
            ],
        }
        Path(path).write_text(json.dumps(payload), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "NGramModel":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        if payload.get("format") != "screl-ngram-lm":
            raise ValueError(f"{path}: not a language model dump")
        if payload.get("version") != 1:
            raise ValueError(f"{path}: unsupported version {payload.get('version')}")
        counts = [
            {tuple(row[:-1]): int(row[-1]) for row in level}
            for level in payload["counts"]
        ]
        discounts = [tuple(map(float, d)) for d in payload["discounts"]]
        return cls(int(payload["order"]), payload["vocab"], counts, discounts)


def train_lm(sentences: Iterable[Sequence[str]], order: int = 3) -> NGramModel:
    """Train on an iterable of token sequences (one sentence each).

    Raw counts feed the highest order; every lower order uses continuation
    type counts derived from the order above it.
    """
    if not MIN_ORDER <= order <= MAX_ORDER:
        raise ValueError(
            f"order must be within [{MIN_ORDER}, {MAX_ORDER}], got {order}"
        )
    raw: list[dict[tuple[str, ...], int]] = [{} for _ in range(order)]
    words: dict[str, None] = {}
    n_sentences = 0
    for sentence in sentences:
        n_sentences += 1
        for w in sentence:
            words.setdefault(w, None)
        seq = [BOS] * (order - 1) + list(sentence) + [EOS]
        for pos in range(order - 1, len(seq)):
            for k in range(1, order + 1):
                gram = tuple(seq[pos - k + 1 : pos + 1])
                raw[k - 1][gram] = raw[k - 1].get(gram, 0) + 1
    if n_sentences == 0:
        raise ValueError("cannot train a language model on an empty corpus")

    counts: list[dict[tuple[str, ...], int]] = [{} for _ in range(order)]
    counts[order - 1] = raw[order - 1]
    for k in range(order - 1, 0, -1):
        table: dict[tuple[str, ...], int] = {}
        for gram in raw[k]:  # distinct (k+1)-gram types, keyed by suffix
            suffix = gram[1:]
            table[suffix] = table.get(suffix, 0) + 1
        counts[k - 1] = table

    vocab: list[str] = sorted(words)
    for special in (EOS, UNK_WORD):
        if special not in words:
            vocab.append(special)
    discounts = [_estimate_discounts(counts[k].values()) for k in range(order)]
    return NGramModel(order, vocab, counts, discounts)


def sentences_from_text(text: str) -> list[list[str]]:
    """Read a plain-text LM corpus: one sentence per line, tokenized the
    same way as the annotated corpus so scores are comparable; blank lines
    are skipped."""
    from .corpus import tokenize

    return [tokenize(line) for line in text.splitlines() if line.strip()]
