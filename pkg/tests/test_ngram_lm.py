"""Smoothed n-gram model tests.

The core oracle is a fully hand-worked bigram model over a three-sentence
corpus; every probability is written down as an exact fraction derived on
paper from the counting and discounting rules, so these tests do not share
any arithmetic with the implementation.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from screl.ngram_lm import (
    BOS,
    EOS,
    FALLBACK_DISCOUNT,
    UNK_WORD,
    NGramModel,
    sentences_from_text,
    train_lm,
)

CORPUS = [
    ["the", "cat", "sat"],
    ["the", "dog", "sat"],
    ["the", "cat", "ran"],
]

# Hand-worked bigram quantities for CORPUS:
#
#   bigram counts     (<s>,the):3 (the,cat):2 (the,dog):1 (cat,sat):1
#                     (cat,ran):1 (dog,sat):1 (sat,</s>):2 (ran,</s>):1
#   count-of-counts   n1=5, n2=2, n3=1, n4=0  -> discounts fall back to 0.75
#   continuation counts (distinct left contexts):
#                     the:1 cat:1 dog:1 sat:2 ran:1 </s>:2   total 8
#   vocabulary        cat dog ran sat the </s> <unk>         |V| = 7
#
# Unigram backoff (empty context, total 8, four 1-counts, two 2-counts):
#   gamma_uni = (0.75*4 + 0.75*2) / 8 = 9/16
#   p_uni(w)  = max(c(w)-0.75, 0)/8 + (9/16)*(1/7)
P_UNI_THE = Fraction(1, 32) + Fraction(9, 112)            # 25/224
P_UNI_CAT = Fraction(1, 32) + Fraction(9, 112)            # 25/224
P_UNI_SAT = Fraction(5, 32) + Fraction(9, 112)            # 53/224
P_UNI_EOS = Fraction(5, 32) + Fraction(9, 112)            # 53/224
P_UNI_UNK = Fraction(9, 112)                              # unseen: gamma/|V|

# Bigram level:
#   p(the|<s>)  ctx total 3, one 3-count: (3-.75)/3 + (.75/3)*p_uni(the)
#   p(cat|the)  ctx total 3 {cat:2,dog:1}: (2-.75)/3 + (1.5/3)*p_uni(cat)
#   p(sat|cat)  ctx total 2 {sat:1,ran:1}: (1-.75)/2 + (1.5/2)*p_uni(sat)
#   p(</s>|sat) ctx total 2 {</s>:2}:      (2-.75)/2 + (.75/2)*p_uni(</s>)
P_THE_AFTER_BOS = Fraction(3, 4) + Fraction(1, 4) * P_UNI_THE    # 697/896
P_CAT_AFTER_THE = Fraction(5, 12) + Fraction(1, 2) * P_UNI_CAT   # 635/1344
P_SAT_AFTER_CAT = Fraction(1, 8) + Fraction(3, 4) * P_UNI_SAT    # 271/896
P_EOS_AFTER_SAT = Fraction(5, 8) + Fraction(3, 8) * P_UNI_EOS    # 1279/1792


@pytest.fixture(scope="module")
def bigram():
    return train_lm(CORPUS, order=2)


class TestHandWorkedBigram:
    def test_seen_transitions(self, bigram):
        assert bigram.prob("the", [BOS]) == pytest.approx(
            float(P_THE_AFTER_BOS), abs=1e-12
        )
        assert bigram.prob("cat", ["the"]) == pytest.approx(
            float(P_CAT_AFTER_THE), abs=1e-12
        )
        assert bigram.prob("sat", ["cat"]) == pytest.approx(
            float(P_SAT_AFTER_CAT), abs=1e-12
        )
        assert bigram.prob(EOS, ["sat"]) == pytest.approx(
            float(P_EOS_AFTER_SAT), abs=1e-12
        )

    def test_unseen_word_in_seen_context(self, bigram):
        # gamma("cat") = 1.5/2 = 3/4; all mass via the unigram level
        expected = Fraction(3, 4) * P_UNI_UNK
        assert bigram.prob(UNK_WORD, ["cat"]) == pytest.approx(
            float(expected), abs=1e-12
        )

    def test_unseen_context_backs_off_completely(self, bigram):
        assert bigram.prob("sat", ["zzz"]) == pytest.approx(
            float(P_UNI_SAT), abs=1e-12
        )

    def test_sentence_log_probability(self, bigram):
        expected = sum(
            math.log10(float(p))
            for p in (P_THE_AFTER_BOS, P_CAT_AFTER_THE, P_SAT_AFTER_CAT,
                      P_EOS_AFTER_SAT)
        )
        assert bigram.log_prob(["the", "cat", "sat"]) == pytest.approx(
            expected, abs=1e-10
        )

    def test_discounts_fell_back(self, bigram):
        # n4 = 0 at the bigram level, so estimation cannot be used
        assert bigram.discounts[1] == (FALLBACK_DISCOUNT,) * 3


class TestNormalization:
    def test_seen_contexts_sum_to_one(self, bigram):
        for ctx in (["the"], ["cat"], ["sat"], [BOS]):
            dist = bigram.conditional(ctx)
            assert dist.sum() == pytest.approx(1.0, abs=1e-12)

    def test_unseen_context_sums_to_one(self, bigram):
        dist = bigram.conditional(["never-seen"])
        assert dist.sum() == pytest.approx(1.0, abs=1e-12)

    def test_trigram_normalizes_on_fixture_corpus(self, data_dir):
        text = (data_dir / "lm_corpus.txt").read_text(encoding="utf-8")
        lm = train_lm(sentences_from_text(text), order=3)
        rng = np.random.default_rng(5)
        words = [w for w in lm.vocab if w not in (EOS, UNK_WORD)]
        for _ in range(50):
            i, j = rng.integers(0, len(words), 2)
            dist = lm.conditional([words[int(i)], words[int(j)]])
            assert dist.sum() == pytest.approx(1.0, abs=1e-6)


class TestEstimatedDiscounts:
    def test_formula_applied_when_counts_allow(self):
        # Corpus engineered to have n1..n4 > 0 at the unigram level of a
        # unigram model: counts 1,1,1,2,2,3,4 over seven words.
        sentences = [
            ["a"], ["b"], ["c"],
            ["d"], ["d"], ["e"], ["e"],
            ["f"], ["f"], ["f"],
            ["g"], ["g"], ["g"], ["g"],
        ]
        lm = train_lm(sentences, order=2)
        # Top (bigram) level count-of-counts: every (<s>, w) bigram has the
        # same count as w itself: n1=3, n2=2, n3=1, n4=1.
        y = 3 / (3 + 2 * 2)
        d1 = 1 - 2 * y * (2 / 3)
        d2 = 2 - 3 * y * (1 / 2)
        d3 = 3 - 4 * y * (1 / 1)
        est = lm.discounts[1]
        assert est[0] == pytest.approx(d1, abs=1e-12)
        assert est[1] == pytest.approx(d2, abs=1e-12)
        # d3 here is 3 - 12/7 = 9/7, within (0, 3], so it is kept
        assert est[2] == pytest.approx(d3, abs=1e-12)


class TestPersistence:
    def test_round_trip_is_bit_exact(self, tmp_path, bigram):
        path = tmp_path / "lm.json"
        bigram.save(path)
        loaded = NGramModel.load(path)
        assert loaded.order == bigram.order
        assert loaded.vocab == bigram.vocab
        assert loaded.discounts == bigram.discounts
        for ctx in ([BOS], ["the"], ["cat"], ["unseen"]):
            np.testing.assert_array_equal(
                loaded.conditional(ctx), bigram.conditional(ctx)
            )
        assert loaded.log_prob(["the", "dog", "ran"]) == bigram.log_prob(
            ["the", "dog", "ran"]
        )

    def test_wrong_format_rejected(self, tmp_path):
        path = tmp_path / "bogus.json"
        path.write_text('{"format": "something-else"}')
        with pytest.raises(ValueError):
            NGramModel.load(path)


class TestTraining:
    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            train_lm([], order=2)

    def test_order_bounds(self):
        with pytest.raises(ValueError):
            train_lm(CORPUS, order=1)
        with pytest.raises(ValueError):
            train_lm(CORPUS, order=6)

    def test_vocab_is_sorted_words_plus_terminals(self, bigram):
        assert bigram.vocab == ("cat", "dog", "ran", "sat", "the",
                                EOS, UNK_WORD)

    def test_sentences_from_text(self):
        text = "The cat sat.\n\nthe dog ran\n"
        assert sentences_from_text(text) == [
            ["The", "cat", "sat", "."], ["the", "dog", "ran"]
        ]

    def test_higher_order_scores_training_sentences_better(self):
        lm2 = train_lm(CORPUS, order=2)
        lm3 = train_lm(CORPUS * 5, order=3)
        target = ["the", "cat", "sat"]
        assert lm3.log_prob(target) > lm2.log_prob(target) - 1.0
