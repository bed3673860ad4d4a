"""Token-level feature extraction: vocabulary, word embeddings, POS tags
and relative-position channels.

Every token of a processed example is encoded as four parallel id
sequences: word id, POS id over the Penn Treebank tagset plus two
artificial tags (entity marker and number wildcard), and one clipped
relative position per argument entity.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .preprocess import MARKER, NUM_WILDCARD, ProcessedExample, to_label_scheme

PAD = "<pad>"
UNK = "<unk>"
SPECIALS = (PAD, UNK, MARKER, NUM_WILDCARD)

#: The 36 Penn Treebank part-of-speech tags.
PTB_TAGS = (
    "CC", "CD", "DT", "EX", "FW", "IN", "JJ", "JJR", "JJS", "LS", "MD",
    "NN", "NNP", "NNPS", "NNS", "PDT", "POS", "PRP", "PRP$", "RB", "RBR",
    "RBS", "RP", "SYM", "TO", "UH", "VB", "VBD", "VBG", "VBN", "VBP",
    "VBZ", "WDT", "WP", "WP$", "WRB",
)
UNK_POS = "<unk-pos>"
#: Full POS id space: 36 treebank tags, 2 artificial tags, 1 unknown.
POS_TAGSET = PTB_TAGS + (MARKER, NUM_WILDCARD, UNK_POS)
_POS_INDEX = {tag: i for i, tag in enumerate(POS_TAGSET)}

#: Relative positions are clipped to +/- this many tokens.
RELPOS_CLIP = 30


class Vocabulary:
    """Dense token-to-id map with pinned special symbols.

    Lookup is case-sensitive but falls back to the lowercased form before
    resolving to the unknown id.
    """

    def __init__(self, tokens: Iterable[str]):
        self._id_to_token: list[str] = list(SPECIALS)
        self._token_to_id: dict[str, int] = {t: i for i, t in enumerate(SPECIALS)}
        for token in tokens:
            if token not in self._token_to_id:
                self._token_to_id[token] = len(self._id_to_token)
                self._id_to_token.append(token)

    def __len__(self) -> int:
        return len(self._id_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self._token_to_id

    @property
    def pad_id(self) -> int:
        return self._token_to_id[PAD]

    @property
    def unk_id(self) -> int:
        return self._token_to_id[UNK]

    @property
    def tokens(self) -> tuple[str, ...]:
        return tuple(self._id_to_token)

    def lookup(self, token: str) -> int:
        tid = self._token_to_id.get(token)
        if tid is None:
            tid = self._token_to_id.get(token.lower(), self.unk_id)
        return tid

    def token(self, tid: int) -> str:
        return self._id_to_token[tid]

    def content_hash(self) -> str:
        digest = hashlib.sha256("\n".join(self._id_to_token).encode("utf-8"))
        return digest.hexdigest()[:16]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Vocabulary) and self.tokens == other.tokens


def build_vocab(
    examples: Iterable[ProcessedExample], min_count: int = 1
) -> Vocabulary:
    """Vocabulary over example tokens seen at least ``min_count`` times;
    the four special symbols are always present."""
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    counts: dict[str, int] = {}
    for ex in examples:
        for token in ex.tokens:
            if token in SPECIALS:
                continue
            counts[token] = counts.get(token, 0) + 1
    kept = [t for t, c in counts.items() if c >= min_count]
    return Vocabulary(kept)


def random_embeddings(rows: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    """Zero-mean uniform init with half-range 0.5/dim, the same scheme used
    for rows missing from a pretrained file."""
    return rng.uniform(-0.5 / dim, 0.5 / dim, size=(rows, dim))


def load_embeddings(
    path: str | Path,
    vocab: Vocabulary,
    dim: int,
    seed: int = 0,
) -> np.ndarray:
    """Load a text-format embedding table aligned to ``vocab``.

    The file holds one token and ``dim`` floats per line, optionally after
    a ``count dim`` header. Out-of-vocabulary rows are drawn uniformly from
    ``+/- 0.5/dim``; a dimension mismatch raises ValueError naming both
    the expected and the found width.
    """
    rng = np.random.default_rng(seed)
    table = random_embeddings(len(vocab), dim, rng)
    with open(path, "r", encoding="utf-8") as handle:
        first = handle.readline()
        parts = first.split()
        header = len(parts) == 2 and all(p.isdigit() for p in parts)
        if not header and parts:
            _consume_embedding_line(first, 1, table, vocab, dim)
        for lineno, line in enumerate(handle, 2):
            if line.strip():
                _consume_embedding_line(line, lineno, table, vocab, dim)
    return table


def _consume_embedding_line(
    line: str, lineno: int, table: np.ndarray, vocab: Vocabulary, dim: int
) -> None:
    parts = line.split()
    token, values = parts[0], parts[1:]
    if len(values) != dim:
        raise ValueError(
            f"embedding line {lineno}: expected dimension {dim}, found {len(values)}"
        )
    if token in vocab:
        table[vocab.lookup(token)] = np.array([float(v) for v in values])


@dataclass(frozen=True)
class EncodedExample:
    """Parallel id channels for one processed example."""

    word_ids: np.ndarray
    pos_ids: np.ndarray
    relpos1_ids: np.ndarray
    relpos2_ids: np.ndarray
    label: Optional[int]
    length: int
    original_length: int = 0

    def __post_init__(self) -> None:
        lengths = {
            len(self.word_ids),
            len(self.pos_ids),
            len(self.relpos1_ids),
            len(self.relpos2_ids),
        }
        if lengths != {self.length}:
            raise ValueError(f"channel lengths differ: {sorted(lengths)}")


def pos_tag_id(tag: str) -> int:
    return _POS_INDEX.get(tag, _POS_INDEX[UNK_POS])


def relative_positions(
    n: int, span: tuple[int, int], clip: int = RELPOS_CLIP
) -> np.ndarray:
    """Signed distance of every position to the nearest token of ``span``,
    clipped to ``+/- clip`` and shifted to be non-negative."""
    idx = np.arange(n)
    dist = np.where(idx < span[0], idx - span[0], np.where(idx > span[1], idx - span[1], 0))
    return (np.clip(dist, -clip, clip) + clip).astype(np.int64)


def encode(
    ex: ProcessedExample,
    vocab: Vocabulary,
    scheme: Optional[str] = None,
    tagger: Optional[Callable[[Sequence[str]], list[str]]] = None,
    relpos_clip: int = RELPOS_CLIP,
) -> EncodedExample:
    """Encode a processed example into id channels.

    POS tags come from the example itself when present, otherwise from the
    fallback ``tagger``; with neither available a ValueError is raised.
    Marker and wildcard tokens always take their artificial tags. The label
    becomes a class index under ``scheme`` (``None`` for unlabeled examples
    under the six-class scheme).
    """
    n = len(ex.tokens)
    word_ids = np.array([vocab.lookup(t) for t in ex.tokens], dtype=np.int64)
    if ex.pos_tags is not None:
        tags = list(ex.pos_tags)
    elif tagger is not None:
        tags = tagger(list(ex.tokens))
    else:
        raise ValueError(
            "example carries no POS tags and no fallback tagger was supplied"
        )
    if len(tags) != n:
        raise ValueError(f"tagger produced {len(tags)} tags for {n} tokens")
    pos_ids = np.empty(n, dtype=np.int64)
    for i, token in enumerate(ex.tokens):
        if token == MARKER:
            tag: str = MARKER
        elif token == NUM_WILDCARD:
            tag = NUM_WILDCARD
        else:
            tag = tags[i]
        pos_ids[i] = pos_tag_id(tag)
    label: Optional[int] = None
    if scheme is not None and (ex.label is not None or scheme == "twelve"):
        label = to_label_scheme(ex.label, scheme)
    return EncodedExample(
        word_ids=word_ids,
        pos_ids=pos_ids,
        relpos1_ids=relative_positions(n, ex.e1_span, relpos_clip),
        relpos2_ids=relative_positions(n, ex.e2_span, relpos_clip),
        label=label,
        length=n,
        original_length=ex.original_length,
    )


_CLOSED_CLASS = {
    "the": "DT", "a": "DT", "an": "DT", "this": "DT", "that": "DT",
    "these": "DT", "those": "DT", "each": "DT", "every": "DT", "no": "DT",
    "some": "DT", "any": "DT", "all": "PDT", "both": "DT",
    "of": "IN", "in": "IN", "on": "IN", "at": "IN", "by": "IN",
    "with": "IN", "without": "IN", "from": "IN", "for": "IN", "as": "IN",
    "into": "IN", "over": "IN", "under": "IN", "between": "IN",
    "through": "IN", "during": "IN", "against": "IN", "via": "IN",
    "than": "IN", "if": "IN", "while": "IN", "because": "IN", "after": "IN",
    "before": "IN", "since": "IN", "although": "IN", "whether": "IN",
    "to": "TO",
    "and": "CC", "or": "CC", "but": "CC", "nor": "CC", "yet": "CC",
    "is": "VBZ", "are": "VBP", "was": "VBD", "were": "VBD", "be": "VB",
    "been": "VBN", "being": "VBG", "am": "VBP",
    "has": "VBZ", "have": "VBP", "had": "VBD", "do": "VBP", "does": "VBZ",
    "did": "VBD",
    "can": "MD", "could": "MD", "may": "MD", "might": "MD", "must": "MD",
    "shall": "MD", "should": "MD", "will": "MD", "would": "MD",
    "it": "PRP", "they": "PRP", "we": "PRP", "he": "PRP", "she": "PRP",
    "i": "PRP", "you": "PRP", "them": "PRP", "us": "PRP",
    "its": "PRP$", "their": "PRP$", "our": "PRP$", "his": "PRP$",
    "her": "PRP$", "your": "PRP$", "my": "PRP$",
    "which": "WDT", "who": "WP", "whom": "WP", "whose": "WP$",
    "where": "WRB", "when": "WRB", "why": "WRB", "how": "WRB",
    "not": "RB", "also": "RB", "very": "RB", "only": "RB", "there": "EX",
    "more": "RBR", "most": "RBS", "less": "RBR", "well": "RB",
}


def fallback_tagger(tokens: Sequence[str]) -> list[str]:
    """Deterministic lexicon-and-suffix POS tagger, used when a document
    comes without POS annotations. Coverage over scientific prose is rough
    but stable, which is all the downstream embedding needs."""
    tags: list[str] = []
    for token in tokens:
        tags.append(_tag_one(token))
    return tags


def _tag_one(token: str) -> str:
    if token == MARKER or token == NUM_WILDCARD:
        return token
    lowered = token.lower()
    if lowered in _CLOSED_CLASS:
        return _CLOSED_CLASS[lowered]
    if token[:1].isdigit():
        return "CD"
    if not any(ch.isalpha() for ch in token):
        return UNK_POS  # punctuation and symbols sit outside the 36 tags
    if token[:1].isupper():
        return "NNP"
    if lowered.endswith("ing") and len(lowered) > 4:
        return "VBG"
    if lowered.endswith("ed") and len(lowered) > 3:
        return "VBN"
    if lowered.endswith("ly") and len(lowered) > 3:
        return "RB"
    if lowered.endswith(("ous", "ive", "ical", "able", "ible", "al", "ar")):
        return "JJ"
    if lowered.endswith("est") and len(lowered) > 4:
        return "JJS"
    if lowered.endswith("s") and len(lowered) > 3 and not lowered.endswith("ss"):
        return "NNS"
    return "NN"


def parse_pos_file(text: str) -> dict[str, tuple[str, ...]]:
    """Parse a POS annotation file: ``doc_id<TAB>tag tag ...`` per line,
    tags aligned to the corpus tokenizer's output."""
    out: dict[str, tuple[str, ...]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.rstrip()
        if not line or line.startswith("#"):
            continue
        if "\t" not in line:
            raise ValueError(f"POS line {lineno}: expected 'doc_id<TAB>tags'")
        doc_id, tags = line.split("\t", 1)
        out[doc_id] = tuple(tags.split())
    return out


def attach_pos(doc, mapping: dict[str, tuple[str, ...]]):
    """Return the document with POS tags attached from ``mapping``; an
    alignment mismatch raises ValueError naming the document."""
    from dataclasses import replace

    tags = mapping.get(doc.doc_id)
    if tags is None:
        return doc
    if len(tags) != len(doc.tokens):
        raise ValueError(
            f"document {doc.doc_id}: {len(tags)} POS tags for "
            f"{len(doc.tokens)} tokens"
        )
    return replace(doc, pos_tags=tags)
