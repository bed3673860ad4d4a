"""Preparation of relation instances for the classifiers.

The pipeline over a parsed document is: flatten nested entities, clean the
token stream (bracketed-span removal and number wildcarding), crop each
instance to the region between its entities with ``<e>`` boundary markers,
and, for the six-class scheme, reverse the word order of instances whose
label carries the REVERSE flag.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Optional

from .corpus import (
    ASYMMETRIC_KINDS,
    KINDS,
    Document,
    Entity,
    RelationInstance,
    RelationKind,
    RelationLabel,
    ValidationError,
    sentence_spans,
)

logger = logging.getLogger(__name__)

#: Entity boundary marker; a single symbol on purpose, so that a reversed
#: token sequence carries exactly the same markers.
MARKER = "<e>"
NUM_WILDCARD = "<num>"

LABEL_SCHEMES = ("six", "twelve")
#: Class count per scheme.
SCHEME_SIZES = {"six": 6, "twelve": 12}
#: Index of the no-relation class in the twelve-class scheme.
NONE_INDEX = 11

_OPENERS = {"(": ")", "[": "]"}
_CLOSERS = {")": "(", "]": "["}


@dataclass(frozen=True)
class ProcessedExample:
    """A cropped, marker-tagged instance ready for encoding.

    ``e1_span``/``e2_span`` are inclusive token-index ranges of the two
    argument entities within ``tokens``; they track the semantic arguments,
    so after reversal ``e1_span`` lies to the right of ``e2_span``.
    ``original_length`` is the token count strictly between the entities
    before any reversal.
    """

    tokens: tuple[str, ...]
    e1_span: tuple[int, int]
    e2_span: tuple[int, int]
    label: Optional[RelationLabel] = None
    reversed: bool = False
    original_length: int = 0
    pos_tags: Optional[tuple[str, ...]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if self.pos_tags is not None:
            object.__setattr__(self, "pos_tags", tuple(self.pos_tags))
            if len(self.pos_tags) != len(self.tokens):
                raise ValidationError("POS tags do not align with tokens")
        if self.tokens.count(MARKER) != 4:
            raise ValidationError(
                f"expected exactly 4 {MARKER} markers, got "
                f"{self.tokens.count(MARKER)}"
            )

    @property
    def interior(self) -> tuple[str, ...]:
        """Tokens strictly between the two inner markers."""
        positions = [i for i, t in enumerate(self.tokens) if t == MARKER]
        return self.tokens[positions[1] + 1 : positions[2]]

    def render(self) -> str:
        return " ".join(self.tokens)


def flatten_entities(doc: Document) -> Document:
    """Truncate nesting entity spans until none strictly contains another.

    The containing span keeps the part before the contained span when that
    is non-empty, otherwise the part after it. All entity ids survive.
    Identical spans are left alone.
    """
    spans = {ent.id: [ent.start, ent.end] for ent in doc.entities}
    changed = True
    while changed:
        changed = False
        order = sorted(spans, key=lambda eid: spans[eid][1] - spans[eid][0])
        for inner_id in order:
            istart, iend = spans[inner_id]
            for outer_id in order:
                if outer_id == inner_id:
                    continue
                ostart, oend = spans[outer_id]
                if not (ostart <= istart and iend <= oend):
                    continue
                if (ostart, oend) == (istart, iend):
                    continue
                if ostart < istart:
                    spans[outer_id] = [ostart, istart - 1]
                else:
                    spans[outer_id] = [iend + 1, oend]
                changed = True
    entities = tuple(
        Entity(ent.id, spans[ent.id][0], spans[ent.id][1]) for ent in doc.entities
    )
    return replace(doc, entities=entities)


def _is_numeric(token: str) -> bool:
    core = token[:-1] if token.endswith("%") else token
    if not core or not core[0].isdigit():
        return False
    digits = False
    for part in core.replace(",", ".").split("."):
        if part and not part.isdigit():
            return False
        digits = digits or bool(part)
    return digits


def clean_tokens(doc: Document) -> Document:
    """Drop parenthesized/bracketed spans and wildcard standalone numbers.

    A bracketed span (brackets included) is deleted unless it intersects an
    entity. A numeric token becomes ``<num>`` unless it lies inside an
    entity or immediately follows a capitalized alphabetic token. Sentences
    with unbalanced brackets are left untouched with a warning.
    """
    tokens = list(doc.tokens)
    n = len(tokens)

    def in_entity(i: int) -> bool:
        return any(ent.start <= i <= ent.end for ent in doc.entities)

    delete = [False] * n
    for s_start, s_end in sentence_spans(doc):
        stack: list[tuple[str, int]] = []
        pairs: list[tuple[int, int]] = []
        balanced = True
        for i in range(s_start, s_end + 1):
            t = tokens[i]
            if t in _OPENERS:
                stack.append((t, i))
            elif t in _CLOSERS:
                if not stack or stack[-1][0] != _CLOSERS[t]:
                    balanced = False
                    break
                _, open_i = stack.pop()
                pairs.append((open_i, i))
        if stack or not balanced:
            logger.warning(
                "document %s: unbalanced brackets in tokens %d-%d; left untouched",
                doc.doc_id,
                s_start,
                s_end,
            )
            continue
        for open_i, close_i in pairs:
            if any(ent.start <= close_i and ent.end >= open_i for ent in doc.entities):
                continue
            for i in range(open_i, close_i + 1):
                delete[i] = True

    # Wildcard decisions use the original adjacency, before deletions apply.
    out_tokens: list[str] = []
    out_tags: list[str] | None = [] if doc.pos_tags is not None else None
    new_index: list[int] = []
    for i in range(n):
        if delete[i]:
            new_index.append(-1)
            continue
        token = tokens[i]
        if _is_numeric(token) and not in_entity(i):
            prev = tokens[i - 1] if i > 0 else ""
            if not (prev.isalpha() and prev[:1].isupper()):
                token = NUM_WILDCARD
        new_index.append(len(out_tokens))
        out_tokens.append(token)
        if out_tags is not None:
            assert doc.pos_tags is not None
            out_tags.append(NUM_WILDCARD if token == NUM_WILDCARD else doc.pos_tags[i])

    entities = tuple(
        Entity(ent.id, new_index[ent.start], new_index[ent.end])
        for ent in doc.entities
    )
    return Document(
        doc.doc_id,
        tuple(out_tokens),
        entities,
        tuple(out_tags) if out_tags is not None else None,
    )


def crop_and_tag(doc: Document, inst: RelationInstance) -> ProcessedExample:
    """Crop a document to ``<e> e1 <e> interior <e> e2 <e>``."""
    ent1 = doc.entity(inst.e1)
    ent2 = doc.entity(inst.e2)
    if ent1.start > ent2.start:
        raise ValidationError(
            f"({inst.e1},{inst.e2}): first entity does not precede the second"
        )
    if ent1.end >= ent2.start:
        raise ValidationError(
            f"({inst.e1},{inst.e2}): entity spans overlap; flatten first"
        )
    first = list(doc.tokens[ent1.start : ent1.end + 1])
    interior = list(doc.tokens[ent1.end + 1 : ent2.start])
    second = list(doc.tokens[ent2.start : ent2.end + 1])
    tokens = [MARKER, *first, MARKER, *interior, MARKER, *second, MARKER]
    e1_span = (1, len(first))
    s2 = len(first) + 2 + len(interior) + 1
    e2_span = (s2, s2 + len(second) - 1)
    pos_tags = None
    if doc.pos_tags is not None:
        pick = lambda ent: list(doc.pos_tags[ent.start : ent.end + 1])  # noqa: E731
        pos_tags = tuple(
            [MARKER, *pick(ent1), MARKER,
             *doc.pos_tags[ent1.end + 1 : ent2.start],
             MARKER, *pick(ent2), MARKER]
        )
    return ProcessedExample(
        tokens=tuple(tokens),
        e1_span=e1_span,
        e2_span=e2_span,
        label=inst.label,
        reversed=False,
        original_length=len(interior),
        pos_tags=pos_tags,
    )


def reverse_example(ex: ProcessedExample) -> ProcessedExample:
    """Unconditional full word-level reversal; an involution."""
    n = len(ex.tokens)
    mirror = lambda span: (n - 1 - span[1], n - 1 - span[0])  # noqa: E731
    return replace(
        ex,
        tokens=tuple(reversed(ex.tokens)),
        e1_span=mirror(ex.e1_span),
        e2_span=mirror(ex.e2_span),
        pos_tags=tuple(reversed(ex.pos_tags)) if ex.pos_tags is not None else None,
        reversed=not ex.reversed,
    )


def apply_reversal(ex: ProcessedExample) -> ProcessedExample:
    """Reverse the word order of a REVERSE-labeled example (six-class
    scheme); the direction flag moves from the label into ``reversed``.
    Anything else passes through unchanged."""
    if ex.label is None or not ex.label.reverse:
        return ex
    out = reverse_example(ex)
    return replace(out, label=RelationLabel(ex.label.kind, False), reversed=True)


def to_label_scheme(label: Optional[RelationLabel], scheme: str) -> int:
    """Map a label to its class index under the six- or twelve-class scheme.

    Six-class: one index per relation kind, direction handled by reversal.
    Twelve-class: five ordered kinds, the same five reversed, COMPARE, NONE
    (``label=None``).
    """
    _check_scheme(scheme)
    if scheme == "six":
        if label is None:
            raise ValidationError("the six-class scheme has no NONE class")
        if label.reverse:
            raise ValidationError(
                "six-class labels are direction-free; apply reversal first"
            )
        return KINDS.index(label.kind)
    if label is None:
        return NONE_INDEX
    if label.kind is RelationKind.COMPARE:
        return 10
    base = ASYMMETRIC_KINDS.index(label.kind)
    return base + (5 if label.reverse else 0)


def from_label_scheme(index: int, scheme: str) -> Optional[RelationLabel]:
    """Inverse of to_label_scheme; NONE comes back as ``None``."""
    _check_scheme(scheme)
    size = SCHEME_SIZES[scheme]
    if not 0 <= index < size:
        raise ValidationError(f"class index {index} out of range for {scheme!r}")
    if scheme == "six":
        return RelationLabel(KINDS[index], False)
    if index == NONE_INDEX:
        return None
    if index == 10:
        return RelationLabel(RelationKind.COMPARE, False)
    return RelationLabel(ASYMMETRIC_KINDS[index % 5], reverse=index >= 5)


def _check_scheme(scheme: str) -> None:
    if scheme not in LABEL_SCHEMES:
        raise ValueError(
            f"unknown label scheme {scheme!r}; expected one of {LABEL_SCHEMES}"
        )
