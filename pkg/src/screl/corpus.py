"""Entity-annotated abstracts and relation files.

Parsing, validation and serialization of the two input formats, dataset
assembly and merging, sentence splitting, and candidate-pair enumeration.

File formats
------------
Abstract file: UTF-8 text holding one or more ``<text id="...">`` or
``<abstract id="...">`` blocks, one document each. Inside a block, plain
tokens are interleaved with ``<entity id="...">...</entity>`` elements,
which may nest. Literal ``<`` and ``>`` are reserved for markup.

Relation file: one ``LABEL(id1,id2)`` or ``LABEL(id1,id2,REVERSE)`` per
line; ``#`` comment lines and blank lines are ignored. Entity ids are
listed in text order, with ``REVERSE`` marking that the semantic argument
order is the opposite. With ``allow_unlabeled=True`` the pseudo-label
``UNKNOWN`` is accepted for instances whose type is to be predicted; a
``REVERSE`` flag on those records the known argument direction.
"""

from __future__ import annotations

import logging
import re
import string
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional

logger = logging.getLogger(__name__)

PUNCT = frozenset(string.punctuation)
SENTENCE_END = frozenset(".!?")

#: Valid values for Dataset.provenance.
PROVENANCES = ("subtask1.1", "subtask1.2", "subtask2", "merged", "generated")


class CorpusError(ValueError):
    """Base class for corpus input problems."""


class ParseError(CorpusError):
    """Structurally malformed input."""


class ValidationError(CorpusError):
    """Well-formed input that violates a content rule."""


class RelationKind(str, Enum):
    """The six relation types, in canonical index order."""

    USAGE = "USAGE"
    RESULT = "RESULT"
    MODEL_FEATURE = "MODEL-FEATURE"
    PART_WHOLE = "PART-WHOLE"
    TOPIC = "TOPIC"
    COMPARE = "COMPARE"


KINDS: tuple[RelationKind, ...] = tuple(RelationKind)
#: The five directional types; COMPARE is symmetric and never reversed.
ASYMMETRIC_KINDS: tuple[RelationKind, ...] = KINDS[:5]


@dataclass(frozen=True)
class Entity:
    """A contiguous entity mention, as an inclusive token-index span."""

    id: str
    start: int
    end: int

    def __post_init__(self) -> None:
        if not self.id:
            raise ValidationError("entity id must be non-empty")
        if self.start < 0 or self.end < self.start:
            raise ValidationError(
                f"entity {self.id!r}: bad span [{self.start}, {self.end}]"
            )

    def __len__(self) -> int:
        return self.end - self.start + 1


@dataclass(frozen=True)
class Document:
    doc_id: str
    tokens: tuple[str, ...]
    entities: tuple[Entity, ...] = ()
    pos_tags: Optional[tuple[str, ...]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "entities", tuple(self.entities))
        if self.pos_tags is not None:
            object.__setattr__(self, "pos_tags", tuple(self.pos_tags))
            if len(self.pos_tags) != len(self.tokens):
                raise ValidationError(
                    f"document {self.doc_id}: {len(self.pos_tags)} POS tags "
                    f"for {len(self.tokens)} tokens"
                )
        seen: set[str] = set()
        for ent in self.entities:
            if ent.id in seen:
                raise ValidationError(
                    f"document {self.doc_id}: duplicate entity id {ent.id!r}"
                )
            seen.add(ent.id)
            if ent.end >= len(self.tokens):
                raise ValidationError(
                    f"document {self.doc_id}: entity {ent.id!r} span "
                    f"[{ent.start}, {ent.end}] exceeds {len(self.tokens)} tokens"
                )

    def entity(self, eid: str) -> Entity:
        for ent in self.entities:
            if ent.id == eid:
                return ent
        raise KeyError(eid)

    def entity_tokens(self, eid: str) -> tuple[str, ...]:
        ent = self.entity(eid)
        return self.tokens[ent.start : ent.end + 1]


@dataclass(frozen=True)
class RelationLabel:
    """A relation type plus its direction flag."""

    kind: RelationKind
    reverse: bool = False

    def __post_init__(self) -> None:
        if self.kind is RelationKind.COMPARE and self.reverse:
            raise ValidationError("COMPARE is symmetric and cannot be reversed")


@dataclass(frozen=True)
class RelationInstance:
    """An ordered entity pair, optionally labeled.

    ``e1`` precedes ``e2`` in text order. ``reverse`` records the argument
    direction; for labeled instances it always mirrors ``label.reverse``,
    for unlabeled ones it preserves a REVERSE flag given in the input.
    """

    e1: str
    e2: str
    label: Optional[RelationLabel] = None
    reverse: bool = False

    def __post_init__(self) -> None:
        if self.e1 == self.e2:
            raise ValidationError(f"self-relation on entity {self.e1!r}")
        if self.label is not None:
            object.__setattr__(self, "reverse", self.label.reverse)

    @property
    def pair(self) -> tuple[str, str]:
        return (self.e1, self.e2)


@dataclass(frozen=True)
class Dataset:
    documents: tuple[Document, ...]
    instances: tuple[RelationInstance, ...]
    provenance: str = "subtask1.1"

    def __post_init__(self) -> None:
        object.__setattr__(self, "documents", tuple(self.documents))
        object.__setattr__(self, "instances", tuple(self.instances))
        if self.provenance not in PROVENANCES:
            raise ValidationError(
                f"unknown provenance {self.provenance!r}; expected one of "
                f"{', '.join(PROVENANCES)}"
            )

    def entity_index(self) -> dict[str, tuple[Document, Entity]]:
        index: dict[str, tuple[Document, Entity]] = {}
        for doc in self.documents:
            for ent in doc.entities:
                if ent.id in index:
                    raise ValidationError(
                        f"entity id {ent.id!r} appears in more than one document"
                    )
                index[ent.id] = (doc, ent)
        return index

    def document(self, doc_id: str) -> Document:
        for doc in self.documents:
            if doc.doc_id == doc_id:
                return doc
        raise KeyError(doc_id)


def tokenize(text: str) -> list[str]:
    """Split on whitespace, then peel leading and trailing punctuation
    characters off each chunk as tokens of their own."""
    out: list[str] = []
    for chunk in text.split():
        lead: list[str] = []
        while chunk and chunk[0] in PUNCT:
            lead.append(chunk[0])
            chunk = chunk[1:]
        trail: list[str] = []
        while chunk and chunk[-1] in PUNCT:
            trail.append(chunk[-1])
            chunk = chunk[:-1]
        out.extend(lead)
        if chunk:
            out.append(chunk)
        out.extend(reversed(trail))
    return out


_TAG_RE = re.compile(r"<(/?)(entity|text|abstract)(?:\s+id=\"([^\"]*)\")?\s*>")


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


def parse_abstracts(text: str) -> list[Document]:
    """Parse an abstract file into documents.

    Raises ParseError (naming the byte offset) on malformed markup and
    ValidationError on duplicate entity ids or empty entities.
    """
    docs: list[Document] = []
    doc_id: Optional[str] = None
    block_tag = ""
    block_offset = 0
    tokens: list[str] = []
    entities: list[Entity] = []
    open_stack: list[tuple[str, int, int]] = []  # (id, start token, byte offset)
    seen_ids: set[str] = set()
    pos = 0

    def consume(segment: str, seg_start: int) -> None:
        stray = segment.find("<")
        if stray < 0:
            stray = segment.find(">")
        if stray >= 0:
            raise ParseError(
                f"stray angle bracket at byte offset "
                f"{_byte_offset(text, seg_start + stray)}"
            )
        if doc_id is None:
            if segment.strip():
                raise ParseError(
                    f"text outside any block at byte offset "
                    f"{_byte_offset(text, seg_start)}"
                )
        else:
            tokens.extend(tokenize(segment))

    for m in _TAG_RE.finditer(text):
        consume(text[pos : m.start()], pos)
        pos = m.end()
        closing, name, attr_id = m.group(1) == "/", m.group(2), m.group(3)
        offset = _byte_offset(text, m.start())
        if name in ("text", "abstract"):
            if not closing:
                if doc_id is not None:
                    raise ParseError(f"nested <{name}> at byte offset {offset}")
                if not attr_id:
                    raise ParseError(f"<{name}> without id at byte offset {offset}")
                doc_id, block_tag, block_offset = attr_id, name, offset
                tokens, entities, open_stack = [], [], []
                seen_ids = set()
            else:
                if doc_id is None or name != block_tag:
                    raise ParseError(f"unmatched </{name}> at byte offset {offset}")
                if open_stack:
                    raise ParseError(
                        f"entity {open_stack[-1][0]!r} opened at byte offset "
                        f"{open_stack[-1][2]} is never closed"
                    )
                docs.append(Document(doc_id, tuple(tokens), tuple(entities)))
                doc_id = None
        else:  # entity
            if doc_id is None:
                raise ParseError(f"<entity> outside block at byte offset {offset}")
            if not closing:
                if not attr_id:
                    raise ParseError(f"<entity> without id at byte offset {offset}")
                if attr_id in seen_ids:
                    raise ValidationError(
                        f"document {doc_id}: duplicate entity id {attr_id!r}"
                    )
                seen_ids.add(attr_id)
                open_stack.append((attr_id, len(tokens), offset))
            else:
                if not open_stack:
                    raise ParseError(f"unmatched </entity> at byte offset {offset}")
                eid, start, eoff = open_stack.pop()
                if len(tokens) <= start:
                    raise ValidationError(
                        f"entity {eid!r} at byte offset {eoff} contains no tokens"
                    )
                entities.append(Entity(eid, start, len(tokens) - 1))
    consume(text[pos:], pos)
    if doc_id is not None:
        raise ParseError(
            f"block <{block_tag} id=\"{doc_id}\"> opened at byte offset "
            f"{block_offset} is never closed"
        )
    return docs


def serialize_abstracts(docs: Iterable[Document]) -> str:
    """Render documents back to the abstract file format.

    The output is canonical: tokens joined by single spaces, one block per
    document, entity tags attached to their first and last token. Parsing
    the result recovers the same documents.
    """
    parts: list[str] = []
    for doc in docs:
        parts.append(f'<text id="{doc.doc_id}">')
        parts.append(_render_annotated(doc))
        parts.append("</text>")
    return "\n".join(parts) + "\n"


def _render_annotated(doc: Document) -> str:
    opens: dict[int, list[Entity]] = {}
    closes: dict[int, list[Entity]] = {}
    for ent in doc.entities:
        opens.setdefault(ent.start, []).append(ent)
        closes.setdefault(ent.end, []).append(ent)
    order: dict[str, int] = {}
    stack: list[str] = []
    units: list[str] = []
    for i, token in enumerate(doc.tokens):
        prefix = []
        # Longer spans open first so that nesting is well formed.
        for ent in sorted(opens.get(i, ()), key=lambda e: -e.end):
            order[ent.id] = len(order)
            stack.append(ent.id)
            prefix.append(f'<entity id="{ent.id}">')
        suffix = []
        for ent in sorted(closes.get(i, ()), key=lambda e: -order.get(e.id, -1)):
            if not stack or stack[-1] != ent.id:
                raise ValidationError(
                    f"document {doc.doc_id}: entity {ent.id!r} overlaps another "
                    "entity and cannot be serialized"
                )
            stack.pop()
            suffix.append("</entity>")
        units.append("".join(prefix) + token + "".join(suffix))
    return " ".join(units)


_REL_RE = re.compile(
    r"^([A-Za-z-]+)\(\s*([^,()\s]+)\s*,\s*([^,()\s]+)\s*(?:,\s*(REVERSE)\s*)?\)$"
)


def parse_relations(text: str, allow_unlabeled: bool = False) -> list[RelationInstance]:
    """Parse a relation file into instances, preserving line order."""
    valid = {kind.value: kind for kind in KINDS}
    instances: list[RelationInstance] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _REL_RE.match(line)
        if not m:
            raise ParseError(f"line {lineno}: cannot parse relation {line!r}")
        name, e1, e2, rev = m.group(1), m.group(2), m.group(3), bool(m.group(4))
        if name == "UNKNOWN" and allow_unlabeled:
            instances.append(RelationInstance(e1, e2, None, reverse=rev))
            continue
        if name not in valid:
            raise ValidationError(
                f"line {lineno}: unknown label {name!r}; valid labels are "
                + ", ".join(valid)
            )
        if valid[name] is RelationKind.COMPARE and rev:
            raise ValidationError(
                f"line {lineno}: COMPARE is symmetric and cannot carry REVERSE"
            )
        instances.append(RelationInstance(e1, e2, RelationLabel(valid[name], rev)))
    return instances


def serialize_relations(instances: Iterable[RelationInstance]) -> str:
    lines = []
    for inst in instances:
        name = inst.label.kind.value if inst.label is not None else "UNKNOWN"
        rev = ",REVERSE" if inst.reverse else ""
        lines.append(f"{name}({inst.e1},{inst.e2}{rev})")
    return "\n".join(lines) + ("\n" if lines else "")


def build_dataset(
    documents: Iterable[Document],
    instances: Iterable[RelationInstance],
    provenance: str = "subtask1.1",
) -> Dataset:
    """Assemble and validate a dataset.

    Duplicate documents and duplicate identically-labeled instances are
    dropped; conflicting duplicates raise ValidationError. Instances must
    reference entities of a single document, listed in text order.
    """
    by_id: dict[str, Document] = {}
    for doc in documents:
        prior = by_id.get(doc.doc_id)
        if prior is None:
            by_id[doc.doc_id] = doc
        elif prior != doc:
            raise ValidationError(
                f"conflicting content for document {doc.doc_id!r}"
            )
    docs = tuple(by_id.values())
    index: dict[str, tuple[Document, Entity]] = {}
    for doc in docs:
        for ent in doc.entities:
            if ent.id in index:
                raise ValidationError(
                    f"entity id {ent.id!r} appears in more than one document"
                )
            index[ent.id] = (doc, ent)

    kept: dict[tuple[str, str], RelationInstance] = {}
    for inst in instances:
        for eid in (inst.e1, inst.e2):
            if eid not in index:
                raise ValidationError(f"relation references unknown entity {eid!r}")
        doc1, ent1 = index[inst.e1]
        doc2, ent2 = index[inst.e2]
        if doc1.doc_id != doc2.doc_id:
            raise ValidationError(
                f"relation ({inst.e1},{inst.e2}) spans documents "
                f"{doc1.doc_id!r} and {doc2.doc_id!r}"
            )
        if (ent1.start, ent1.end) >= (ent2.start, ent2.end):
            raise ValidationError(
                f"relation ({inst.e1},{inst.e2}): ids must be listed in text order"
            )
        prior = kept.get(inst.pair)
        if prior is None:
            kept[inst.pair] = inst
        elif prior != inst:
            raise ValidationError(
                f"conflicting labels for pair ({inst.e1},{inst.e2})"
            )
    return Dataset(docs, tuple(kept.values()), provenance)


def load_dataset(
    abstract_path: str | Path,
    relation_path: Optional[str | Path] = None,
    provenance: str = "subtask1.1",
    allow_unlabeled: bool = False,
) -> Dataset:
    docs = parse_abstracts(Path(abstract_path).read_text(encoding="utf-8"))
    instances: list[RelationInstance] = []
    if relation_path is not None:
        instances = parse_relations(
            Path(relation_path).read_text(encoding="utf-8"), allow_unlabeled
        )
    return build_dataset(docs, instances, provenance)


def merge(first: Dataset, second: Dataset) -> Dataset:
    """Union of two datasets; see build_dataset for the duplicate policy."""
    return build_dataset(
        first.documents + second.documents,
        first.instances + second.instances,
        provenance="merged",
    )


def sentence_spans(doc: Document) -> list[tuple[int, int]]:
    """Inclusive token spans of sentences.

    A boundary falls after ``.``, ``!`` or ``?`` whenever the next token
    starts with an uppercase letter, except inside an entity span.
    """
    n = len(doc.tokens)
    if n == 0:
        return []
    boundaries = []
    for i in range(n - 1):
        if doc.tokens[i] not in SENTENCE_END:
            continue
        if not doc.tokens[i + 1][:1].isupper():
            continue
        if any(ent.start <= i < ent.end for ent in doc.entities):
            continue
        boundaries.append(i)
    spans = []
    start = 0
    for b in boundaries:
        spans.append((start, b))
        start = b + 1
    spans.append((start, n - 1))
    return spans


def candidate_pairs(doc: Document, max_distance: int) -> list[RelationInstance]:
    """All ordered same-sentence entity pairs with at most ``max_distance``
    tokens strictly between them, as unlabeled instances."""
    if max_distance < 1:
        raise ValueError(f"max_distance must be >= 1, got {max_distance}")
    spans = sentence_spans(doc)

    def sentence_of(ent: Entity) -> int:
        for k, (s, e) in enumerate(spans):
            if s <= ent.start and ent.end <= e:
                return k
        return -1

    ents = sorted(doc.entities, key=lambda e: (e.start, e.end))
    out: list[RelationInstance] = []
    for i, a in enumerate(ents):
        for b in ents[i + 1 :]:
            if a.end >= b.start:  # overlapping spans cannot form a pair
                continue
            if sentence_of(a) != sentence_of(b) or sentence_of(a) < 0:
                continue
            distance = b.start - a.end - 1
            if distance <= max_distance:
                out.append(RelationInstance(a.id, b.id))
    return out
