"""End-to-end assembly: raw corpus in, relation predictions out.

This module strings the pieces together — document preparation, instance
cropping, encoding, ensemble prediction, and the conversion of class
indices back into relation records — so the CLI and tests stay thin.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .corpus import (
    Dataset,
    RelationInstance,
    RelationLabel,
    candidate_pairs,
)
from .ensemble import blend
from .features import (
    EncodedExample,
    Vocabulary,
    attach_pos,
    encode,
    fallback_tagger,
)
from .postprocess import (
    CandidatePrediction,
    fix_symmetry,
    resolve_conflicts,
)
from .preprocess import (
    NONE_INDEX,
    ProcessedExample,
    apply_reversal,
    clean_tokens,
    crop_and_tag,
    flatten_entities,
    from_label_scheme,
    reverse_example,
)
from .training import PadIds, iter_batches

logger = logging.getLogger(__name__)


def prepare_documents(
    dataset: Dataset,
    pos_map: Optional[dict[str, tuple[str, ...]]] = None,
    pos_fallback: bool = True,
) -> Dataset:
    """POS-tag, de-nest, and clean every document.

    Tags come from ``pos_map`` where available; documents still untagged
    get the heuristic tagger when ``pos_fallback`` is set, and otherwise
    stay untagged (encoding will then need its own tagger).
    """
    docs = []
    for doc in dataset.documents:
        if pos_map is not None:
            doc = attach_pos(doc, pos_map)
        if doc.pos_tags is None and pos_fallback:
            doc = replace(doc, pos_tags=tuple(fallback_tagger(list(doc.tokens))))
        doc = clean_tokens(flatten_entities(doc))
        docs.append(doc)
    return Dataset(tuple(docs), dataset.instances, dataset.provenance)


def classification_examples(
    dataset: Dataset,
) -> list[tuple[RelationInstance, ProcessedExample]]:
    """Crop one example per dataset instance (six-class setting).

    Labeled REVERSE instances are word-reversed with the flag folded into
    the example; unlabeled instances marked reverse are word-reversed too,
    so the model always sees arguments in semantic order.
    """
    index = dataset.entity_index()
    out = []
    for inst in dataset.instances:
        doc, _ = index[inst.e1]
        ex = crop_and_tag(doc, inst)
        if ex.label is not None:
            ex = apply_reversal(ex)
        elif inst.reverse:
            ex = reverse_example(ex)
        out.append((inst, ex))
    return out


def extraction_examples(
    dataset: Dataset,
    max_distance: int,
) -> list[tuple[RelationInstance, ProcessedExample]]:
    """Generate candidate pairs per document (twelve-class setting).

    Candidates matching a gold instance take its label; the rest stay
    unlabeled and encode to the null class. Gold relations whose pair is
    never generated (cross-sentence or too distant) are logged — they are
    unreachable for the classifier and count against recall downstream.
    """
    gold: dict[tuple[str, str], RelationLabel] = {}
    for inst in dataset.instances:
        if inst.label is not None:
            gold[(inst.e1, inst.e2)] = inst.label
    out = []
    seen: set[tuple[str, str]] = set()
    for doc in dataset.documents:
        for cand in candidate_pairs(doc, max_distance):
            key = (cand.e1, cand.e2)
            seen.add(key)
            label = gold.get(key)
            inst = RelationInstance(cand.e1, cand.e2, label)
            out.append((inst, crop_and_tag(doc, inst)))
    missed = sorted(set(gold) - seen)
    if missed:
        logger.info(
            "%d gold relation(s) outside the candidate space, e.g. %s",
            len(missed), f"({missed[0][0]},{missed[0][1]})",
        )
    return out


def encode_examples(
    examples: Sequence[ProcessedExample],
    vocab: Vocabulary,
    scheme: str,
    relpos_clip: int = 30,
) -> list[EncodedExample]:
    return [
        encode(ex, vocab, scheme, tagger=fallback_tagger, relpos_clip=relpos_clip)
        for ex in examples
    ]


def predict_probs(
    models: Sequence,
    encoded: Sequence[EncodedExample],
    pads: PadIds,
    batch_size: int = 64,
) -> np.ndarray:
    """Blended ensemble probabilities, one row per encoded example.

    Batches are built in input order (no shuffling), so row ``i`` always
    belongs to ``encoded[i]`` regardless of batch size.
    """
    if not models:
        raise ValueError("no models to predict with")
    if not encoded:
        raise ValueError("nothing to predict")
    member_probs = []
    archs = []
    for model in models:
        min_length = getattr(model, "min_length", 1)
        rows = [
            model.predict_proba(batch)
            for batch in iter_batches(encoded, batch_size, pads, min_length)
        ]
        member_probs.append(np.concatenate(rows, axis=0))
        archs.append(model.arch)
    lengths = [ex.original_length for ex in encoded]
    return blend(member_probs, archs, lengths)


def classification_predictions(
    pairs: Sequence[tuple[RelationInstance, ProcessedExample]],
    probs: np.ndarray,
) -> list[RelationInstance]:
    """Turn six-class probability rows back into labeled instances.

    The direction of each prediction is the instance's stated direction;
    the symmetric class is blocked for reversed instances, so the labels
    produced here are always well-formed.
    """
    probs = np.asarray(probs)
    if probs.shape[0] != len(pairs):
        raise ValueError(f"{probs.shape[0]} rows for {len(pairs)} instances")
    out = []
    for (inst, ex), row in zip(pairs, probs):
        idx = fix_symmetry(row, ex.reversed, "six")
        label = from_label_scheme(idx, "six")
        assert label is not None
        if ex.reversed:
            label = RelationLabel(label.kind, True)
        out.append(RelationInstance(inst.e1, inst.e2, label))
    return out


def extraction_predictions(
    pairs: Sequence[tuple[RelationInstance, ProcessedExample]],
    probs: np.ndarray,
    class_frequencies: Sequence[float],
    seed: int = 0,
) -> list[RelationInstance]:
    """Twelve-class rows to a conflict-free set of positive relations."""
    probs = np.asarray(probs)
    if probs.shape[0] != len(pairs):
        raise ValueError(f"{probs.shape[0]} rows for {len(pairs)} candidates")
    candidates = []
    for (inst, ex), row in zip(pairs, probs):
        idx = fix_symmetry(row, ex.reversed, "twelve")
        candidates.append(
            CandidatePrediction(inst.e1, inst.e2, idx, ex.original_length)
        )
    kept = resolve_conflicts(candidates, class_frequencies, seed=seed,
                             none_index=NONE_INDEX)
    out = []
    for cand in kept:
        label = from_label_scheme(cand.class_index, "twelve")
        assert label is not None
        out.append(RelationInstance(cand.e1, cand.e2, label))
    return out


@dataclass(frozen=True)
class PreparedData:
    """Everything prediction-side code needs, in one bundle."""

    pairs: tuple[tuple[RelationInstance, ProcessedExample], ...]
    encoded: tuple[EncodedExample, ...]

    def labels(self) -> list[Optional[int]]:
        return [ex.label for ex in self.encoded]


def prepare(
    dataset: Dataset,
    vocab: Vocabulary,
    subtask: str,
    *,
    max_distance: int = 19,
    relpos_clip: int = 30,
    pos_map: Optional[dict[str, tuple[str, ...]]] = None,
    pos_fallback: bool = True,
) -> PreparedData:
    """Documents to encoded instances for either subtask."""
    if subtask not in ("1", "2"):
        raise ValueError(f"subtask must be '1' or '2', got {subtask!r}")
    ds = prepare_documents(dataset, pos_map=pos_map, pos_fallback=pos_fallback)
    if subtask == "1":
        pairs = classification_examples(ds)
    else:
        pairs = extraction_examples(ds, max_distance)
    scheme = "six" if subtask == "1" else "twelve"
    encoded = encode_examples([ex for _, ex in pairs], vocab, scheme,
                              relpos_clip=relpos_clip)
    return PreparedData(tuple(pairs), tuple(encoded))
