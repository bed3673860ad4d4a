"""Synthetic training data from recombined entities and templates.

Each sufficiently long inter-entity word sequence from the training set is
a template. A template is instantiated at most once, with an entity pair
sampled from the test-side pool, and the instantiation is kept only when a
language model finds the marker-free sentence fluent enough.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .corpus import Dataset, Document, Entity, RelationInstance, build_dataset
from .ngram_lm import NGramModel
from .preprocess import MARKER, ProcessedExample

#: Minimum log10 sentence probability for a generated sample to be kept.
DEFAULT_THRESHOLD = -21.0
#: Minimum template length in words.
DEFAULT_MIN_INTERIOR = 5

EntityPair = tuple[tuple[str, ...], tuple[str, ...]]


def entity_pair_texts(dataset: Dataset) -> list[EntityPair]:
    """Token texts of the entity pairs appearing in a dataset's instances."""
    index = dataset.entity_index()
    pairs: list[EntityPair] = []
    for inst in dataset.instances:
        doc1, ent1 = index[inst.e1]
        _, ent2 = index[inst.e2]
        pairs.append(
            (
                doc1.tokens[ent1.start : ent1.end + 1],
                doc1.tokens[ent2.start : ent2.end + 1],
            )
        )
    return pairs


def generate_with_scores(
    templates: Sequence[ProcessedExample],
    entity_pairs: Sequence[EntityPair],
    lm: NGramModel,
    threshold: float = DEFAULT_THRESHOLD,
    min_interior: int = DEFAULT_MIN_INTERIOR,
    seed: int = 0,
) -> tuple[list[ProcessedExample], list[tuple[int, float, bool]]]:
    """Like :func:`generate`, also returning a per-sample score trace.

    The trace holds one ``(template_index, lm_score, kept)`` row for every
    sample actually drawn (skipped-short templates draw nothing and leave
    no row), which is what the reporting path plots.
    """
    if not entity_pairs:
        raise ValueError("entity pair pool is empty")
    rng = np.random.default_rng(seed)
    out: list[ProcessedExample] = []
    trace: list[tuple[int, float, bool]] = []
    for t, template in enumerate(templates):
        if template.reversed:
            raise ValueError("templates must be unreversed crops")
        interior = template.interior
        if len(interior) < min_interior:
            continue
        first, second = entity_pairs[int(rng.integers(len(entity_pairs)))]
        tokens = (MARKER, *first, MARKER, *interior, MARKER, *second, MARKER)
        score = lm.log_prob(first + interior + second)
        kept = score >= threshold
        trace.append((t, score, kept))
        if not kept:
            continue
        s2 = len(first) + 2 + len(interior) + 1
        out.append(
            ProcessedExample(
                tokens=tokens,
                e1_span=(1, len(first)),
                e2_span=(s2, s2 + len(second) - 1),
                label=template.label,
                reversed=False,
                original_length=len(interior),
            )
        )
    return out, trace


def generate(
    templates: Sequence[ProcessedExample],
    entity_pairs: Sequence[EntityPair],
    lm: NGramModel,
    threshold: float = DEFAULT_THRESHOLD,
    min_interior: int = DEFAULT_MIN_INTERIOR,
    seed: int = 0,
) -> list[ProcessedExample]:
    """Generate labeled samples, at most one per template.

    ``templates`` must be unreversed crops; their labels, including the
    REVERSE flag, carry over to the generated samples. A template shorter
    than ``min_interior`` is skipped; an instantiated sample is kept only
    when the language-model score of its marker-free token sequence is at
    least ``threshold``.
    """
    kept, _ = generate_with_scores(
        templates, entity_pairs, lm, threshold, min_interior, seed
    )
    return kept


def to_dataset(
    generated: Sequence[ProcessedExample], prefix: str = "GEN"
) -> Dataset:
    """Wrap generated samples as a dataset in the corpus file formats."""
    documents: list[Document] = []
    instances: list[RelationInstance] = []
    for i, ex in enumerate(generated):
        doc_id = f"{prefix}-{i + 1:04d}"
        tokens = [t for t in ex.tokens if t != MARKER]
        len1 = ex.e1_span[1] - ex.e1_span[0] + 1
        len2 = ex.e2_span[1] - ex.e2_span[0] + 1
        interior = len(tokens) - len1 - len2
        entities = (
            Entity(f"{doc_id}.1", 0, len1 - 1),
            Entity(f"{doc_id}.2", len1 + interior, len(tokens) - 1),
        )
        documents.append(Document(doc_id, tuple(tokens), entities))
        instances.append(
            RelationInstance(f"{doc_id}.1", f"{doc_id}.2", ex.label)
        )
    return build_dataset(documents, instances, provenance="generated")
