"""Relation classification and extraction for entity-annotated scientific
abstracts: corpus handling, preprocessing, two neural sentence classifiers,
language-model-filtered data augmentation, ensembling and scoring."""

__version__ = "0.1.0"

from .corpus import (  # noqa: F401
    Dataset,
    Document,
    Entity,
    RelationInstance,
    RelationKind,
    RelationLabel,
    build_dataset,
    candidate_pairs,
    load_dataset,
    merge,
    parse_abstracts,
    parse_relations,
    serialize_abstracts,
    serialize_relations,
)
from .preprocess import (  # noqa: F401
    ProcessedExample,
    apply_reversal,
    clean_tokens,
    crop_and_tag,
    flatten_entities,
    from_label_scheme,
    to_label_scheme,
)
