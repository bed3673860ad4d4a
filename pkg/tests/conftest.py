from pathlib import Path

import numpy as np
import pytest

from screl.corpus import Document, Entity, RelationInstance, RelationKind, RelationLabel

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


@pytest.fixture
def simple_doc() -> Document:
    # The statistical parser uses a beam search .
    #  0      1         2     3   4  5     6   7
    return Document(
        doc_id="D-1",
        tokens=("The", "statistical", "parser", "uses", "a", "beam",
                "search", "."),
        entities=(Entity("D-1.1", 1, 2), Entity("D-1.2", 5, 6)),
    )


@pytest.fixture
def usage_instance() -> RelationInstance:
    return RelationInstance("D-1.1", "D-1.2", RelationLabel(RelationKind.USAGE, False))


def random_processed(rng: np.random.Generator):
    """A random well-formed cropped example for property loops."""
    from screl.preprocess import MARKER, ProcessedExample

    words = ["alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta"]
    pick = lambda k: [words[int(i)] for i in rng.integers(0, len(words), k)]
    n1 = int(rng.integers(1, 4))
    n2 = int(rng.integers(1, 4))
    ni = int(rng.integers(0, 8))
    first, interior, second = pick(n1), pick(ni), pick(n2)
    tokens = (MARKER, *first, MARKER, *interior, MARKER, *second, MARKER)
    s2 = n1 + 2 + ni + 1
    kinds = list(RelationKind)
    kind = kinds[int(rng.integers(len(kinds)))]
    reverse = bool(rng.integers(2)) and kind is not RelationKind.COMPARE
    return ProcessedExample(
        tokens=tokens,
        e1_span=(1, n1),
        e2_span=(s2, s2 + n2 - 1),
        label=RelationLabel(kind, reverse),
        reversed=False,
        original_length=ni,
    )
