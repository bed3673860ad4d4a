"""Prediction clean-up applied after the ensemble.

Two corrections run on raw probability rows before anything is written:

* a symmetric-class fix for direction-annotated classification instances —
  an instance known to be stated in reverse order can never be the
  symmetric class, so the second-best class is taken instead; and
* a conflict resolver for extraction output, where each entity may take
  part in at most one relation, so overlapping positives must be pruned.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .corpus import KINDS, RelationKind
from .preprocess import NONE_INDEX

SYMMETRIC_SIX_INDEX = KINDS.index(RelationKind.COMPARE)


def fix_symmetry(probs: np.ndarray, is_reversed: bool, scheme: str) -> int:
    """Pick the predicted class index, overriding impossible symmetry.

    Under the six-way scheme an instance whose arguments appear in
    reversed text order carries an explicit direction, which the
    symmetric class cannot have; if it still wins the argmax, the
    runner-up is returned. Ties break toward the lower index. The
    twelve-way scheme encodes direction in the label space itself, so
    the plain argmax stands.
    """
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 1:
        raise ValueError(f"expected one probability row, got shape {probs.shape}")
    if scheme not in ("six", "twelve"):
        raise ValueError(f"unknown label scheme {scheme!r}")
    best = int(np.argmax(probs))
    if scheme == "six" and is_reversed and best == SYMMETRIC_SIX_INDEX:
        masked = probs.copy()
        masked[SYMMETRIC_SIX_INDEX] = -np.inf
        return int(np.argmax(masked))
    return best


@dataclass(frozen=True)
class CandidatePrediction:
    """One positive extraction candidate awaiting conflict resolution."""

    e1: str
    e2: str
    class_index: int
    length: int  # tokens between the arguments in the original text

    def __post_init__(self) -> None:
        if self.e1 == self.e2:
            raise ValueError(f"self-relation on entity {self.e1!r}")
        if self.length < 0:
            raise ValueError(f"negative candidate length {self.length}")


def resolve_conflicts(
    candidates: Sequence[CandidatePrediction],
    class_frequencies: Sequence[float],
    seed: int = 0,
    none_index: int = NONE_INDEX,
) -> list[CandidatePrediction]:
    """Greedily keep candidates so that no entity appears twice.

    Candidates predicted as the null class are dropped up front. The
    rest are ranked by argument distance (shorter first), then by the
    training-set frequency of the predicted class (more frequent first),
    with any remaining ties ordered by a seeded shuffle. Walking that
    ranking, a candidate is kept only if neither entity is already used.
    The survivors come back in input order.
    """
    freqs = np.asarray(class_frequencies, dtype=np.float64)
    live = [
        (i, c) for i, c in enumerate(candidates) if c.class_index != none_index
    ]
    for _, cand in live:
        if cand.class_index < 0 or cand.class_index >= freqs.size:
            raise ValueError(
                f"class index {cand.class_index} out of range for "
                f"{freqs.size} class frequencies"
            )
    rng = np.random.default_rng(seed)
    jitter = rng.permutation(len(live))
    ranked = sorted(
        range(len(live)),
        key=lambda j: (live[j][1].length, -freqs[live[j][1].class_index], jitter[j]),
    )
    used: set[str] = set()
    kept: list[int] = []
    for j in ranked:
        _, cand = live[j]
        if cand.e1 in used or cand.e2 in used:
            continue
        used.add(cand.e1)
        used.add(cand.e2)
        kept.append(j)
    kept_input_order = sorted(kept, key=lambda j: live[j][0])
    return [live[j][1] for j in kept_input_order]


def predict_labels(
    probs: np.ndarray,
    reversed_flags: Sequence[bool],
    scheme: str,
) -> list[int]:
    """Row-wise ``fix_symmetry`` over a probability matrix."""
    probs = np.asarray(probs)
    if probs.shape[0] != len(reversed_flags):
        raise ValueError(
            f"{probs.shape[0]} probability rows but {len(reversed_flags)} flags"
        )
    return [
        fix_symmetry(row, rev, scheme)
        for row, rev in zip(probs, reversed_flags)
    ]


def class_frequencies(labels: Sequence[int], n_classes: int) -> np.ndarray:
    """Label histogram used to rank conflicting candidates."""
    counts = np.bincount(np.asarray(labels, dtype=np.int64), minlength=n_classes)
    if counts.size > n_classes:
        raise ValueError(
            f"label {int(np.asarray(labels).max())} out of range for {n_classes} classes"
        )
    return counts.astype(np.float64)
