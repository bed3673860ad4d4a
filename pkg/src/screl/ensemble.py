"""Combining member predictions.

Two stages: members of the same architecture are averaged into one
distribution per architecture, then the CNN and RNN averages are blended
with a length-dependent weight that favors the recurrent side on long
sequences and the convolutional side on short ones.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

TOLERANCE = 1e-6


def average(distributions: Sequence[np.ndarray]) -> np.ndarray:
    """Mean of per-member probability rows, renormalized defensively.

    Every member must supply an array of identical shape ``(n, k)`` (or
    ``(k,)``) whose rows sum to 1 within ``TOLERANCE``; rows drifting
    further than that indicate a corrupt input and raise ``ValueError``.
    """
    if len(distributions) == 0:
        raise ValueError("cannot average zero distributions")
    arrays = [np.asarray(d, dtype=np.float64) for d in distributions]
    shape = arrays[0].shape
    for i, arr in enumerate(arrays):
        if arr.shape != shape:
            raise ValueError(
                f"distribution {i} has shape {arr.shape}, expected {shape}"
            )
        sums = arr.sum(axis=-1)
        if np.any(np.abs(sums - 1.0) > TOLERANCE):
            worst = float(np.abs(sums - 1.0).max())
            raise ValueError(
                f"distribution {i} rows do not sum to 1 (max deviation {worst:.3g})"
            )
        if np.any(arr < 0.0):
            raise ValueError(f"distribution {i} contains negative probabilities")
    mean = np.mean(arrays, axis=0)
    return mean / mean.sum(axis=-1, keepdims=True)


def rnn_weight(length: int, min_length: int, max_length: int) -> float:
    """Blend weight for the recurrent side as a function of sequence length.

    The length is first mapped linearly onto [-0.5, 0.5] over the observed
    range, then pushed through a signed square so mid-range lengths stay
    near an even split while the extremes approach the 0.25 / 0.75 caps:

        s = (length - min) / (max - min) - 0.5
        w = 0.5 + sign(s) * s**2

    A degenerate range (``min_length == max_length``) yields 0.5.
    """
    if min_length > max_length:
        raise ValueError(
            f"min_length {min_length} exceeds max_length {max_length}"
        )
    if not min_length <= length <= max_length:
        raise ValueError(
            f"length {length} outside observed range [{min_length}, {max_length}]"
        )
    if min_length == max_length:
        return 0.5
    s = (length - min_length) / (max_length - min_length) - 0.5
    return 0.5 + float(np.sign(s)) * s * s


def combine(
    cnn_probs: np.ndarray,
    rnn_probs: np.ndarray,
    lengths: Sequence[int],
    min_length: int,
    max_length: int,
) -> np.ndarray:
    """Blend architecture averages row by row: ``w*rnn + (1-w)*cnn``."""
    cnn_probs = np.asarray(cnn_probs, dtype=np.float64)
    rnn_probs = np.asarray(rnn_probs, dtype=np.float64)
    if cnn_probs.shape != rnn_probs.shape:
        raise ValueError(
            f"architecture outputs disagree: {cnn_probs.shape} vs {rnn_probs.shape}"
        )
    if cnn_probs.shape[0] != len(lengths):
        raise ValueError(
            f"{cnn_probs.shape[0]} probability rows but {len(lengths)} lengths"
        )
    weights = np.array(
        [rnn_weight(n, min_length, max_length) for n in lengths]
    )[:, None]
    out = weights * rnn_probs + (1.0 - weights) * cnn_probs
    return out / out.sum(axis=-1, keepdims=True)


def blend(
    member_probs: Sequence[np.ndarray],
    member_archs: Sequence[str],
    lengths: Sequence[int],
    min_length: Optional[int] = None,
    max_length: Optional[int] = None,
) -> np.ndarray:
    """Full combination: per-architecture averaging, then length blending.

    ``min_length``/``max_length`` default to the extremes of ``lengths``
    (i.e. the range is fit on the data being predicted). If only one
    architecture is present its average is returned unchanged.
    """
    if len(member_probs) != len(member_archs):
        raise ValueError(
            f"{len(member_probs)} probability arrays but {len(member_archs)} architectures"
        )
    by_arch: dict[str, list[np.ndarray]] = {}
    for probs, arch in zip(member_probs, member_archs):
        if arch not in ("cnn", "rnn"):
            raise ValueError(f"unknown architecture {arch!r}")
        by_arch.setdefault(arch, []).append(probs)
    averages = {arch: average(group) for arch, group in by_arch.items()}
    if len(averages) == 1:
        return next(iter(averages.values()))
    if min_length is None:
        min_length = int(min(lengths))
    if max_length is None:
        max_length = int(max(lengths))
    clipped = [int(np.clip(n, min_length, max_length)) for n in lengths]
    return combine(averages["cnn"], averages["rnn"], clipped,
                   min_length, max_length)


def write_probabilities(
    path,
    probs: np.ndarray,
    class_names: Sequence[str],
    instance_ids: Sequence[str],
    header_comment: Optional[str] = None,
) -> None:
    """Dump a probability matrix as TSV: one row per instance."""
    probs = np.asarray(probs)
    if probs.shape[1] != len(class_names):
        raise ValueError(
            f"{probs.shape[1]} probability columns but {len(class_names)} class names"
        )
    if probs.shape[0] != len(instance_ids):
        raise ValueError(
            f"{probs.shape[0]} probability rows but {len(instance_ids)} instance ids"
        )
    with open(path, "w", encoding="utf-8") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        fh.write("instance\t" + "\t".join(class_names) + "\n")
        for inst_id, row in zip(instance_ids, probs):
            cells = "\t".join(f"{p:.6f}" for p in row)
            fh.write(f"{inst_id}\t{cells}\n")
