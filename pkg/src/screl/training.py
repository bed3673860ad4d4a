"""Training loops, class balancing, learning-rate schedule and
document-grouped cross-validation folds."""

from __future__ import annotations

import hashlib
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .config import derive_seed
from .corpus import Dataset, build_dataset
from .features import EncodedExample
from .model import (
    Adam,
    Batch,
    CnnConfig,
    CnnModel,
    EmbedSpec,
    RnnConfig,
    RnnModel,
    class_weights,
    make_batch,
    train_step,
)

logger = logging.getLogger(__name__)


def lr_schedule(initial: float, epoch: int, halve_every: int) -> float:
    """Step decay: the rate halves every ``halve_every`` epochs."""
    if initial <= 0.0:
        raise ValueError(f"initial learning rate must be positive, got {initial}")
    if halve_every < 1:
        raise ValueError(f"halve_every must be >= 1, got {halve_every}")
    if epoch < 0:
        raise ValueError(f"epoch must be >= 0, got {epoch}")
    return initial * 0.5 ** (epoch // halve_every)


def upsample(
    examples: Sequence[EncodedExample],
    ratio: float,
    seed: int,
    none_index: int,
) -> list[EncodedExample]:
    """Duplicate positive examples (label != none_index), sampling with
    replacement, until positives/negatives reaches ``ratio``; then shuffle.
    Never removes anything; a pool without positives is an error."""
    if ratio <= 0.0:
        raise ValueError(f"upsample ratio must be positive, got {ratio}")
    positives = [ex for ex in examples if ex.label != none_index]
    negatives = [ex for ex in examples if ex.label == none_index]
    if not positives:
        raise ValueError("cannot upsample: no positive examples in the pool")
    rng = np.random.default_rng(seed)
    out = list(examples)
    target = round(ratio * len(negatives))
    if target > len(positives):
        extra = rng.integers(0, len(positives), size=target - len(positives))
        out.extend(positives[i] for i in extra)
    order = rng.permutation(len(out))
    return [out[i] for i in order]


def kfold(dataset: Dataset, k: int, seed: int) -> list[tuple[Dataset, Dataset]]:
    """Document-grouped folds: every instance of a document lands in the
    same fold, and fold sizes in documents differ by at most one."""
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    docs = list(dataset.documents)
    if len(docs) < k:
        raise ValueError(f"cannot build {k} folds from {len(docs)} documents")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(docs))
    folds: list[list[int]] = [[] for _ in range(k)]
    for rank, doc_idx in enumerate(order):
        folds[rank % k].append(int(doc_idx))
    index = dataset.entity_index()
    splits: list[tuple[Dataset, Dataset]] = []
    for i in range(k):
        val_ids = {docs[j].doc_id for j in folds[i]}
        val_docs = [d for d in docs if d.doc_id in val_ids]
        train_docs = [d for d in docs if d.doc_id not in val_ids]
        val_inst = [
            inst for inst in dataset.instances
            if index[inst.e1][0].doc_id in val_ids
        ]
        train_inst = [
            inst for inst in dataset.instances
            if index[inst.e1][0].doc_id not in val_ids
        ]
        splits.append(
            (
                build_dataset(train_docs, train_inst, dataset.provenance),
                build_dataset(val_docs, val_inst, dataset.provenance),
            )
        )
    return splits


def weights_from_labels(labels: Sequence[int], n_classes: int) -> np.ndarray:
    """Inverse-frequency weights over the classes that actually occur;
    absent classes get weight zero (they contribute no loss anyway)."""
    counts = np.bincount(np.asarray(labels, dtype=np.int64), minlength=n_classes)
    present = counts > 0
    weights = np.zeros(n_classes, dtype=np.float64)
    weights[present] = class_weights(counts[present])
    return weights


@dataclass(frozen=True)
class PadIds:
    """Fill values for the four channels when batching."""

    word: int
    pos: int
    relpos: int


def iter_batches(
    examples: Sequence[EncodedExample],
    batch_size: int,
    pads: PadIds,
    min_length: int,
    rng: Optional[np.random.Generator] = None,
) -> list[Batch]:
    """Length-bucketed batches. With an rng, example order is shuffled
    before bucketing and the batch order is shuffled too; without one the
    original order is kept exactly (prediction)."""
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    idx = list(range(len(examples)))
    if rng is not None:
        idx = [int(i) for i in rng.permutation(len(examples))]
        idx.sort(key=lambda i: examples[i].length)  # stable: keeps shuffle within a length
    chunks = [idx[i : i + batch_size] for i in range(0, len(idx), batch_size)]
    if rng is not None and len(chunks) > 1:
        chunks = [chunks[int(j)] for j in rng.permutation(len(chunks))]
    return [
        make_batch([examples[i] for i in chunk], pads.word, pads.pos, pads.relpos,
                   min_length=min_length)
        for chunk in chunks
    ]


def build_model(
    arch: str,
    embed: EmbedSpec,
    n_classes: int,
    seed: int,
    dtype,
    cnn_config: Optional[CnnConfig] = None,
    rnn_config: Optional[RnnConfig] = None,
    word_init: Optional[np.ndarray] = None,
):
    if arch == "cnn":
        return CnnModel(embed, cnn_config or CnnConfig(), n_classes, seed=seed,
                        dtype=dtype, word_init=word_init)
    if arch == "rnn":
        return RnnModel(embed, rnn_config or RnnConfig(), n_classes, seed=seed,
                        dtype=dtype, word_init=word_init)
    raise ValueError(f"unknown architecture {arch!r}; expected 'cnn' or 'rnn'")


def train_model(
    arch: str,
    embed: EmbedSpec,
    data: Sequence[EncodedExample],
    n_classes: int,
    *,
    epochs: int,
    batch_size: int,
    seed: int,
    pads: PadIds,
    lr_initial: float = 0.01,
    lr_halve_every: int = 25,
    cnn_config: Optional[CnnConfig] = None,
    rnn_config: Optional[RnnConfig] = None,
    word_init: Optional[np.ndarray] = None,
    dtype=np.float32,
    weights: Optional[np.ndarray] = None,
):
    """Train one model; returns ``(model, per-epoch mean losses)``.

    All randomness (init, shuffling, dropout) derives from ``seed``, so
    equal seeds give bit-identical parameters. ``epochs=0`` returns the
    freshly initialized model untouched.
    """
    if epochs < 0:
        raise ValueError(f"epochs must be >= 0, got {epochs}")
    if not data:
        raise ValueError("training data is empty")
    if any(ex.label is None for ex in data):
        raise ValueError("training data contains unlabeled examples")
    model = build_model(arch, embed, n_classes, seed, dtype,
                        cnn_config=cnn_config, rnn_config=rnn_config,
                        word_init=word_init)
    if weights is None:
        weights = weights_from_labels([ex.label for ex in data], n_classes)
    optimizer = Adam()
    shuffle_rng = np.random.default_rng(derive_seed(seed, "shuffle"))
    dropout_rng = np.random.default_rng(derive_seed(seed, "dropout"))
    history: list[float] = []
    for epoch in range(epochs):
        lr = lr_schedule(lr_initial, epoch, lr_halve_every)
        losses = []
        for batch in iter_batches(data, batch_size, pads, model.min_length,
                                  rng=shuffle_rng):
            losses.append(
                train_step(model, batch, optimizer, lr, weights,
                           dropout_rng=dropout_rng)
            )
        mean = float(np.mean(losses))
        history.append(mean)
        logger.info("%s epoch %d/%d lr=%.5f loss=%.4f",
                    arch, epoch + 1, epochs, lr, mean)
    return model, history


@dataclass(frozen=True)
class MemberSpec:
    """One ensemble slot: architecture plus derived seed."""

    index: int
    arch: str
    seed: int


def member_specs(ensemble_size: int, master_seed: int) -> list[MemberSpec]:
    """Even CNN/RNN split (CNN takes the extra slot when odd); seeds are
    fanned out of the master seed by member name."""
    if ensemble_size < 1:
        raise ValueError(f"ensemble_size must be >= 1, got {ensemble_size}")
    n_cnn = math.ceil(ensemble_size / 2)
    specs = []
    for i in range(ensemble_size):
        arch = "cnn" if i < n_cnn else "rnn"
        specs.append(MemberSpec(i, arch, derive_seed(master_seed, f"member-{i}")))
    return specs


def _train_member(args) -> tuple[int, object, list[float]]:
    spec, kwargs = args
    model, history = train_model(spec.arch, seed=spec.seed, **kwargs)
    return spec.index, model, history


def train_ensemble(
    specs: Sequence[MemberSpec],
    embed: EmbedSpec,
    data: Sequence[EncodedExample],
    n_classes: int,
    *,
    epochs: int,
    batch_size: int,
    pads: PadIds,
    lr_initial: float = 0.01,
    lr_halve_every: int = 25,
    cnn_config: Optional[CnnConfig] = None,
    rnn_config: Optional[RnnConfig] = None,
    word_init: Optional[np.ndarray] = None,
    dtype=np.float32,
    workers: int = 1,
) -> tuple[list, list[list[float]]]:
    """Train every member; returns (models, histories) in member order.
    Members are independent, so optional process parallelism cannot change
    the result."""
    kwargs = dict(
        embed=embed, data=list(data), n_classes=n_classes, epochs=epochs,
        batch_size=batch_size, pads=pads, lr_initial=lr_initial,
        lr_halve_every=lr_halve_every, cnn_config=cnn_config,
        rnn_config=rnn_config, word_init=word_init, dtype=dtype,
    )
    jobs = [(spec, kwargs) for spec in specs]
    results: dict[int, tuple[object, list[float]]] = {}
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for index, model, history in pool.map(_train_member, jobs):
                results[index] = (model, history)
    else:
        for job in jobs:
            index, model, history = _train_member(job)
            results[index] = (model, history)
    models = [results[spec.index][0] for spec in specs]
    histories = [results[spec.index][1] for spec in specs]
    return models, histories


def hash_examples(examples: Sequence[EncodedExample]) -> str:
    """Stable digest of an encoded dataset, for run manifests."""
    digest = hashlib.sha256()
    for ex in examples:
        for arr in (ex.word_ids, ex.pos_ids, ex.relpos1_ids, ex.relpos2_ids):
            digest.update(np.ascontiguousarray(arr, dtype=np.int64).tobytes())
        digest.update(str(ex.label).encode())
        digest.update(ex.original_length.to_bytes(4, "little", signed=True))
    return digest.hexdigest()[:16]
