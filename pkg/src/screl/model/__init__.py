"""Neural sentence classifiers: a multi-width CNN and a bidirectional
LSTM over shared word/POS/position embeddings, trained with
frequency-weighted cross-entropy and Adam."""

from __future__ import annotations

from typing import Optional

import numpy as np

from .base import EmbedSpec, SequenceClassifier  # noqa: F401
from .cnn import CnnConfig, CnnModel  # noqa: F401
from .io import load_model, save_model  # noqa: F401
from .layers import Batch, make_batch  # noqa: F401
from .loss import EPS, class_weights, softmax, weighted_ce, weighted_ce_batch  # noqa: F401
from .optimizer import Adam  # noqa: F401
from .rnn import RnnConfig, RnnModel  # noqa: F401


def train_step(
    model: SequenceClassifier,
    batch: Batch,
    optimizer: Adam,
    lr: float,
    weights: np.ndarray,
    dropout_rng: Optional[np.random.Generator] = None,
) -> float:
    """One mini-batch update; returns the batch loss.

    A non-finite loss aborts with a diagnostic instead of silently
    poisoning the parameters.
    """
    loss, grads = model.loss_and_grads(
        batch, weights, train=True, dropout_rng=dropout_rng
    )
    if not np.isfinite(loss):
        norms = {
            name: float(np.linalg.norm(value.astype(np.float64)))
            for name, value in model.params.items()
        }
        raise FloatingPointError(
            f"non-finite loss {loss!r} at optimizer step {optimizer.t + 1}; "
            f"parameter norms: {norms}"
        )
    optimizer.step(model.params, grads, lr)
    return loss
