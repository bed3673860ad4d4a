"""Convolutional sentence classifier.

One convolution per filter width over the concatenated token embeddings,
ReLU, max-over-time pooling per width, and concatenation into a single
feature vector (width count x filters per width).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import EmbedSpec, SequenceClassifier
from .layers import Batch, conv_maxpool_backward, conv_maxpool_forward


@dataclass(frozen=True)
class CnnConfig:
    filter_widths: tuple[int, ...] = (2, 3, 4, 5, 6, 7)
    filters_per_width: int = 192
    dropout_keep: float = 0.5
    l2_lambda: float = 0.01

    def __post_init__(self) -> None:
        object.__setattr__(self, "filter_widths", tuple(self.filter_widths))
        if not self.filter_widths or any(w < 1 for w in self.filter_widths):
            raise ValueError("filter widths must be positive")
        if list(self.filter_widths) != sorted(set(self.filter_widths)):
            raise ValueError("filter widths must be strictly ascending")
        if self.filters_per_width < 1:
            raise ValueError("filters_per_width must be >= 1")


class CnnModel(SequenceClassifier):
    arch = "cnn"

    def __init__(
        self,
        embed: EmbedSpec,
        config: CnnConfig,
        n_classes: int,
        seed: int = 0,
        dtype=np.float32,
        word_init=None,
    ):
        self.config = config
        super().__init__(
            embed,
            n_classes,
            config.dropout_keep,
            config.l2_lambda,
            seed=seed,
            dtype=dtype,
            word_init=word_init,
        )

    @property
    def feature_dim(self) -> int:
        return len(self.config.filter_widths) * self.config.filters_per_width

    @property
    def min_length(self) -> int:
        return max(self.config.filter_widths)

    def _init_encoder(self, rng) -> None:
        d = self.embed.token_dim
        f = self.config.filters_per_width
        for width in self.config.filter_widths:
            self.params[f"conv{width}_w"] = self._glorot(rng, (width * d, f))
            self.params[f"conv{width}_b"] = np.zeros(f, dtype=self.dtype)

    def _encoder_forward(self, x: np.ndarray, batch: Batch):
        if x.shape[1] < self.min_length:
            raise ValueError(
                f"batch length {x.shape[1]} is below the largest filter "
                f"width {self.min_length}; pad with make_batch(min_length=...)"
            )
        padded = np.maximum(batch.lengths, self.min_length)
        pooled = []
        caches = []
        for width in self.config.filter_widths:
            valid = padded - width + 1
            p, cache = conv_maxpool_forward(
                x,
                self.params[f"conv{width}_w"],
                self.params[f"conv{width}_b"],
                width,
                valid,
            )
            pooled.append(p)
            caches.append(cache)
        return np.concatenate(pooled, axis=1), {"caches": caches}

    def _encoder_backward(self, dfeat: np.ndarray, cache: dict):
        f = self.config.filters_per_width
        dx = None
        grads: dict[str, np.ndarray] = {}
        for k, width in enumerate(self.config.filter_widths):
            chunk = dfeat[:, k * f : (k + 1) * f]
            dxk, dw, db = conv_maxpool_backward(
                chunk, self.params[f"conv{width}_w"], cache["caches"][k]
            )
            grads[f"conv{width}_w"] = dw
            grads[f"conv{width}_b"] = db
            dx = dxk if dx is None else dx + dxk
        return dx, grads
