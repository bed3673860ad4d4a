"""Shared skeleton of the two sentence classifiers.

Both models embed the four id channels, run an architecture-specific
encoder to a fixed-width feature vector, apply dropout, and classify with
one affine layer. L2 regularization touches only that final layer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .layers import (
    Batch,
    dropout_backward,
    dropout_forward,
    embed_backward,
    embed_forward,
)
from .loss import softmax, weighted_ce_batch


@dataclass(frozen=True)
class EmbedSpec:
    """Sizes of the four embedding tables."""

    vocab_size: int
    pos_size: int
    relpos_size: int
    word_dim: int = 200
    pos_dim: int = 30
    relpos_dim: int = 20
    finetune_words: bool = True

    def __post_init__(self) -> None:
        for field in ("vocab_size", "pos_size", "relpos_size", "word_dim",
                      "pos_dim", "relpos_dim"):
            if getattr(self, field) < 1:
                raise ValueError(f"{field} must be >= 1")

    @property
    def token_dim(self) -> int:
        return self.word_dim + self.pos_dim + 2 * self.relpos_dim


class SequenceClassifier:
    """Base class; subclasses add encoder parameters and passes."""

    arch = ""

    def __init__(
        self,
        embed: EmbedSpec,
        n_classes: int,
        dropout_keep: float,
        l2_lambda: float,
        seed: int = 0,
        dtype=np.float32,
        word_init: Optional[np.ndarray] = None,
    ):
        if n_classes < 2:
            raise ValueError(f"n_classes must be >= 2, got {n_classes}")
        if not 0.0 < dropout_keep <= 1.0:
            raise ValueError(f"dropout_keep must be in (0, 1], got {dropout_keep}")
        if l2_lambda < 0.0:
            raise ValueError(f"l2_lambda must be >= 0, got {l2_lambda}")
        self.embed = embed
        self.n_classes = n_classes
        self.dropout_keep = dropout_keep
        self.l2_lambda = l2_lambda
        self.seed = seed
        self.dtype = np.dtype(dtype)
        rng = np.random.default_rng(seed)
        self.params: dict[str, np.ndarray] = {}
        self._init_embeddings(rng, word_init)
        self._init_encoder(rng)
        self.params["fc_w"] = self._glorot(rng, (self.feature_dim, n_classes))
        self.params["fc_b"] = np.zeros(n_classes, dtype=self.dtype)

    # -- construction helpers ------------------------------------------------

    def _glorot(self, rng, shape) -> np.ndarray:
        limit = np.sqrt(6.0 / (shape[0] + shape[-1]))
        return rng.uniform(-limit, limit, size=shape).astype(self.dtype)

    def _uniform_table(self, rng, rows, dim) -> np.ndarray:
        return rng.uniform(-0.5 / dim, 0.5 / dim, size=(rows, dim)).astype(self.dtype)

    def _init_embeddings(self, rng, word_init: Optional[np.ndarray]) -> None:
        if word_init is not None:
            expected = (self.embed.vocab_size, self.embed.word_dim)
            if word_init.shape != expected:
                raise ValueError(
                    f"word embedding table has shape {word_init.shape}, "
                    f"expected {expected}"
                )
            self.params["word_emb"] = word_init.astype(self.dtype).copy()
        else:
            self.params["word_emb"] = self._uniform_table(
                rng, self.embed.vocab_size, self.embed.word_dim
            )
        self.params["pos_emb"] = self._uniform_table(
            rng, self.embed.pos_size, self.embed.pos_dim
        )
        self.params["relpos1_emb"] = self._uniform_table(
            rng, self.embed.relpos_size, self.embed.relpos_dim
        )
        self.params["relpos2_emb"] = self._uniform_table(
            rng, self.embed.relpos_size, self.embed.relpos_dim
        )

    # -- subclass contract ---------------------------------------------------

    @property
    def feature_dim(self) -> int:
        raise NotImplementedError

    @property
    def min_length(self) -> int:
        """Smallest per-example padded length the encoder can digest."""
        return 1

    def _init_encoder(self, rng) -> None:
        raise NotImplementedError

    def _encoder_forward(self, x: np.ndarray, batch: Batch) -> tuple[np.ndarray, dict]:
        raise NotImplementedError

    def _encoder_backward(
        self, dfeat: np.ndarray, cache: dict
    ) -> tuple[np.ndarray, dict[str, np.ndarray]]:
        raise NotImplementedError

    # -- forward/backward ------------------------------------------------------

    def forward(
        self,
        batch: Batch,
        train: bool = False,
        dropout_rng: Optional[np.random.Generator] = None,
    ) -> tuple[np.ndarray, dict]:
        if train and self.dropout_keep < 1.0 and dropout_rng is None:
            raise ValueError("training forward pass needs a dropout rng")
        x, ecache = embed_forward(self.params, batch)
        feat, enc_cache = self._encoder_forward(x, batch)
        dropped, mask = dropout_forward(
            feat, self.dropout_keep, dropout_rng if train else None
        )
        logits = dropped @ self.params["fc_w"] + self.params["fc_b"]
        cache = {"embed": ecache, "encoder": enc_cache, "dropped": dropped,
                 "mask": mask}
        return logits, cache

    def backward(self, dlogits: np.ndarray, cache: dict) -> dict[str, np.ndarray]:
        grads: dict[str, np.ndarray] = {}
        grads["fc_w"] = cache["dropped"].T @ dlogits
        grads["fc_b"] = dlogits.sum(axis=0)
        dfeat = dropout_backward(dlogits @ self.params["fc_w"].T, cache["mask"])
        dx, enc_grads = self._encoder_backward(dfeat, cache["encoder"])
        grads.update(enc_grads)
        grads.update(embed_backward(dx, cache["embed"], self.params))
        if not self.embed.finetune_words:
            del grads["word_emb"]
        return grads

    def loss_and_grads(
        self,
        batch: Batch,
        weights: np.ndarray,
        train: bool = True,
        dropout_rng: Optional[np.random.Generator] = None,
    ) -> tuple[float, dict[str, np.ndarray]]:
        """Mean weighted cross-entropy plus the L2 term on the final affine
        layer, and gradients for every trainable parameter."""
        if batch.labels is None:
            raise ValueError("batch carries no labels")
        logits, cache = self.forward(batch, train=train, dropout_rng=dropout_rng)
        loss, dlogits = weighted_ce_batch(logits, batch.labels, weights)
        grads = self.backward(dlogits, cache)
        if self.l2_lambda > 0.0:
            fc_w, fc_b = self.params["fc_w"], self.params["fc_b"]
            loss += 0.5 * self.l2_lambda * (
                float(np.sum(fc_w.astype(np.float64) ** 2))
                + float(np.sum(fc_b.astype(np.float64) ** 2))
            )
            grads["fc_w"] = grads["fc_w"] + self.l2_lambda * fc_w
            grads["fc_b"] = grads["fc_b"] + self.l2_lambda * fc_b
        return loss, grads

    def predict_proba(self, batch: Batch) -> np.ndarray:
        logits, _ = self.forward(batch, train=False)
        return softmax(logits)

    def predict(self, batch: Batch) -> np.ndarray:
        return self.predict_proba(batch).argmax(axis=1)
