"""Bidirectional LSTM sentence classifier.

One dynamic LSTM per direction; the classifier feature is the
concatenation of each direction's final hidden and cell states, giving
4 x lstm_units values. Padded positions never enter the recurrence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import EmbedSpec, SequenceClassifier
from .layers import Batch, lstm_backward, lstm_forward, reverse_padded


@dataclass(frozen=True)
class RnnConfig:
    lstm_units: int = 600
    dropout_keep: float = 0.5
    l2_lambda: float = 0.01

    def __post_init__(self) -> None:
        if self.lstm_units < 1:
            raise ValueError("lstm_units must be >= 1")


class RnnModel(SequenceClassifier):
    arch = "rnn"

    def __init__(
        self,
        embed: EmbedSpec,
        config: RnnConfig,
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
        return 4 * self.config.lstm_units

    def _init_encoder(self, rng) -> None:
        d = self.embed.token_dim
        h = self.config.lstm_units
        for direction in ("fwd", "bwd"):
            self.params[f"lstm_{direction}_w"] = self._glorot(rng, (d + h, 4 * h))
            bias = np.zeros(4 * h, dtype=self.dtype)
            bias[h : 2 * h] = 1.0  # forget gate starts open
            self.params[f"lstm_{direction}_b"] = bias

    def _encoder_forward(self, x: np.ndarray, batch: Batch):
        mask = batch.mask(dtype=x.dtype)
        h_f, c_f, cache_f = lstm_forward(
            x, mask, self.params["lstm_fwd_w"], self.params["lstm_fwd_b"]
        )
        x_rev = reverse_padded(x, batch.lengths)
        h_b, c_b, cache_b = lstm_forward(
            x_rev, mask, self.params["lstm_bwd_w"], self.params["lstm_bwd_b"]
        )
        feat = np.concatenate([h_f, c_f, h_b, c_b], axis=1)
        return feat, {"fwd": cache_f, "bwd": cache_b, "lengths": batch.lengths}

    def _encoder_backward(self, dfeat: np.ndarray, cache: dict):
        h = self.config.lstm_units
        dh_f, dc_f, dh_b, dc_b = (
            dfeat[:, :h],
            dfeat[:, h : 2 * h],
            dfeat[:, 2 * h : 3 * h],
            dfeat[:, 3 * h :],
        )
        dx_f, dw_f, db_f = lstm_backward(
            dh_f, dc_f, self.params["lstm_fwd_w"], cache["fwd"]
        )
        dx_b, dw_b, db_b = lstm_backward(
            dh_b, dc_b, self.params["lstm_bwd_w"], cache["bwd"]
        )
        dx = dx_f + reverse_padded(dx_b, cache["lengths"])
        grads = {
            "lstm_fwd_w": dw_f,
            "lstm_fwd_b": db_f,
            "lstm_bwd_w": dw_b,
            "lstm_bwd_b": db_b,
        }
        return dx, grads
